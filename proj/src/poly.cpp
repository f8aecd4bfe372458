#include "speclab/poly.hpp"
#include "speclab/errors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace speclab {

double LocalPoly::eval(double x) const {
    const double t = x - x0;
    double acc = 0.0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
    return acc;
}

double LocalPoly::deriv1(double x) const {
    const double t = x - x0;
    double acc = 0.0;
    for (size_t i = c.size(); i-- > 1;) acc = acc * t + double(i) * c[i];
    return acc;
}

double LocalPoly::deriv2(double x) const {
    const double t = x - x0;
    double acc = 0.0;
    for (size_t i = c.size(); i-- > 2;) acc = acc * t + double(i) * double(i - 1) * c[i];
    return acc;
}

double LocalPoly::deriv(double x, int order) const {
    if (order == 0) return eval(x);
    if (order == 1) return deriv1(x);
    if (order == 2) return deriv2(x);
    if (size_t(order) >= c.size()) return 0.0;
    const double t = x - x0;
    double acc = 0.0;
    for (size_t i = c.size(); i-- > size_t(order);) {
        double f = 1.0;
        for (int p = 0; p < order; ++p) f *= double(i - p);
        acc = acc * t + f * c[i];
    }
    return acc;
}

LocalPoly LocalPoly::derivative() const {
    LocalPoly d;
    d.x0 = x0;
    if (c.size() <= 1) { d.c = {0.0}; return d; }
    d.c.resize(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) d.c[i - 1] = double(i) * c[i];
    return d;
}

std::vector<double> LocalPoly::taylor(double center, int n) const {
    // Horner shift: rewrite sum c_i t^i in powers of (t - s), s = center - x0.
    const double s = center - x0;
    std::vector<double> w(c.begin(), c.end());
    if (w.empty()) w = {0.0};
    const int d = int(w.size()) - 1;
    for (int j = 0; j < d; ++j)
        for (int i = d - 1; i >= j; --i) w[size_t(i)] += s * w[size_t(i + 1)];
    w.resize(size_t(n), 0.0);
    return w;
}

const LocalPoly& PiecewisePoly::piece(double x, int* index) const {
    int i = piece_index(x);
    if (index) *index = i;
    return pieces[size_t(i)];
}

int PiecewisePoly::piece_index(double x) const {
    const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
    int i = int(it - breaks.begin()) - 1;
    if (i < 0) i = 0;
    if (i >= int(pieces.size())) i = int(pieces.size()) - 1;
    return i;
}

double PiecewisePoly::distance_to_break(double x) const {
    double d = 1e300;
    for (size_t i = 1; i + 1 < breaks.size(); ++i) d = std::min(d, std::fabs(x - breaks[i]));
    return d;
}

LocalPoly hermite_patch(double x0, double x1,
                        const std::vector<double>& data0,
                        const std::vector<double>& data1) {
    const int q = int(data0.size()) - 1;
    if (q < 0 || data1.size() != data0.size())
        throw ConstructionFailure("hermite_patch: inconsistent end data");
    const int n = 2 * (q + 1);
    const double L = x1 - x0;
    // Solve for coefficients of p(t), t in [0,1], p^(j)(0)=data0[j]*L^j etc.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs(n);
    for (int j = 0; j <= q; ++j) {
        double fact = 1.0;
        for (int p = 0; p < j; ++p) fact *= double(j - p);
        // p^(j)(0) = j! * a_j
        A(j, j) = fact;
        rhs(j) = data0[size_t(j)] * std::pow(L, j);
        // p^(j)(1) = sum_{i>=j} i!/(i-j)! a_i
        for (int i = j; i < n; ++i) {
            double f = 1.0;
            for (int p = 0; p < j; ++p) f *= double(i - p);
            A(q + 1 + j, i) = f;
        }
        rhs(q + 1 + j) = data1[size_t(j)] * std::pow(L, j);
    }
    Eigen::VectorXd a = A.fullPivLu().solve(rhs);
    // Convert p(t) with t=(x-x0)/L to coefficients in (x-x0).
    LocalPoly out;
    out.x0 = x0;
    out.c.resize(size_t(n));
    for (int i = 0; i < n; ++i) out.c[size_t(i)] = a(i) / std::pow(L, i);
    return out;
}

double smoothstep5(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep5_d1(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

std::vector<double> series_mul(const std::vector<double>& a, const std::vector<double>& b, int len) {
    std::vector<double> r(size_t(len), 0.0);
    for (int i = 0; i < len && i < int(a.size()); ++i)
        for (int j = 0; i + j < len && j < int(b.size()); ++j)
            r[size_t(i + j)] += a[size_t(i)] * b[size_t(j)];
    return r;
}

std::vector<double> series_div(const std::vector<double>& a, const std::vector<double>& b, int len) {
    if (b.empty() || b[0] == 0.0) throw SingularCoefficient("series_div: zero leading coefficient");
    std::vector<double> q(size_t(len), 0.0);
    for (int i = 0; i < len; ++i) {
        double s = (i < int(a.size())) ? a[size_t(i)] : 0.0;
        for (int j = 1; j <= i && j < int(b.size()); ++j) s -= b[size_t(j)] * q[size_t(i - j)];
        q[size_t(i)] = s / b[0];
    }
    return q;
}

std::vector<double> series_deriv(const std::vector<double>& a) {
    if (a.size() <= 1) return {0.0};
    std::vector<double> d(a.size() - 1);
    for (size_t i = 1; i < a.size(); ++i) d[i - 1] = double(i) * a[i];
    return d;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<double> r(a.size() + b.size() - 1, 0.0);
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

void poly_axpy(std::vector<double>& y, double s, const std::vector<double>& x) {
    if (y.size() < x.size()) y.resize(x.size(), 0.0);
    for (size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

double poly_eval(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
}

std::vector<double> poly_integrate(const std::vector<double>& c) {
    std::vector<double> r(c.size() + 1, 0.0);
    for (size_t i = 0; i < c.size(); ++i) r[i + 1] = c[i] / double(i + 1);
    return r;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> r(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) r[i - 1] = double(i) * c[i];
    return r;
}

} // namespace speclab
