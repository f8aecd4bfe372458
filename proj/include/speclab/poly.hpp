#pragma once
#include <vector>
#include <cstddef>

namespace speclab {

// Polynomial in (x - x0), coefficients ascending.
struct LocalPoly {
    double x0 = 0.0;
    std::vector<double> c;

    double eval(double x) const;
    double deriv1(double x) const;
    double deriv2(double x) const;
    double deriv(double x, int order) const;
    LocalPoly derivative() const;
    int degree() const { return c.empty() ? -1 : int(c.size()) - 1; }

    // Exact Taylor coefficients about `center`, ascending, length n.
    std::vector<double> taylor(double center, int n) const;
};

// Piecewise polynomial on [breaks.front(), breaks.back()].
struct PiecewisePoly {
    std::vector<double> breaks;     // size pieces+1, ascending
    std::vector<LocalPoly> pieces;

    double operator()(double x) const { return piece(x).eval(x); }
    double d1(double x) const { return piece(x).deriv1(x); }
    double d2(double x) const { return piece(x).deriv2(x); }
    double dn(double x, int order) const { return piece(x).deriv(x, order); }

    const LocalPoly& piece(double x, int* index = nullptr) const;
    int piece_index(double x) const;
    // Distance from x to the nearest interior break point.
    double distance_to_break(double x) const;
};

// Unique polynomial of degree 2q+1 matching value and first q derivatives at
// both ends. data0/data1 hold (value, d1, ..., dq).
LocalPoly hermite_patch(double x0, double x1,
                        const std::vector<double>& data0,
                        const std::vector<double>& data1);

// C2 smoothstep: 0 at t<=0, 1 at t>=1, zero 1st/2nd derivatives at both ends.
double smoothstep5(double t);
double smoothstep5_d1(double t);

// Truncated power series helpers (ascending coefficients, fixed length).
std::vector<double> series_mul(const std::vector<double>& a, const std::vector<double>& b, int len);
std::vector<double> series_div(const std::vector<double>& a, const std::vector<double>& b, int len);
std::vector<double> series_deriv(const std::vector<double>& a);

// Dense polynomial utilities (ascending coefficients).
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b);
void poly_axpy(std::vector<double>& y, double s, const std::vector<double>& x);
double poly_eval(const std::vector<double>& c, double x);
std::vector<double> poly_integrate(const std::vector<double>& c); // antiderivative, 0 at 0
std::vector<double> poly_derivative(const std::vector<double>& c);

} // namespace speclab
