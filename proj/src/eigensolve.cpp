#include "speclab/eigensolve.hpp"
#include "speclab/errors.hpp"

#include <lapacke.h>

#include <cmath>
#include <cstring>
#include <random>

namespace speclab {

std::vector<double> window_eigenvalues(const BandedSymmetric& A, double vl, double vu) {
    std::vector<double> ab(A.ab);                    // dsbevx destroys ab
    std::vector<double> w(size_t(A.n));
    std::vector<lapack_int> ifail(size_t(A.n));
    lapack_int m = 0;
    lapack_int info = LAPACKE_dsbevx(
        LAPACK_COL_MAJOR, 'N', 'V', 'L', A.n, A.kd, ab.data(), A.kd + 1,
        nullptr, 1, vl, vu, 0, 0, 2.0 * LAPACKE_dlamch('S'), &m,
        w.data(), nullptr, 1, ifail.data());
    if (info != 0) throw SolverFailure("dsbevx failed, info=" + std::to_string(info));
    w.resize(size_t(m));
    return w;
}

long eigenvalue_count_below(const BandedSymmetric& A, double sigma) {
    const int n = A.n, kd = A.kd;
    const int ld = kd + 1;
    std::vector<double> w(A.ab);
    for (int j = 0; j < n; ++j) w[size_t(ld) * j] -= sigma;
    long neg = 0;
    std::vector<double> l(size_t(kd) + 1, 0.0);
    for (int j = 0; j < n; ++j) {
        double d = w[size_t(ld) * j];
        if (std::fabs(d) < 1e-300) d = (d >= 0.0 ? 1e-300 : -1e-300);
        if (d < 0.0) ++neg;
        const int kmax = std::min(kd, n - 1 - j);
        for (int i = 1; i <= kmax; ++i) l[size_t(i)] = w[size_t(ld) * j + i] / d;
        for (int p = 1; p <= kmax; ++p) {
            const double ldp = l[size_t(p)] * d;
            for (int q = p; q <= kmax; ++q)
                w[size_t(ld) * (j + p) + (q - p)] -= l[size_t(q)] * ldp;
        }
    }
    return neg;
}

long window_count(const BandedSymmetric& A, double vl, double vu) {
    return eigenvalue_count_below(A, vu) - eigenvalue_count_below(A, vl);
}

namespace {

// Banded LU of (A - sigma I) in LAPACK 'gb' storage with pivoting space.
struct BandedLU {
    int n, kl, ku, ldab;
    std::vector<double> ab;
    std::vector<lapack_int> ipiv;

    BandedLU(const BandedSymmetric& A, double sigma)
        : n(A.n), kl(A.kd), ku(A.kd), ldab(2 * A.kd + A.kd + 1),
          ab(size_t(ldab) * A.n, 0.0), ipiv(size_t(A.n)) {
        for (int j = 0; j < n; ++j) {
            const int imax = (j + kl < n - 1) ? j + kl : n - 1;
            for (int i = j; i <= imax; ++i) {
                const double v = A.ab[size_t(A.kd + 1) * j + size_t(i - j)];
                // A(i,j) and A(j,i)
                ab[size_t(ldab) * j + size_t(kl + ku + i - j)] += v;
                if (i != j) ab[size_t(ldab) * i + size_t(kl + ku + j - i)] += v;
            }
            ab[size_t(ldab) * j + size_t(kl + ku)] -= sigma;
        }
        lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku,
                                         ab.data(), ldab, ipiv.data());
        if (info < 0) throw SolverFailure("dgbtrf failed, info=" + std::to_string(info));
        singular = (info > 0);
    }

    bool singular = false;

    void solve(std::vector<double>& x) const {
        lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1,
                                         ab.data(), ldab, ipiv.data(), x.data(), n);
        if (info != 0) throw SolverFailure("dgbtrs failed, info=" + std::to_string(info));
    }
};

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void orthogonalize(std::vector<double>& x, const std::vector<std::vector<double>>& basis) {
    for (const auto& b : basis) {
        const double c = dot(x, b);
        for (size_t i = 0; i < x.size(); ++i) x[i] -= c * b[i];
    }
}

} // namespace

EigPair shift_invert(const BandedSymmetric& A, double sigma,
                     const std::vector<double>* warm_start,
                     const std::vector<std::vector<double>>* deflate,
                     double tol, int max_iter) {
    double scale = 1.0;
    for (double v : A.ab) scale = std::max(scale, std::fabs(v));
    double shift = sigma;
    BandedLU lu(A, shift);
    for (double eps = 1e-13 * scale; lu.singular; eps *= 1e3) {
        // sigma hit an eigenvalue head on; nudge the shift off it
        if (eps > 1e-3 * scale) throw SolverFailure("shift_invert: singular factorization");
        shift = sigma + eps;
        lu = BandedLU(A, shift);
    }

    std::vector<double> x;
    if (warm_start && int(warm_start->size()) == A.n) {
        x = *warm_start;
    } else {
        std::mt19937_64 rng(0x5eC1ab5eedULL);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        x.resize(size_t(A.n));
        for (auto& v : x) v = u(rng);
    }
    if (deflate) orthogonalize(x, *deflate);
    double nx = norm2(x);
    if (nx == 0.0) throw SolverFailure("shift_invert: zero start vector");
    for (auto& v : x) v /= nx;

    std::vector<double> y(size_t(A.n)), Ax(size_t(A.n));
    EigPair out;
    double lambda = shift;
    int refactors = 0;
    for (int it = 1; it <= max_iter; ++it) {
        y = x;
        lu.solve(y);
        if (deflate) orthogonalize(y, *deflate);
        const double ny = norm2(y);
        if (!(ny > 0.0) || !std::isfinite(ny))
            throw SolverFailure("shift_invert: iteration breakdown");
        for (auto& v : y) v /= ny;
        x.swap(y);
        A.apply(x.data(), Ax.data());
        lambda = dot(x, Ax);
        double rn = 0.0;
        for (int i = 0; i < A.n; ++i) {
            const double d = Ax[size_t(i)] - lambda * x[size_t(i)];
            rn += d * d;
        }
        rn = std::sqrt(rn);
        out.iters = it;
        if (rn <= tol * std::max(1.0, std::fabs(lambda))) {
            out.lambda = lambda;
            out.vec = x;
            out.residual = rn;
            return out;
        }
        // Stagnation (two eigenvalues near-equidistant from the shift):
        // refactor at the Rayleigh estimate, which breaks the tie.
        if (it % 30 == 0 && refactors < 4) {
            shift = lambda + std::ldexp(std::fabs(lambda) + 1.0, -40) * double(refactors + 1);
            BandedLU lu2(A, shift);
            if (!lu2.singular) {
                lu = std::move(lu2);
                ++refactors;
            }
        }
    }
    throw SolverFailure("shift_invert: no convergence after max_iter");
}

DenseEig dense_eigensolve(const BandedSymmetric& A, bool want_vectors) {
    std::vector<double> d = A.to_dense();
    std::vector<double> w(size_t(A.n));
    lapack_int info = LAPACKE_dsyev(LAPACK_ROW_MAJOR, want_vectors ? 'V' : 'N', 'U',
                                    A.n, d.data(), A.n, w.data());
    if (info != 0) throw SolverFailure("dsyev failed, info=" + std::to_string(info));
    DenseEig out;
    out.values = w;
    if (want_vectors) {
        out.vectors.resize(size_t(A.n));
        for (int k = 0; k < A.n; ++k) {
            out.vectors[size_t(k)].resize(size_t(A.n));
            for (int i = 0; i < A.n; ++i)
                out.vectors[size_t(k)][size_t(i)] = d[size_t(i) * A.n + size_t(k)];
        }
    }
    return out;
}

} // namespace speclab
