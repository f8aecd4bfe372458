#pragma once
#include "speclab/banded.hpp"

#include <optional>
#include <vector>

namespace speclab {

struct EigPair {
    double lambda = 0.0;
    std::vector<double> vec;     // unit 2-norm
    double residual = 0.0;       // ||A v - lambda v||_2
    int iters = 0;
};

// All eigenvalues in (vl, vu], bisection on the tridiagonalized band (dsbevx,
// values only). Exact in-window counts come from the same Sturm machinery.
std::vector<double> window_eigenvalues(const BandedSymmetric& A, double vl, double vu);

// Number of eigenvalues below sigma: inertia of A - sigma I by unpivoted
// banded LDL^T with tiny-pivot perturbation (spectrum-slicing standard).
long eigenvalue_count_below(const BandedSymmetric& A, double sigma);
long window_count(const BandedSymmetric& A, double vl, double vu);

// Inverse iteration with a fixed shift, banded LU backend (dgbtrf/dgbtrs).
// Converges to an eigenpair at `sigma`'s end of the spectrum; when the two
// nearest eigenvalues are nearly tied the winner depends on the start vector,
// so callers that need certainty pair this with the inertia counts below.
// Optional warm-start vector and deflation subspace (vectors projected out
// each iteration).
EigPair shift_invert(const BandedSymmetric& A, double sigma,
                     const std::vector<double>* warm_start = nullptr,
                     const std::vector<std::vector<double>>* deflate = nullptr,
                     double tol = 1e-11, int max_iter = 400);

// Dense eigendecomposition oracle (dsyev). Returns ascending eigenvalues;
// vectors optional (row k of `vectors` = k-th eigenvector when requested).
struct DenseEig {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;
};
DenseEig dense_eigensolve(const BandedSymmetric& A, bool want_vectors);

} // namespace speclab
