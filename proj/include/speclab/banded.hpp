#pragma once
#include <vector>

namespace speclab {

// Symmetric banded matrix, lower storage, LAPACK 'sb' layout (column major,
// ldab = kd+1): ab[(kd+1)*j + (i-j)] = A(i,j) for j <= i <= j+kd.
struct BandedSymmetric {
    int n = 0;
    int kd = 0;
    std::vector<double> ab;

    BandedSymmetric() = default;
    BandedSymmetric(int n_, int kd_) : n(n_), kd(kd_), ab(size_t(kd_ + 1) * n_, 0.0) {}

    double& at(int i, int j) { return ab[size_t(kd + 1) * j + size_t(i - j)]; }
    double get(int i, int j) const {
        if (i < j) { const int t = i; i = j; j = t; }
        if (i - j > kd) return 0.0;
        return ab[size_t(kd + 1) * j + size_t(i - j)];
    }

    // y = A x
    void apply(const double* x, double* y) const;
    std::vector<double> to_dense() const;   // row major n*n
};

} // namespace speclab
