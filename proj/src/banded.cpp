#include "speclab/banded.hpp"

namespace speclab {

void BandedSymmetric::apply(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) y[i] = 0.0;
    for (int j = 0; j < n; ++j) {
        const int imax = (j + kd < n - 1) ? j + kd : n - 1;
        const double xj = x[j];
        y[j] += ab[size_t(kd + 1) * j] * xj;
        for (int i = j + 1; i <= imax; ++i) {
            const double v = ab[size_t(kd + 1) * j + size_t(i - j)];
            y[i] += v * xj;
            y[j] += v * x[i];
        }
    }
}

std::vector<double> BandedSymmetric::to_dense() const {
    std::vector<double> d(size_t(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        const int imax = (j + kd < n - 1) ? j + kd : n - 1;
        for (int i = j; i <= imax; ++i) {
            const double v = ab[size_t(kd + 1) * j + size_t(i - j)];
            d[size_t(i) * n + j] = v;
            d[size_t(j) * n + i] = v;
        }
    }
    return d;
}

} // namespace speclab
