#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "speclab/banded.hpp"
#include "speclab/eigensolve.hpp"
#include "speclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace speclab;

namespace {
BandedSymmetric random_banded(int n, int kd, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    BandedSymmetric A(n, kd);
    for (int j = 0; j < n; ++j)
        for (int i = j; i <= std::min(n - 1, j + kd); ++i) A.at(i, j) = g(rng);
    return A;
}
}

TEST_CASE("banded apply equals dense multiply") {
    std::mt19937_64 rng(3);
    BandedSymmetric A = random_banded(40, 3, rng);
    const auto d = A.to_dense();
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(40), y(40);
    for (auto& v : x) v = g(rng);
    A.apply(x.data(), y.data());
    for (int i = 0; i < 40; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 40; ++j) acc += d[size_t(i) * 40 + j] * x[size_t(j)];
        CHECK(y[size_t(i)] == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("window eigenvalues and inertia counts agree with the dense solver") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 30 + int(rng() % 50);
        const int kd = 1 + int(rng() % 3);
        BandedSymmetric A = random_banded(n, kd, rng);
        DenseEig full = dense_eigensolve(A, false);
        const double vl = -1.3, vu = 0.9;
        long expect = 0;
        long below = 0;
        for (double v : full.values) {
            if (v > vl && v <= vu) ++expect;
            if (v < vu) ++below;
        }
        const auto w = window_eigenvalues(A, vl, vu);
        CHECK(long(w.size()) == expect);
        CHECK(window_count(A, vl, vu) == expect);
        CHECK(eigenvalue_count_below(A, vu) == below);
        for (size_t q = 0; q < w.size(); ++q) {
            // each reported value matches a dense eigenvalue
            double best = 1e300;
            for (double v : full.values) best = std::min(best, std::fabs(v - w[q]));
            CHECK(best < 1e-9);
        }
    }
}

TEST_CASE("shift-invert matches the dense decomposition") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        BandedSymmetric A = random_banded(60, 2, rng);
        DenseEig full = dense_eigensolve(A, false);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        const double sigma = u(rng);
        EigPair ep = shift_invert(A, sigma);
        // the result is a genuine eigenvalue no farther than the second
        // nearest one (ties between the closest two go either way)
        std::vector<double> dist;
        for (double v : full.values) dist.push_back(std::fabs(v - sigma));
        std::sort(dist.begin(), dist.end());
        double gap = 1e300;
        for (double v : full.values) gap = std::min(gap, std::fabs(v - ep.lambda));
        CHECK(gap < 1e-9);
        CHECK(std::fabs(ep.lambda - sigma) <= dist[1] * (1.0 + 1e-12));
        CHECK(ep.residual < 1e-9);
    }
}

TEST_CASE("shift exactly on an eigenvalue still converges") {
    BandedSymmetric A(5, 1);
    for (int i = 0; i < 5; ++i) A.at(i, i) = double(i);
    EigPair ep = shift_invert(A, 2.0);     // exact eigenvalue of the diagonal
    CHECK(ep.lambda == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("deflation finds the second-nearest eigenvalue") {
    BandedSymmetric A(6, 1);
    const double vals[6] = {-3.0, -1.0, 0.2, 0.9, 2.5, 4.0};
    for (int i = 0; i < 6; ++i) A.at(i, i) = vals[i];
    EigPair first = shift_invert(A, 0.3);
    CHECK(first.lambda == doctest::Approx(0.2));
    std::vector<std::vector<double>> defl = {first.vec};
    EigPair second = shift_invert(A, 0.3, nullptr, &defl);
    CHECK(second.lambda == doctest::Approx(0.9));
}
