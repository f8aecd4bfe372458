#pragma once
#include "speclab/banded.hpp"
#include "speclab/eigensolve.hpp"
#include "speclab/ledger.hpp"
#include "speclab/parallel.hpp"
#include "speclab/profiles.hpp"

#include <functional>
#include <optional>

namespace speclab {

// Radial coefficient functions of the first-order 2-component system
//   ( r/2 + B ) a - b' - A b = lambda a
//   a' - A a - ( r/2 + B + E ) b = lambda b
// written against the drho measure.
struct RadialCoeffs {
    std::function<double(double)> A, B, E;
};

RadialCoeffs ck_coeffs(const ProfileSet& profiles, long k, long m);

// The ck coefficients are linear in (k, m); the per-grid profile data can be
// shared across every mode of a sweep. Nodes sit on the half-grid
// rho_t = (1 + 0.5 t) h (t = 0..2N-2, even t are a-nodes), couplings at the
// pair midpoints rho = (0.75 + 0.5 t) h (t = 1..2N-2).
struct CkCoeffCache {
    int N = 0;
    double h = 0.0;
    std::vector<double> G1m, F1m, C0m;      // midpoints, size 2N-1 (entry 0 unused)
    std::vector<double> G2d, F2d, Ed;       // nodes, size 2N-1
};
CkCoeffCache build_ck_cache(const ProfileSet& profiles, int N);
BandedSymmetric assemble_ck_cached(const CkCoeffCache& cache, long k, long m, double r);

// Staggered two-component discretization, h = 2/(N+1): a-samples on
// rho = (i+1) h (i = 0..N-1), b-samples on the interior midpoints
// rho = (j+1.5) h (j = 0..N-2), zero beyond. d/drho becomes the two-point
// centered difference between the families, so the derivative stencil has no
// spurious null frequency, and trimming the outermost b-nodes removes the
// pole-glued surface family the one-sided recurrence would otherwise admit.
// Coupling coefficients sit at pair midpoints, which keeps the matrix exactly
// symmetric and second order. The result is tridiagonal of size 2N-1,
// interleaved (a_0, b_0, a_1, b_1, ..., a_{N-1}).
struct DiscreteRadialOperator {
    BandedSymmetric matrix;      // (2N-1) x (2N-1), kd = 1
    int N = 0;
    double h = 0.0;
    double window_lo = 0.0, window_hi = 0.0;

    double rho(int i) const { return double(i + 1) * h; }          // a-node
    double rho_beta(int j) const { return (double(j) + 1.5) * h; } // b-node
};

DiscreteRadialOperator assemble_radial_operator(const RadialCoeffs& coeffs, double r, int N,
                                                double window_lo = 0.0, double window_hi = 0.0);

// One small eigenvalue with its radial eigenfunction samples, jointly
// normalized so that sum (|a|^2 + |b|^2) h = 1.
struct RadialEigenpair {
    ModeIndex mode;
    double lambda = 0.0;
    std::vector<double> alpha, beta;
    double residual_norm = 0.0;
    double beta_l2 = 0.0;
    double grid_spacing = 0.0;
};

// Turning point and gamma of a (k, m) sector. k >= 0, (k,m) != (0,0).
ModeIndex turning_point(const ProfileSet& profiles, long k, long m);

struct SolveOpts {
    int N = 1600;
    WindowPreset preset = WindowPreset::prop53;
    bool check_unique = true;            // Sturm count in the window
    const std::vector<double>* warm_start = nullptr;
    const CkCoeffCache* cache = nullptr; // must match N when given
};

// The unique window eigenpair of the (k,m) sector, or nullopt.
std::optional<RadialEigenpair> solve_mode(const ProfileSet& profiles, const ModeIndex& mode,
                                          double r, const SolveOpts& opts);

struct SweepOpts {
    int N = 1600;
    WindowPreset preset = WindowPreset::prop53;
    double c_margin = 10.0;
    Exec exec;
};

// Enumerate all sectors with |r - gamma| <= bound (gamma-enumeration only).
std::vector<ModeIndex> enumerate_modes_near(const ProfileSet& profiles, double r, double bound,
                                            const Exec& exec = {});

// Solve every admissible sector and merge into a deterministic ledger.
SpectrumLedger mode_sweep(const ProfileSet& profiles, double r, const SweepOpts& opts);

std::string ledger_csv(const SpectrumLedger& ledger);

} // namespace speclab
