#pragma once
#include "speclab/ck_model.hpp"
#include "speclab/hat_model.hpp"
#include "speclab/ledger.hpp"
#include "speclab/profiles.hpp"

#include <optional>
#include <string>
#include <vector>

namespace speclab {

// Weighted spectral-asymmetry sums over a ledger. Both truncate the sum at
// |lambda| < sqrt(r)/3 regardless of the ledger search window; the Gaussian
// integrals go through the error function.
double eta_dot(const SpectrumLedger& ledger);
double eta_ddot(const SpectrumLedger& ledger);

// Spectrum-free interval partition. nu_j for |j| < floor(sqrt(r)/2), each
// with |nu_j - j| <= 1/10 and a verified spectrum-free margin in every input
// ledger. Sub-intervals are examined center-out so empty input yields nu_j=j.
struct PartitionPoint {
    long j = 0;
    double nu = 0.0;
    double gap = 0.0;        // realized distance to the nearest eigenvalue
    double margin = 0.0;     // guaranteed cell half-width used by selection
};
std::vector<PartitionPoint> build_partition(const std::vector<const SpectrumLedger*>& ledgers,
                                            double r);

// Per-interval index-set counts of Definition-style filtered sectors:
// ck entries with lambda in (nu_j, nu_{j+1}) and k < m V; hat count
// sum over k in the interval of floor(r) - floor(k/V).
struct IndexCounts {
    long j = 0;
    long ck_count = 0;
    long hat_count = 0;
};
std::vector<IndexCounts> index_sets(const SpectrumLedger& ck_ledger,
                                    const SpectrumLedger& hat_ledger,
                                    const std::vector<PartitionPoint>& partition,
                                    double V, double r);

// Vafa-Witten uniform-distribution check on the (multiplicity-expanded) hat
// ladder: the realized step, exact deviations, and the Lemma-style
// multiplicity ladders.
struct VWReport {
    long fj_realized = 0;                 // eigenvalues per 1/V step
    double max_abs_deviation = 0.0;
    std::vector<std::pair<long, double>> deviations;   // (j, lambda_{j+fj}-lambda_j-1/V)
    std::vector<long> ladder_plus, ladder_minus;       // n_j^+/-, measured
    bool ladder_matches_formula = false;
    double step = 0.0;                    // 1/V
};
VWReport vafa_witten_check(const SpectrumLedger& hat_ledger, const GlobalConstants& constants);

// Spectral flow of the ck family from 0 to R: per-mode zero-crossing count
// with grid tracking plus bisection refinement in r. Modes whose crossing
// lies below r_min (where the radial solver is out of its validity range)
// are classified by the turning-point rule and reported separately.
struct CrossingRecord {
    ModeIndex mode;
    double r_cross = 0.0;     // refined crossing location (NaN if pre-sweep)
    int direction = +1;       // +1 upward, -1 downward
    bool tracked = false;     // true if found by eigenvalue tracking
};
struct SpectralFlowResult {
    long flow = 0;
    double predicted = 0.0;           // R^2/(32 pi^2) * conformal volume
    long gamma_count = 0;             // lattice count gamma <= R (oracle)
    long straddle_count = 0;          // |gamma - R| <= straddle_band
    long pre_sweep = 0;               // crossings below r_min (not tracked)
    long negative_crossings = 0;
    std::vector<CrossingRecord> crossings;
};
struct SpectralFlowOpts {
    double r_min = 20.0;
    double grid_step = 1.0;
    int N = 600;
    double straddle_band = 3.0;
    double refine_dr = 0.05;
    Exec exec;
    bool keep_records = false;
};
SpectralFlowResult spectral_flow(const ProfileSet& profiles, double R,
                                 const SpectralFlowOpts& opts);

// Consolidated per-r report emitted by the CLI.
struct EtaFlowReport {
    double r = 0.0;
    double eta_dot_ck = 0.0, eta_ddot_ck = 0.0;
    double eta_dot_hat = 0.0, eta_ddot_hat = 0.0;
    std::optional<long> flow;
    std::optional<double> predicted_flow;
    std::optional<double> flow_residual;
    double vw_max_dev = 0.0;
    long vw_fj = 0;
    std::vector<PartitionPoint> partition;
    std::vector<IndexCounts> index_counts;
};

// Filter a ck sweep ledger to the k < m V sector set used by the eta sums.
SpectrumLedger filter_ck_vr(const SpectrumLedger& ledger, double V);

} // namespace speclab
