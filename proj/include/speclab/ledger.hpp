#pragma once
#include <string>
#include <vector>

namespace speclab {

enum class ModelTag { ck, hat };

// Fourier sector label with its turning point data. `m` is the t-frequency
// for the ck model and the kernel index n for the hat model.
struct ModeIndex {
    ModelTag model_tag = ModelTag::ck;
    long k = 0;
    long m = 0;
    double rho_turn = 0.0;
    double gamma = 0.0;          // unset (0) for hat modes
    bool pole_adjacent = false;  // rho_turn within 20*delta of a pole
};

// One eigenvalue with provenance. flag: "ok", "pole" (turning point near a
// pole), "offbranch" (far from the (r-gamma)/2 prediction), "multi" (sector
// carried several window eigenvalues).
struct LedgerEntry {
    double lambda = 0.0;
    long multiplicity = 1;
    ModeIndex mode;
    double residual = 0.0;
    double beta_l2 = 0.0;
    std::string flag = "ok";
};

// Sorted multiset of eigenvalues in a symmetric window.
struct SpectrumLedger {
    std::vector<LedgerEntry> entries;   // ascending lambda, ties by (k,m)
    double window_lo = 0.0;
    double window_hi = 0.0;
    double r = 0.0;

    void sort_entries();
    long total_count() const;           // multiplicity-weighted
    SpectrumLedger negated() const;     // lambda -> -lambda (antisymmetry tests)
    // All eigenvalue positions (ignoring multiplicity), ascending.
    std::vector<double> positions() const;
};

// Eigenvalue search window presets. prop53 is sqrt(r/3); eta is sqrt(r)/3.
enum class WindowPreset { prop53, eta };
double window_radius(WindowPreset preset, double r);
WindowPreset window_preset_from_string(const std::string& s);
std::string to_string(WindowPreset preset);

} // namespace speclab
