#pragma once
#include "speclab/poly.hpp"

#include <string>
#include <vector>

namespace speclab {

// Global constants of the two local models. sigma is pinned to floor(r)/r.
struct GlobalConstants {
    double V = 2.0;
    double delta = 0.005;
    double r = 100.0;

    double sigma() const;
    void validate() const;  // throws ConfigError on violated invariants
};

// C2 bump: 1 on [center-inner, center+inner], 0 outside [center-outer, ...].
struct CutoffFunction {
    double center = 0.0;
    double inner_radius = 0.0;
    double outer_radius = 0.0;

    double operator()(double x) const;
    double d1(double x) const;
};

// Radial profile functions of both models on [0,2]. Pinned zones carry the
// defining formulas exactly; gaps are filled with Hermite patches whose
// contact order is chosen by the builder (monotonicity checked by scan).
struct ProfileSet {
    GlobalConstants constants;
    int contact_order = 0;          // realized contact order of the patches
    double flat_extension = 0.0;    // realized flat-zone extension fraction
    PiecewisePoly f_ck, g_ck;       // open-book model
    PiecewisePoly g_hat, h_hat;     // mapping-torus model

    double f(double rho) const  { return f_ck(rho); }
    double fp(double rho) const { return f_ck.d1(rho); }
    double fpp(double rho) const{ return f_ck.d2(rho); }
    double g(double rho) const  { return g_ck(rho); }
    double gp(double rho) const { return g_ck.d1(rho); }
    double gpp(double rho) const{ return g_ck.d2(rho); }

    double gh(double rho) const  { return g_hat(rho); }
    double ghp(double rho) const { return g_hat.d1(rho); }
    double hh(double rho) const  { return h_hat(rho); }
    double hhp(double rho) const { return h_hat.d1(rho); }
    double hhpp(double rho) const{ return h_hat.d2(rho); }

    // Delta = (f' g - f g')/2, the half-density of the contact volume form.
    double Delta(double rho) const { return 0.5 * (fp(rho) * g(rho) - f(rho) * gp(rho)); }
    double Delta_p(double rho) const { return 0.5 * (fpp(rho) * g(rho) - f(rho) * gpp(rho)); }

    // max over [0,2] of sqrt(f^2+g^2); used by mode enumeration bounds.
    double fg_norm_max = 0.0;
};

// Build and validate. Tries patch contact order 5 down to 2, then quintic
// patches with midpoint subdivision (up to 8 rounds) before giving up.
ProfileSet build_profiles(const GlobalConstants& constants);

// (2 pi)^2 * integral_0^2 (f' g - f g') drho, adaptive Simpson, rel err 1e-10.
double conformal_volume(const ProfileSet& profiles);

// Plain integral_0^2 (f' g - f g') drho (the density in the volume above).
double profile_volume_integral(const ProfileSet& profiles);

// Tabular dump: rho, f, f', g, g', h, h', g_hat, g_hat'.
std::string profile_table(const ProfileSet& profiles, int points);

// Scan report used by build validation and by cmd_profiles.
struct ProfileScan {
    double min_f_interior = 0.0;       // min f on (0,2)
    double min_Delta = 0.0;            // min (f'g - fg')/2 on (0,2)
    double min_fp_binding = 0.0;       // min f' on (0, 1+50d)
    double max_gp_binding = 0.0;       // max g' on (0, 1+50d)
    double min_hhp = 0.0;              // min h' on (0,2)
    bool ok = false;
};
ProfileScan scan_profiles(const ProfileSet& profiles, int points = 10000);

} // namespace speclab
