#pragma once
#include "speclab/ck_model.hpp"
#include "speclab/ledger.hpp"
#include "speclab/profiles.hpp"

#include <vector>

namespace speclab {

// Which multiplicity the hat ledger carries: the full kernel dimension
// 2 floor(r) + 1 per k, or the n-filtered count floor(r) - floor(k/V) used by
// the eta-function ladder.
enum class HatMultiplicity { full_kernel, vr_filtered };

// Exact hat spectrum { r/2 - k/V } inside [-window, window].
SpectrumLedger hat_spectrum(const GlobalConstants& constants, double window,
                            HatMultiplicity mult = HatMultiplicity::full_kernel);

// Unique solution of r (h + g/2) - (k/V) g + n = 0; pinned 0 / 2 at the
// endpoint indices n = 0 and n = -2 floor(r).
double hat_turning_point(const ProfileSet& profiles, const GlobalConstants& constants,
                         long k, long n);

// One kernel element of the reduced Cauchy-Riemann operator, normalized so
// that integral |a|^2 h' drho = 1 (trapezoid on the same grid).
struct HatKernelElement {
    long k = 0;
    long n = 0;
    double rho_turn = 0.0;
    std::vector<double> samples;     // a(rho_i) on rho_i = (i+1) h
    double norm_constant = 0.0;      // value at the turning point
    double grid_spacing = 0.0;
    double gaussian_dist = -1.0;     // sup distance to the Gaussian, flat modes only
};

HatKernelElement kernel_element(const ProfileSet& profiles, const GlobalConstants& constants,
                                long k, long n, int N);

// Builds all 2 floor(r)+1 kernel elements for the given k, checks the Gram
// matrix against the identity, returns the count.
// Off-diagonal Gram entries vanish exactly (distinct t-frequencies); the
// diagonal is re-measured with Simpson against the trapezoid normalizer,
// so the tolerance is the quadrature-difference scale.
long verify_kernel_dimension(const ProfileSet& profiles, const GlobalConstants& constants,
                             long k, int N, double gram_tol = 2e-3);

// Coefficients of the coupled (a, b) radial system at theta-frequency k and
// kernel index n, flattened to the drho measure.
RadialCoeffs hat_coeffs(const ProfileSet& profiles, const GlobalConstants& constants,
                        long k, long n);

// Discretized coupled system cross-check: eigenvalue nearest r/2 - k/V and
// the beta-component norm, plus L2 distance of the alpha part to the
// integral-factor kernel element.
struct HatDiscreteCheck {
    RadialEigenpair pair;
    double eigenvalue_error = 0.0;   // |lambda - (r/2 - k/V)|
    double alpha_l2_dist = 0.0;      // vs kernel_element, after sign alignment
};
HatDiscreteCheck hat_discrete_check(const ProfileSet& profiles, const GlobalConstants& constants,
                                    long k, long n, int N);

std::string hat_csv(const std::vector<HatKernelElement>& elements,
                    const GlobalConstants& constants, double window);

} // namespace speclab
