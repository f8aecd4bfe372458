#pragma once
#include "speclab/ck_model.hpp"
#include "speclab/profiles.hpp"

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <vector>

namespace speclab {

// Taylor data of the four radial coefficient functions about the turning
// point: -(kg-mf)/D = gamma x - sum fr_j x^j, (kg'-mf')/(2D) = -gamma/2
// - sum frp_j x^j, D'/(2D) = sum fe_j x^j, 1+(f''g'-f'g'')/(8D) = sum fep_j x^j.
struct TaylorCoefficients {
    double expansion_center = 0.0;
    double gamma = 0.0;
    std::array<double, 8> fr{};     // indices 2..7 meaningful
    std::array<double, 8> frp{};
    std::array<double, 6> fe{};     // indices 0..5
    std::array<double, 6> fep{};
    double rem_r0 = 0.0, rem_r1 = 0.0, rem_e0 = 0.0, rem_e1 = 0.0;
    double validity_radius = 0.0;   // distance to the profile piece boundary
    double linear_term_check = 0.0; // |x^1 coefficient of (kg'-mf')/2D|
};

// Exact extraction through local power-series arithmetic on the profile
// pieces (the finite-difference route is kept as a low-order oracle below).
TaylorCoefficients taylor_extract(const ProfileSet& profiles, const ModeIndex& mode,
                                  int degree_cap = 7);

// Central finite difference with one Richardson step, orders 1..4.
double fd_derivative(const std::function<double(double)>& f, double x0, int order, double h);

// Perturbative eigensection in the Gaussian gauge: a(x) = (1 + sum a_j) xi,
// b(x) = (sum b_j) xi, mu = (r - gamma)/2 + sum mu_j.
struct PerturbativeSolution {
    std::vector<std::vector<double>> a_polys;   // j = 0..order
    std::vector<std::vector<double>> b_polys;
    std::vector<double> mu_terms;               // mu_1..mu_order
    std::vector<double> lminus_defects;         // solvability consistency per j
    double gamma = 0.0;
    double r = 0.0;
    double mu0 = 0.0;
    double center = 0.0;
    int order = 0;

    double mu_total() const;
    double mu_partial(int J) const;             // mu0 + mu_1..mu_J
    std::vector<double> a_sum() const;          // 1 + sum_j a_j
    std::vector<double> b_sum() const;
};

PerturbativeSolution recursive_solution(const TaylorCoefficients& coeffs, double gamma,
                                        double r, int order);

// Gaussian moment integral x^i exp(-gamma x^2) dx over R.
double gaussian_moment(int i, double gamma);

// Sampled approximate eigensection on a uniform grid.
struct ApproxSection {
    std::vector<double> alpha, beta;
    double mu = 0.0;
    double norm_deficit = 0.0;      // |1 - sum (a^2+b^2) h|
};
ApproxSection approximate_eigensection(const PerturbativeSolution& sol,
                                       const CutoffFunction& cutoff,
                                       const std::vector<double>& grid);

// Squared L2 residual of the cut-off perturbative section against the radial
// system with the true profile coefficients; all derivatives analytic.
double approx_residual_sq(const ProfileSet& profiles, const ModeIndex& mode,
                          const PerturbativeSolution& sol, const CutoffFunction& cutoff,
                          int N);

// Cutoff sized to the mode: plateau covering the Gaussian bulk, roll-off
// finished before the profile patch boundary nearest the turning point.
CutoffFunction mode_cutoff(const ProfileSet& profiles, const ModeIndex& mode);

// Interior non-flat sectors whose perturbative ladder has entered its
// asymptotic regime at base radius r0: |mu_1| <= 2 and smallest |mu_3/mu_1|.
// Deterministic order (sanity, then k, then m).
std::vector<ModeIndex> select_perturbative_modes(const ProfileSet& profiles, double r0,
                                                 int count);

// Approximate-eigenvalue certificate. Verifies the four hypotheses
// (normalization, residuals, cross terms, eps relations), then matches each
// mu against a true eigenvalue within 4 sqrt(eps1).
std::vector<double> certify_eigenvalues(const Eigen::MatrixXd& op,
                                        const std::vector<std::pair<Eigen::VectorXd, double>>& pairs,
                                        double eps1, double eps2);

} // namespace speclab
