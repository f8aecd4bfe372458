#include "speclab/perturbation.hpp"
#include "speclab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

namespace {

std::vector<double> local_series(const PiecewisePoly& p, double center, int len) {
    return p.piece(center).taylor(center, len);
}

double series_eval_trunc(const std::vector<double>& s, int jmax, double x) {
    double acc = 0.0;
    for (int i = std::min<int>(jmax, int(s.size()) - 1); i >= 0; --i) acc = acc * x + s[size_t(i)];
    return acc;
}

} // namespace

TaylorCoefficients taylor_extract(const ProfileSet& ps, const ModeIndex& mode, int degree_cap) {
    const double d20 = 20.0 * ps.constants.delta;
    const double rho0 = mode.rho_turn;
    if (!(rho0 > d20 && rho0 < 2.0 - d20))
        throw ZoneViolation("taylor_extract: turning point outside (20d, 2-20d)");
    const int len = std::max(degree_cap, 7) + 2;
    const double kk = double(mode.k), mm = double(mode.m);

    const auto f = local_series(ps.f_ck, rho0, len);
    const auto g = local_series(ps.g_ck, rho0, len);
    const auto fp = series_deriv(f);
    const auto gp = series_deriv(g);
    const auto fpp = series_deriv(fp);
    const auto gpp = series_deriv(gp);

    // D = (f' g - f g')/2 and its derivative
    std::vector<double> D(size_t(len), 0.0);
    {
        const auto t1 = series_mul(fp, g, len);
        const auto t2 = series_mul(f, gp, len);
        for (int i = 0; i < len; ++i) D[size_t(i)] = 0.5 * (t1[size_t(i)] - t2[size_t(i)]);
    }
    if (D[0] <= 0.0) throw SingularCoefficient("taylor_extract: D <= 0 at the turning point");
    const auto Dp = series_deriv(D);

    std::vector<double> kg_mf(size_t(len), 0.0), kgp_mfp(size_t(len), 0.0);
    for (int i = 0; i < len; ++i) {
        kg_mf[size_t(i)] = kk * g[size_t(i)] - mm * f[size_t(i)];
        kgp_mfp[size_t(i)] = kk * gp[size_t(i)] - mm * fp[size_t(i)];
    }

    auto T1 = series_div(kg_mf, D, len);             // = -(gamma x - sum fr x^j)
    for (auto& v : T1) v = -v;                       // now gamma x - sum fr_j x^j
    auto T2 = series_div(kgp_mfp, D, len);
    for (auto& v : T2) v *= 0.5;                     // = -gamma/2 - sum frp_j x^j
    auto T3 = series_div(Dp, D, len);
    for (auto& v : T3) v *= 0.5;
    std::vector<double> num4(size_t(len), 0.0);
    {
        const auto t1 = series_mul(fpp, gp, len);
        const auto t2 = series_mul(fp, gpp, len);
        for (int i = 0; i < len; ++i) num4[size_t(i)] = t1[size_t(i)] - t2[size_t(i)];
    }
    auto T4 = series_div(num4, D, len);
    for (auto& v : T4) v *= 0.125;
    T4[0] += 1.0;

    TaylorCoefficients tc;
    tc.expansion_center = rho0;
    tc.gamma = T1[1];
    const double scale = std::max(1.0, std::fabs(mode.gamma));
    if (std::fabs(T1[0]) > 1e-8 * scale)
        throw SingularCoefficient("taylor_extract: nonzero constant term of -(kg-mf)/D");
    if (std::fabs(T1[1] - mode.gamma) > 1e-7 * scale)
        throw SingularCoefficient("taylor_extract: x-coefficient disagrees with gamma");
    if (std::fabs(T2[0] + 0.5 * mode.gamma) > 1e-7 * scale)
        throw SingularCoefficient("taylor_extract: constant term of (kg'-mf')/2D is not -gamma/2");
    tc.linear_term_check = std::fabs(T2[1]);

    for (int j = 2; j <= 7; ++j) {
        tc.fr[size_t(j)] = -T1[size_t(j)];
        tc.frp[size_t(j)] = -T2[size_t(j)];
    }
    for (int j = 0; j <= 5; ++j) {
        tc.fe[size_t(j)] = T3[size_t(j)];
        tc.fep[size_t(j)] = T4[size_t(j)];
    }

    // measured remainder sup over |x| <= 4 delta, clipped to the local piece
    tc.validity_radius = ps.f_ck.distance_to_break(rho0);
    const double xr = std::min(4.0 * ps.constants.delta, 0.9 * tc.validity_radius);
    auto T1_true = [&](double x) {
        const double rho = rho0 + x;
        return -(kk * ps.g(rho) - mm * ps.f(rho)) / ps.Delta(rho);
    };
    auto T2_true = [&](double x) {
        const double rho = rho0 + x;
        return (kk * ps.gp(rho) - mm * ps.fp(rho)) / (2.0 * ps.Delta(rho));
    };
    auto T3_true = [&](double x) {
        const double rho = rho0 + x;
        return ps.Delta_p(rho) / (2.0 * ps.Delta(rho));
    };
    auto T4_true = [&](double x) {
        const double rho = rho0 + x;
        return 1.0 + (ps.fpp(rho) * ps.gp(rho) - ps.fp(rho) * ps.gpp(rho)) / (8.0 * ps.Delta(rho));
    };
    for (int s = 1; s <= 16; ++s) {
        const double x = xr * double(s) / 16.0;
        for (double xx : {x, -x}) {
            const double p8 = std::pow(xx, 8.0), p6 = std::pow(xx, 6.0);
            tc.rem_r0 = std::max(tc.rem_r0, std::fabs(T1_true(xx) - series_eval_trunc(T1, 7, xx)) / std::fabs(p8));
            tc.rem_r1 = std::max(tc.rem_r1, std::fabs(T2_true(xx) - series_eval_trunc(T2, 7, xx)) / std::fabs(p8));
            tc.rem_e0 = std::max(tc.rem_e0, std::fabs(T3_true(xx) - series_eval_trunc(T3, 5, xx)) / std::fabs(p6));
            tc.rem_e1 = std::max(tc.rem_e1, std::fabs(T4_true(xx) - series_eval_trunc(T4, 5, xx)) / std::fabs(p6));
        }
    }
    return tc;
}

double fd_derivative(const std::function<double(double)>& f, double x0, int order, double h) {
    auto stencil = [&](double hh) -> double {
        switch (order) {
            case 1: return (f(x0 + hh) - f(x0 - hh)) / (2.0 * hh);
            case 2: return (f(x0 + hh) - 2.0 * f(x0) + f(x0 - hh)) / (hh * hh);
            case 3: return (f(x0 + 2 * hh) - 2.0 * f(x0 + hh) + 2.0 * f(x0 - hh) - f(x0 - 2 * hh)) /
                           (2.0 * hh * hh * hh);
            case 4: return (f(x0 + 2 * hh) - 4.0 * f(x0 + hh) + 6.0 * f(x0) - 4.0 * f(x0 - hh) +
                            f(x0 - 2 * hh)) / (hh * hh * hh * hh);
            default: throw SpeclabError("fd_derivative: order must be 1..4");
        }
    };
    const double d1 = stencil(h), d2 = stencil(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;    // Richardson for the h^2 leading error
}

double gaussian_moment(int i, double gamma) {
    if (i % 2 == 1) return 0.0;
    double v = std::sqrt(M_PI / gamma);
    for (int s = 1; 2 * s <= i; ++s) v *= double(2 * s - 1) / (2.0 * gamma);
    return v;
}

namespace {

double weighted_moment(const std::vector<double>& p, double gamma) {
    double s = 0.0;
    for (size_t i = 0; i < p.size(); ++i) s += p[i] * gaussian_moment(int(i), gamma);
    return s;
}

// solve -b' + 2 gamma x b = R for polynomial b (R must be Gaussian-orthogonal)
std::vector<double> solve_lminus(const std::vector<double>& R, double gamma, double* defect) {
    int DR = int(R.size()) - 1;
    while (DR >= 0 && R[size_t(DR)] == 0.0) --DR;
    if (DR <= 0) {            // constant RHS: orthogonality forces it to ~0
        if (defect) *defect = (DR == 0) ? std::fabs(R[0]) : 0.0;
        return {};
    }
    std::vector<double> b(size_t(DR), 0.0);        // degree DR-1
    b[size_t(DR - 1)] = R[size_t(DR)] / (2.0 * gamma);
    for (int i = DR - 1; i >= 1; --i) {
        const double bip1 = (i + 1 < DR) ? b[size_t(i + 1)] : 0.0;
        b[size_t(i - 1)] = (R[size_t(i)] + double(i + 1) * bip1) / (2.0 * gamma);
    }
    // x^0 row: -b_1 = R_0 is the solvability consistency
    const double b1 = (DR >= 2) ? b[1] : 0.0;
    if (defect) *defect = std::fabs(b1 + R[0]);
    return b;
}

} // namespace

double PerturbativeSolution::mu_total() const { return mu_partial(order); }

double PerturbativeSolution::mu_partial(int J) const {
    double s = mu0;
    for (int j = 1; j <= J && j <= int(mu_terms.size()); ++j) s += mu_terms[size_t(j - 1)];
    return s;
}

std::vector<double> PerturbativeSolution::a_sum() const {
    std::vector<double> s = {0.0};      // a_polys[0] already carries the 1
    for (const auto& p : a_polys) poly_axpy(s, 1.0, p);
    return s;
}

std::vector<double> PerturbativeSolution::b_sum() const {
    std::vector<double> s = {0.0};
    for (const auto& p : b_polys) poly_axpy(s, 1.0, p);
    return s;
}

PerturbativeSolution recursive_solution(const TaylorCoefficients& tc, double gamma,
                                        double r, int order) {
    if (!(gamma > 0.0)) throw SpeclabError("recursive_solution: gamma must be positive");
    if (order < 1 || order > 6) throw SpeclabError("recursive_solution: order must be 1..6");
    PerturbativeSolution sol;
    sol.gamma = gamma;
    sol.r = r;
    sol.mu0 = 0.5 * (r - gamma);
    sol.center = tc.expansion_center;
    sol.order = order;
    sol.a_polys.assign(size_t(order) + 1, {});
    sol.b_polys.assign(size_t(order) + 1, {});
    sol.a_polys[0] = {1.0};      // a_0 = 1, b_0 = 0

    auto monomial = [](double c, int p) {
        std::vector<double> v(size_t(p) + 1, 0.0);
        v[size_t(p)] = c;
        return v;
    };
    // order-i multiplier in front of b in the first equation / a in the second
    auto mult_fe_fr = [&](int i) {
        std::vector<double> p = monomial(tc.fe[size_t(i - 1)] * (i - 1 <= 5 ? 1.0 : 0.0), i - 1);
        if (i + 1 <= 7) poly_axpy(p, tc.fr[size_t(i + 1)], monomial(1.0, i + 1));
        return p;
    };

    for (int j = 1; j <= order; ++j) {
        // first equation: -b_j' + 2 gamma x b_j = R3 + mu_j
        std::vector<double> R3 = {0.0};
        for (int i = 1; i <= j - 1; ++i) {
            if (!sol.b_polys[size_t(j - i)].empty())
                poly_axpy(R3, 1.0, poly_mul(mult_fe_fr(i), sol.b_polys[size_t(j - i)]));
            std::vector<double> am = monomial(sol.mu_terms[size_t(i - 1)], 0);
            if (i + 1 <= 7) poly_axpy(am, tc.frp[size_t(i + 1)], monomial(1.0, i + 1));
            poly_axpy(R3, 1.0, poly_mul(am, sol.a_polys[size_t(j - i)]));
        }
        if (j + 1 <= 7) poly_axpy(R3, 1.0, poly_mul(monomial(tc.frp[size_t(j + 1)], j + 1),
                                                    sol.a_polys[0]));
        const double mu_j = -weighted_moment(R3, gamma) / gaussian_moment(0, gamma);
        sol.mu_terms.push_back(mu_j);
        R3[0] += mu_j;
        double defect = 0.0;
        sol.b_polys[size_t(j)] = solve_lminus(R3, gamma, &defect);
        sol.lminus_defects.push_back(defect);

        // second equation: a_j' = R4, a_j(0) = 0
        std::vector<double> R4 = {0.0};
        for (int i = 1; i <= j; ++i)
            poly_axpy(R4, 1.0, poly_mul(mult_fe_fr(i), sol.a_polys[size_t(j - i)]));
        for (int i = 1; i <= j - 1; ++i) {
            if (sol.b_polys[size_t(j - i)].empty()) continue;
            std::vector<double> bm = monomial(sol.mu_terms[size_t(i - 1)], 0);
            if (i == 1) bm[0] += 2.0 * sol.mu0;     // the (r - gamma) beta term
            poly_axpy(bm, tc.fep[size_t(i - 1)], monomial(1.0, i - 1));
            if (i + 1 <= 7) poly_axpy(bm, -tc.frp[size_t(i + 1)], monomial(1.0, i + 1));
            poly_axpy(R4, 1.0, poly_mul(bm, sol.b_polys[size_t(j - i)]));
        }
        sol.a_polys[size_t(j)] = poly_integrate(R4);
    }
    return sol;
}

ApproxSection approximate_eigensection(const PerturbativeSolution& sol,
                                       const CutoffFunction& cutoff,
                                       const std::vector<double>& grid) {
    ApproxSection out;
    out.mu = sol.mu_total();
    const double gam = sol.gamma;
    const double xi0 = std::pow(gam / M_PI, 0.25);
    const auto A = sol.a_sum();
    const auto B = sol.b_sum();
    out.alpha.resize(grid.size());
    out.beta.resize(grid.size());
    double nrm = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i] - sol.center;
        const double xi = xi0 * std::exp(-0.5 * gam * x * x);
        const double chi = cutoff(grid[i]);
        out.alpha[i] = chi * poly_eval(A, x) * xi;
        out.beta[i] = chi * poly_eval(B, x) * xi;
        nrm += out.alpha[i] * out.alpha[i] + out.beta[i] * out.beta[i];
    }
    const double h = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
    out.norm_deficit = std::fabs(1.0 - nrm * h);
    return out;
}

CutoffFunction mode_cutoff(const ProfileSet& ps, const ModeIndex& mode) {
    // Roll off around three Gaussian widths, but never past the profile
    // piece that carries the Taylor data.
    CutoffFunction c;
    c.center = mode.rho_turn;
    const double dpatch = ps.f_ck.distance_to_break(mode.rho_turn);
    const double width = 1.0 / std::sqrt(std::max(mode.gamma, 1.0));
    c.outer_radius = std::max(std::min(0.95 * dpatch, 3.0 * width), 2.0 * ps.constants.delta);
    c.inner_radius = c.outer_radius - std::min(width, 0.4 * c.outer_radius);
    return c;
}

double approx_residual_sq(const ProfileSet& ps, const ModeIndex& mode,
                          const PerturbativeSolution& sol, const CutoffFunction& cutoff,
                          int N) {
    const double r = sol.r;
    const double mu = sol.mu_total();
    const double gam = sol.gamma;
    const double xi0 = std::pow(gam / M_PI, 0.25);
    const auto A = sol.a_sum();
    const auto B = sol.b_sum();
    const auto Ap = poly_derivative(A);
    const auto Bp = poly_derivative(B);
    const double kk = double(mode.k), mm = double(mode.m);
    const double h = 2.0 / double(N + 1);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
        const double rho = double(i + 1) * h;
        const double x = rho - sol.center;
        const double chi = cutoff(rho);
        const double dchi = cutoff.d1(rho);
        if (chi == 0.0 && dchi == 0.0) continue;
        const double xi = xi0 * std::exp(-0.5 * gam * x * x);
        const double pa = poly_eval(A, x), pb = poly_eval(B, x);
        const double alpha = chi * pa * xi;
        const double beta = chi * pb * xi;
        const double dalpha = (dchi * pa + chi * (poly_eval(Ap, x) - gam * x * pa)) * xi;
        const double dbeta = (dchi * pb + chi * (poly_eval(Bp, x) - gam * x * pb)) * xi;
        const double D = ps.Delta(rho);
        const double Acf = (kk * ps.g(rho) - mm * ps.f(rho)) / D + ps.Delta_p(rho) / (2.0 * D);
        const double Bcf = (kk * ps.gp(rho) - mm * ps.fp(rho)) / (2.0 * D);
        const double Ecf = 1.0 + (ps.fpp(rho) * ps.gp(rho) - ps.fp(rho) * ps.gpp(rho)) / (8.0 * D);
        const double r1 = (0.5 * r + Bcf) * alpha - dbeta - Acf * beta - mu * alpha;
        const double r2 = dalpha - Acf * alpha - (0.5 * r + Bcf + Ecf) * beta - mu * beta;
        acc += (r1 * r1 + r2 * r2) * h;
    }
    return acc;
}

std::vector<ModeIndex> select_perturbative_modes(const ProfileSet& ps, double r0, int count) {
    std::vector<ModeIndex> all = enumerate_modes_near(ps, r0, 2.0, Exec{});
    const double d40 = 40.0 * ps.constants.delta;
    struct Cand {
        ModeIndex mo;
        double sanity;
    };
    std::vector<Cand> cands;
    for (const auto& mo : all) {
        if (mo.k <= 0 || mo.pole_adjacent) continue;
        if (std::fabs(mo.rho_turn - 1.0) <= d40) continue;       // non-flat only
        if (ps.f_ck.piece(mo.rho_turn).degree() <= 2) continue;  // transition patches
        if (ps.f_ck.distance_to_break(mo.rho_turn) < 0.05) continue;
        try {
            TaylorCoefficients tc = taylor_extract(ps, mo);
            PerturbativeSolution sol = recursive_solution(tc, mo.gamma, r0, 6);
            const double mu1 = sol.mu_terms[0];
            if (std::fabs(mu1) > 2.0) continue;
            cands.push_back({mo, std::fabs(sol.mu_terms[2]) / std::max(1e-12, std::fabs(mu1))});
        } catch (const SpeclabError&) {
            continue;
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.sanity != b.sanity) return a.sanity < b.sanity;
        if (a.mo.k != b.mo.k) return a.mo.k < b.mo.k;
        return a.mo.m < b.mo.m;
    });
    std::vector<ModeIndex> out;
    for (const auto& c : cands) {
        out.push_back(c.mo);
        if (int(out.size()) >= count) break;
    }
    return out;
}

std::vector<double> certify_eigenvalues(const Eigen::MatrixXd& op,
                                        const std::vector<std::pair<Eigen::VectorXd, double>>& pairs,
                                        double eps1, double eps2) {
    const int L = int(pairs.size());
    if (L == 0) return {};
    if (!(eps2 > 0.0 && eps2 < 0.25))
        throw HypothesisViolation("hypothesis (i): eps2 must lie in (0, 1/4)");
    double mu_min = pairs[0].second, mu_max = pairs[0].second;
    for (const auto& p : pairs) {
        mu_min = std::min(mu_min, p.second);
        mu_max = std::max(mu_max, p.second);
    }
    const double span = mu_max - mu_min;
    if (eps2 * span * span > eps1 * (1.0 + 1e-12))
        throw HypothesisViolation("hypothesis (i): eps2 * span^2 exceeds eps1");

    // hypothesis (ii): normalization and inner-product row sums
    for (int l = 0; l < L; ++l) {
        const double nn = pairs[size_t(l)].first.squaredNorm();
        if (std::fabs(1.0 - nn) > eps2 * (1.0 + 1e-12))
            throw HypothesisViolation("hypothesis (ii): |1-||xi_" + std::to_string(l) +
                                      "||^2| exceeds eps2");
        double row = 0.0;
        for (int l2 = 0; l2 < L; ++l2)
            if (l2 != l) row += std::fabs(pairs[size_t(l2)].first.dot(pairs[size_t(l)].first));
        if (row > eps2 * (1.0 + 1e-12))
            throw HypothesisViolation("hypothesis (ii): inner-product row sum at xi_" +
                                      std::to_string(l) + " exceeds eps2");
    }

    // residual vectors
    std::vector<Eigen::VectorXd> res(static_cast<size_t>(L));
    std::vector<Eigen::VectorXd> Dx(static_cast<size_t>(L));
    for (int l = 0; l < L; ++l) {
        Dx[size_t(l)] = op * pairs[size_t(l)].first;
        res[size_t(l)] = Dx[size_t(l)] - pairs[size_t(l)].second * pairs[size_t(l)].first;
        if (res[size_t(l)].squaredNorm() > eps1 * (1.0 + 1e-12))
            throw HypothesisViolation("hypothesis (iii): residual of xi_" + std::to_string(l) +
                                      " exceeds eps1");
    }

    // hypothesis (iv): cross terms for every mu in [mu_min, mu_max]; each
    // pair contributes |q(mu)| with q quadratic, maximized exactly, summed
    // (a sufficient bound for the row-sum condition)
    for (int l = 0; l < L; ++l) {
        double row = 0.0;
        for (int l2 = 0; l2 < L; ++l2) {
            if (l2 == l) continue;
            const double c2 = pairs[size_t(l2)].first.dot(pairs[size_t(l)].first);
            const double c1 = -(Dx[size_t(l2)].dot(pairs[size_t(l)].first) +
                                pairs[size_t(l2)].first.dot(Dx[size_t(l)]));
            const double c0 = Dx[size_t(l2)].dot(Dx[size_t(l)]);
            auto q = [&](double mu) { return std::fabs(c0 + c1 * mu + c2 * mu * mu); };
            double mx = std::max(q(mu_min), q(mu_max));
            if (c2 != 0.0) {
                const double vertex = -c1 / (2.0 * c2);
                if (vertex > mu_min && vertex < mu_max) mx = std::max(mx, q(vertex));
            }
            row += mx;
        }
        if (row > eps1 * (1.0 + 1e-12))
            throw HypothesisViolation("hypothesis (iv): cross-residual row sum at xi_" +
                                      std::to_string(l) + " exceeds eps1");
    }

    // exact eigendecomposition and sorted greedy interval matching
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double tol = 4.0 * std::sqrt(eps1);

    std::vector<int> order(static_cast<size_t>(L), 0);
    for (int l = 0; l < L; ++l) order[size_t(l)] = l;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return pairs[size_t(a)].second < pairs[size_t(b)].second; });

    std::vector<double> matched(static_cast<size_t>(L), 0.0);
    int next = 0;
    for (int oi = 0; oi < L; ++oi) {
        const double mu = pairs[size_t(order[size_t(oi)])].second;
        while (next < ev.size() && ev(next) < mu - tol) ++next;
        if (next >= ev.size() || ev(next) > mu + tol)
            throw CertificationFailure("certify_eigenvalues: no eigenvalue within 4 sqrt(eps1) "
                                       "of mu=" + std::to_string(mu));
        matched[size_t(order[size_t(oi)])] = ev(next);
        ++next;
    }
    return matched;
}

} // namespace speclab
