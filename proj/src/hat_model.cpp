#include "speclab/hat_model.hpp"
#include "speclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace speclab {

namespace {

double W_of(const ProfileSet& ps, const GlobalConstants& gc, long k, long n, double rho) {
    return double(n) + gc.r * (ps.hh(rho) + 0.5 * ps.gh(rho)) - double(k) / gc.V * ps.gh(rho);
}

void check_positivity(const ProfileSet& ps, const GlobalConstants& gc, long k) {
    const double mu = gc.r / 2.0 - double(k) / gc.V;
    for (int i = 1; i < 2000; ++i) {
        const double rho = 2.0 * double(i) / 2000.0;
        if (gc.r * ps.hhp(rho) + mu * ps.ghp(rho) <= 0.0)
            throw PositivityViolation("hat model: r h' + (r/2 - k/V) g' <= 0 at rho=" +
                                      std::to_string(rho));
    }
}

} // namespace

SpectrumLedger hat_spectrum(const GlobalConstants& gc, double window, HatMultiplicity mult) {
    const long rfloor = long(std::floor(gc.r));
    SpectrumLedger ledger;
    ledger.window_lo = -window;
    ledger.window_hi = window;
    ledger.r = gc.r;
    if (window <= 0.0) return ledger;
    const long k_lo = long(std::ceil(gc.V * (gc.r / 2.0 - window) - 1e-9));
    const long k_hi = long(std::floor(gc.V * (gc.r / 2.0 + window) + 1e-9));
    for (long k = k_lo; k <= k_hi; ++k) {
        const double lambda = gc.r / 2.0 - double(k) / gc.V;
        if (lambda < -window || lambda > window) continue;
        LedgerEntry e;
        e.lambda = lambda;
        e.multiplicity = (mult == HatMultiplicity::full_kernel)
                             ? 2 * rfloor + 1
                             : rfloor - long(std::floor(double(k) / gc.V));
        e.mode.model_tag = ModelTag::hat;
        e.mode.k = k;
        e.mode.m = 0;
        ledger.entries.push_back(e);
    }
    ledger.sort_entries();
    return ledger;
}

double hat_turning_point(const ProfileSet& ps, const GlobalConstants& gc, long k, long n) {
    const long n_min = -2 * long(std::floor(gc.r));
    if (n > 0 || n < n_min)
        throw DegenerateMode("hat_turning_point: n out of [-2 floor(r), 0]");
    if (n == 0) return 0.0;
    if (n == n_min) return 2.0;
    check_positivity(ps, gc, k);
    auto G = [&](double rho) { return W_of(ps, gc, k, n, rho); };
    double lo = 0.0, hi = 2.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (G(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

HatKernelElement kernel_element(const ProfileSet& ps, const GlobalConstants& gc,
                                long k, long n, int N) {
    HatKernelElement el;
    el.k = k;
    el.n = n;
    el.rho_turn = hat_turning_point(ps, gc, k, n);
    el.grid_spacing = 2.0 / double(N + 1);
    const double h = el.grid_spacing;

    // F = W / h'; clamped where h' collapses (pole cells contribute nothing).
    auto F = [&](double rho) {
        const double hp = ps.hhp(rho);
        return W_of(ps, gc, k, n, rho) / std::max(hp, 1e-12);
    };

    // log a(rho_i) by cumulative trapezoid outward from the turning point
    std::vector<double> logm(static_cast<size_t>(N), 0.0);
    const double rt = el.rho_turn;
    int j0 = int(std::floor(rt / h - 1.0));          // last index with rho_i <= rt
    if (j0 >= N) j0 = N - 1;
    const double Frt = (rt > 0.0 && rt < 2.0) ? F(rt) : 0.0;
    // upward: rho > rt
    double acc = 0.0;
    double prev_rho = rt, prev_F = Frt;
    for (int i = j0 + 1; i < N; ++i) {
        const double rho = double(i + 1) * h;
        const double Fi = F(rho);
        acc += 0.5 * (prev_F + Fi) * (rho - prev_rho);
        logm[size_t(i)] = -acc;
        prev_rho = rho;
        prev_F = Fi;
    }
    // downward: rho < rt
    acc = 0.0;
    prev_rho = rt;
    prev_F = Frt;
    for (int i = j0; i >= 0; --i) {
        const double rho = double(i + 1) * h;
        const double Fi = F(rho);
        acc += 0.5 * (prev_F + Fi) * (prev_rho - rho);
        logm[size_t(i)] = acc;                        // -int_rt^rho = +int_rho^rt
        prev_rho = rho;
        prev_F = Fi;
    }

    // normalize: integral |a|^2 h' = 1 via log-sum-exp trapezoid
    double mx = -1e300;
    for (int i = 0; i < N; ++i) {
        const double s = 2.0 * logm[size_t(i)] + std::log(std::max(ps.hhp(double(i + 1) * h), 1e-300));
        if (s > mx) mx = s;
    }
    if (!(mx > -1e290)) throw RankDeficiency("kernel_element: norm underflow");
    double sum = 0.0;
    for (int i = 0; i < N; ++i) {
        const double s = 2.0 * logm[size_t(i)] + std::log(std::max(ps.hhp(double(i + 1) * h), 1e-300));
        sum += std::exp(s - mx);
    }
    const double lognorm2 = mx + std::log(sum * h);
    if (!std::isfinite(lognorm2)) throw OverflowGuard("kernel_element: normalization overflow");
    const double logc = -0.5 * lognorm2;

    el.samples.resize(size_t(N));
    for (int i = 0; i < N; ++i) el.samples[size_t(i)] = std::exp(logm[size_t(i)] + logc);
    el.norm_constant = std::exp(logc);

    // flat-zone Gaussian comparison
    const double d48 = 48.0 * gc.delta;
    if (std::fabs(el.rho_turn - 1.0) < d48 && k > 0) {
        const double gam = 2.0 * double(k) / gc.V;
        const double xi0 = std::pow(gam / M_PI, 0.25);
        const double cstar = xi0 / el.norm_constant;
        double sup = 0.0;
        for (int i = 0; i < N; ++i) {
            const double x = double(i + 1) * h - el.rho_turn;
            if (std::fabs(x) > 2.0 * gc.delta) continue;
            const double xi = xi0 * std::exp(-0.5 * gam * x * x);
            sup = std::max(sup, std::fabs(cstar * el.samples[size_t(i)] - xi));
        }
        el.gaussian_dist = sup;
    }
    return el;
}

long verify_kernel_dimension(const ProfileSet& ps, const GlobalConstants& gc,
                             long k, int N, double gram_tol) {
    const long rfloor = long(std::floor(gc.r));
    const double h = 2.0 / double(N + 1);
    long count = 0;
    double worst = 0.0;
    for (long n = -2 * rfloor; n <= 0; ++n) {
        HatKernelElement el = kernel_element(ps, gc, k, n, N);
        // independent re-measure of the diagonal Gram entry (Simpson)
        double simpson = 0.0;
        for (int i = 0; i + 2 < N; i += 2) {
            auto val = [&](int j) {
                const double rho = double(j + 1) * h;
                return el.samples[size_t(j)] * el.samples[size_t(j)] * ps.hhp(rho);
            };
            simpson += h / 3.0 * (val(i) + 4.0 * val(i + 1) + val(i + 2));
        }
        worst = std::max(worst, std::fabs(simpson - 1.0));
        ++count;
    }
    // distinct n are exactly orthogonal (different t-frequency); the Gram
    // check therefore reduces to the diagonal quadrature consistency
    if (worst > gram_tol)
        throw RankDeficiency("verify_kernel_dimension: Gram deviation " + std::to_string(worst));
    return count;
}

RadialCoeffs hat_coeffs(const ProfileSet& ps, const GlobalConstants& gc, long k, long n) {
    const double kV = double(k) / gc.V;
    const double r = gc.r;
    RadialCoeffs c;
    c.A = [&ps, &gc, k, n, r](double rho) {
        const double hp = ps.hhp(rho);
        const double Q = W_of(ps, gc, k, n, rho) / hp - ps.hhpp(rho) / (2.0 * hp);
        return -Q;
    };
    c.B = [kV](double) { return -kV; };
    c.E = [&ps](double rho) { return -ps.ghp(rho) / (2.0 * ps.hhp(rho)); };
    return c;
}

HatDiscreteCheck hat_discrete_check(const ProfileSet& ps, const GlobalConstants& gc,
                                    long k, long n, int N) {
    check_positivity(ps, gc, k);
    const double target = gc.r / 2.0 - double(k) / gc.V;
    const RadialCoeffs coeffs = hat_coeffs(ps, gc, k, n);
    DiscreteRadialOperator op = assemble_radial_operator(coeffs, gc.r, N);
    EigPair ep = shift_invert(op.matrix, target);

    HatDiscreteCheck chk;
    chk.pair.mode.model_tag = ModelTag::hat;
    chk.pair.mode.k = k;
    chk.pair.mode.m = n;
    chk.pair.mode.rho_turn = hat_turning_point(ps, gc, k, n);
    chk.pair.lambda = ep.lambda;
    chk.pair.grid_spacing = op.h;
    chk.pair.residual_norm = ep.residual;
    const double scale = 1.0 / std::sqrt(op.h);
    chk.pair.alpha.resize(size_t(N));
    chk.pair.beta.resize(size_t(N) - 1);
    double bl2 = 0.0;
    for (int i = 0; i < N; ++i) chk.pair.alpha[size_t(i)] = ep.vec[size_t(2 * i)] * scale;
    for (int j = 0; j + 1 < N; ++j) {
        chk.pair.beta[size_t(j)] = ep.vec[size_t(2 * j + 1)] * scale;
        bl2 += chk.pair.beta[size_t(j)] * chk.pair.beta[size_t(j)];
    }
    chk.pair.beta_l2 = std::sqrt(bl2 * op.h);
    chk.eigenvalue_error = std::fabs(ep.lambda - target);

    // compare alpha against the integral-factor kernel in the flattened gauge
    HatKernelElement el = kernel_element(ps, gc, k, n, N);
    double sgn = 0.0;
    for (int i = 0; i < N; ++i)
        sgn += chk.pair.alpha[size_t(i)] * el.samples[size_t(i)] * std::sqrt(ps.hhp(op.rho(i)));
    const double flip = (sgn >= 0.0) ? 1.0 : -1.0;
    double dist2 = 0.0;
    for (int i = 0; i < N; ++i) {
        const double ref = el.samples[size_t(i)] * std::sqrt(ps.hhp(op.rho(i)));
        const double d = flip * chk.pair.alpha[size_t(i)] - ref;
        dist2 += d * d;
    }
    chk.alpha_l2_dist = std::sqrt(dist2 * op.h);
    return chk;
}

std::string hat_csv(const std::vector<HatKernelElement>& elements,
                    const GlobalConstants& gc, double window) {
    (void)window;
    std::string out = "model,k,n,rho_turn,eigenvalue,multiplicity,beta_l2,gaussian_dist\n";
    const long mult = 2 * long(std::floor(gc.r)) + 1;
    char buf[512];
    for (const auto& el : elements) {
        const double lambda = gc.r / 2.0 - double(el.k) / gc.V;
        std::snprintf(buf, sizeof buf, "hat,%ld,%ld,%.17g,%.17g,%ld,,%.17g\n",
                      el.k, el.n, el.rho_turn, lambda, mult, el.gaussian_dist);
        out += buf;
    }
    return out;
}

} // namespace speclab
