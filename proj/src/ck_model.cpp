#include "speclab/ck_model.hpp"
#include "speclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace speclab {

void SpectrumLedger::sort_entries() {
    std::sort(entries.begin(), entries.end(), [](const LedgerEntry& a, const LedgerEntry& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.mode.k != b.mode.k) return a.mode.k < b.mode.k;
        return a.mode.m < b.mode.m;
    });
}

long SpectrumLedger::total_count() const {
    long c = 0;
    for (const auto& e : entries) c += e.multiplicity;
    return c;
}

SpectrumLedger SpectrumLedger::negated() const {
    SpectrumLedger out = *this;
    out.window_lo = -window_hi;
    out.window_hi = -window_lo;
    for (auto& e : out.entries) e.lambda = -e.lambda;
    out.sort_entries();
    return out;
}

std::vector<double> SpectrumLedger::positions() const {
    std::vector<double> p;
    p.reserve(entries.size());
    for (const auto& e : entries) p.push_back(e.lambda);
    return p;
}

double window_radius(WindowPreset preset, double r) {
    return preset == WindowPreset::prop53 ? std::sqrt(r / 3.0) : std::sqrt(r) / 3.0;
}

WindowPreset window_preset_from_string(const std::string& s) {
    if (s == "prop53") return WindowPreset::prop53;
    if (s == "eta") return WindowPreset::eta;
    throw ConfigError("unknown window preset: " + s);
}

std::string to_string(WindowPreset preset) {
    return preset == WindowPreset::prop53 ? "prop53" : "eta";
}

ModeIndex turning_point(const ProfileSet& ps, long k, long m) {
    if (k == 0 && m == 0) throw DegenerateMode("turning_point: (k,m) = (0,0)");
    if (k < 0) throw DegenerateMode("turning_point: k must be >= 0");
    ModeIndex mode;
    mode.model_tag = ModelTag::ck;
    mode.k = k;
    mode.m = m;
    if (k == 0) {
        mode.rho_turn = (m > 0) ? 0.0 : 2.0;
        mode.gamma = std::fabs(double(m));
        mode.pole_adjacent = true;
        return mode;
    }
    // k g(rho) - m f(rho) decreases from 2k at 0 to -2k at 2.
    auto F = [&](double rho) { return double(k) * ps.g(rho) - double(m) * ps.f(rho); };
    double lo = 0.0, hi = 2.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (F(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    mode.rho_turn = 0.5 * (lo + hi);
    mode.gamma = 2.0 * double(k) / ps.f(mode.rho_turn);
    const double d20 = 20.0 * ps.constants.delta;
    mode.pole_adjacent = (mode.rho_turn <= d20 || mode.rho_turn >= 2.0 - d20);
    return mode;
}

RadialCoeffs ck_coeffs(const ProfileSet& ps, long k, long m) {
    const double kk = double(k), mm = double(m);
    RadialCoeffs c;
    c.A = [&ps, kk, mm](double rho) {
        const double D = ps.Delta(rho);
        return (kk * ps.g(rho) - mm * ps.f(rho)) / D + ps.Delta_p(rho) / (2.0 * D);
    };
    c.B = [&ps, kk, mm](double rho) {
        return (kk * ps.gp(rho) - mm * ps.fp(rho)) / (2.0 * ps.Delta(rho));
    };
    c.E = [&ps](double rho) {
        return 1.0 + (ps.fpp(rho) * ps.gp(rho) - ps.fp(rho) * ps.gpp(rho)) / (8.0 * ps.Delta(rho));
    };
    return c;
}

DiscreteRadialOperator assemble_radial_operator(const RadialCoeffs& coeffs, double r, int N,
                                                double window_lo, double window_hi) {
    if (N < 200) throw SolverFailure("assemble_radial_operator: N >= 200 required");
    DiscreteRadialOperator op;
    op.N = N;
    op.h = 2.0 / double(N + 1);
    op.window_lo = window_lo;
    op.window_hi = window_hi;
    const int n = 2 * N - 1;
    op.matrix = BandedSymmetric(n, 1);
    const double h = op.h;
    // node t (t = 0..2N-2) at rho = (1 + 0.5 t) h; even t: a-node, odd: b-node
    for (int t = 0; t < n; ++t) {
        const double rho = (1.0 + 0.5 * double(t)) * h;
        const double B = coeffs.B(rho);
        if (!std::isfinite(B))
            throw SingularCoefficient("assemble_radial_operator: non-finite coefficient at rho=" +
                                      std::to_string(rho));
        if (t % 2 == 0) op.matrix.at(t, t) = 0.5 * r + B;
        else op.matrix.at(t, t) = -(0.5 * r + B + coeffs.E(rho));
        if (t >= 1) {
            const double rho_mid = (0.75 + 0.5 * double(t)) * h;
            const double A = coeffs.A(rho_mid);
            if (!std::isfinite(A))
                throw SingularCoefficient("assemble_radial_operator: non-finite coupling at rho=" +
                                          std::to_string(rho_mid));
            const double sgn = (t % 2 == 0) ? 1.0 : -1.0;   // a-rows carry +1/h
            op.matrix.at(t, t - 1) = sgn / h - 0.5 * A;
        }
    }
    return op;
}

CkCoeffCache build_ck_cache(const ProfileSet& ps, int N) {
    CkCoeffCache c;
    c.N = N;
    c.h = 2.0 / double(N + 1);
    const int n = 2 * N - 1;
    c.G1m.assign(size_t(n), 0.0);
    c.F1m.assign(size_t(n), 0.0);
    c.C0m.assign(size_t(n), 0.0);
    c.G2d.assign(size_t(n), 0.0);
    c.F2d.assign(size_t(n), 0.0);
    c.Ed.assign(size_t(n), 0.0);
    auto delta_of = [&](double rho, double fp, double g, double f, double gp) {
        const double D = 0.5 * (fp * g - f * gp);
        if (!(D > 0.0))
            throw SingularCoefficient("build_ck_cache: Delta <= 0 at rho=" + std::to_string(rho));
        return D;
    };
    for (int t = 0; t < n; ++t) {
        {
            const double rho = (1.0 + 0.5 * double(t)) * c.h;
            const double f = ps.f(rho), fp = ps.fp(rho), fpp = ps.fpp(rho);
            const double g = ps.g(rho), gp = ps.gp(rho), gpp = ps.gpp(rho);
            const double D = delta_of(rho, fp, g, f, gp);
            c.G2d[size_t(t)] = gp / (2.0 * D);
            c.F2d[size_t(t)] = fp / (2.0 * D);
            c.Ed[size_t(t)] = 1.0 + (fpp * gp - fp * gpp) / (8.0 * D);
        }
        if (t >= 1) {
            const double rho = (0.75 + 0.5 * double(t)) * c.h;
            const double f = ps.f(rho), fp = ps.fp(rho), fpp = ps.fpp(rho);
            const double g = ps.g(rho), gp = ps.gp(rho), gpp = ps.gpp(rho);
            const double D = delta_of(rho, fp, g, f, gp);
            const double Dp = 0.5 * (fpp * g - f * gpp);
            c.G1m[size_t(t)] = g / D;
            c.F1m[size_t(t)] = f / D;
            c.C0m[size_t(t)] = Dp / (2.0 * D);
        }
    }
    return c;
}

BandedSymmetric assemble_ck_cached(const CkCoeffCache& c, long k, long m, double r) {
    const int n = 2 * c.N - 1;
    BandedSymmetric M(n, 1);
    const double kk = double(k), mm = double(m);
    const double invh = 1.0 / c.h;
    for (int t = 0; t < n; ++t) {
        const double B = kk * c.G2d[size_t(t)] - mm * c.F2d[size_t(t)];
        if (t % 2 == 0) M.at(t, t) = 0.5 * r + B;
        else M.at(t, t) = -(0.5 * r + B + c.Ed[size_t(t)]);
        if (t >= 1) {
            const double A = kk * c.G1m[size_t(t)] - mm * c.F1m[size_t(t)] + c.C0m[size_t(t)];
            const double sgn = (t % 2 == 0) ? 1.0 : -1.0;
            M.at(t, t - 1) = sgn * invh - 0.5 * A;
        }
    }
    return M;
}

namespace {

RadialEigenpair make_pair_from(const ModeIndex& mode, int N, double h, const EigPair& ep) {
    RadialEigenpair out;
    out.mode = mode;
    out.lambda = ep.lambda;
    out.grid_spacing = h;
    out.residual_norm = ep.residual;
    out.alpha.resize(size_t(N));          // a-nodes (i+1) h
    out.beta.resize(size_t(N) - 1);       // b-nodes (j+1.5) h, j = 0..N-2
    // normalize sum (|a|^2+|b|^2) h = 1; eigenvector has unit 2-norm already
    const double scale = 1.0 / std::sqrt(h);
    double bl2 = 0.0;
    for (int i = 0; i < N; ++i) out.alpha[size_t(i)] = ep.vec[size_t(2 * i)] * scale;
    for (int j = 0; j + 1 < N; ++j) {
        out.beta[size_t(j)] = ep.vec[size_t(2 * j + 1)] * scale;
        bl2 += out.beta[size_t(j)] * out.beta[size_t(j)];
    }
    out.beta_l2 = std::sqrt(bl2 * h);
    return out;
}

} // namespace

std::optional<RadialEigenpair> solve_mode(const ProfileSet& ps, const ModeIndex& mode,
                                          double r, const SolveOpts& opts) {
    const double w = window_radius(opts.preset, r);
    BandedSymmetric M;
    if (opts.cache) {
        if (opts.cache->N != opts.N)
            throw SolverFailure("solve_mode: cache grid does not match N");
        M = assemble_ck_cached(*opts.cache, mode.k, mode.m, r);
    } else {
        const RadialCoeffs coeffs = ck_coeffs(ps, mode.k, mode.m);
        M = assemble_radial_operator(coeffs, r, opts.N).matrix;
    }
    const double h = 2.0 / double(opts.N + 1);

    // Exact in-window count by inertia: certifies emptiness and uniqueness
    // independently of where inverse iteration happens to converge.
    const long count = window_count(M, -w, w);
    if (count == 0) return std::nullopt;
    if (count > 1 && opts.check_unique)
        throw MultipleEigenvalues("solve_mode: " + std::to_string(count) +
                                  " eigenvalues in window for (k,m)=(" +
                                  std::to_string(mode.k) + "," + std::to_string(mode.m) + ")");

    std::vector<double> gauss_start;
    const std::vector<double>* start = opts.warm_start;
    if (!start) {
        // predicted eigenvector: Gaussian of width 1/sqrt(gamma) at rho_turn
        gauss_start.resize(size_t(2 * opts.N - 1), 0.0);
        const double gam = std::max(mode.gamma, 1.0);
        for (int i = 0; i < opts.N; ++i) {
            const double x = double(i + 1) * h - mode.rho_turn;
            gauss_start[size_t(2 * i)] = std::exp(-0.5 * gam * x * x);
        }
        start = &gauss_start;
    }
    const double target = (r - mode.gamma) / 2.0;
    EigPair ep = shift_invert(M, target, start);
    if (ep.lambda < -w || ep.lambda > w) {
        // converged into the wrong basin (off-branch window state); localize
        // the window eigenvalue by inertia bisection and aim at it directly
        double lo = -w, hi = w;
        const long below_lo = eigenvalue_count_below(M, lo);
        while (hi - lo > 1e-3) {
            const double mid = 0.5 * (lo + hi);
            if (eigenvalue_count_below(M, mid) > below_lo) hi = mid;
            else lo = mid;
        }
        ep = shift_invert(M, 0.5 * (lo + hi), nullptr);
        if (ep.lambda < -w || ep.lambda > w)
            throw SolverFailure("solve_mode: window eigenvalue not recovered");
    }
    return make_pair_from(mode, opts.N, h, ep);
}

std::vector<ModeIndex> enumerate_modes_near(const ProfileSet& ps, double r, double bound,
                                            const Exec& exec) {
    const double nmax = ps.fg_norm_max;
    const double smax = (r + bound) * nmax / 2.0;
    const long kmax = long(std::ceil(smax));
    std::vector<std::vector<ModeIndex>> perk(size_t(kmax + 1));
    parallel_for(kmax + 1, exec, [&](std::ptrdiff_t kk) {
        const long k = long(kk);
        std::vector<ModeIndex>& local = perk[size_t(kk)];
        if (k == 0) {
            for (long m = long(std::floor(r - bound)); m <= long(std::ceil(r + bound)); ++m) {
                if (m < 1) continue;
                if (std::fabs(r - double(m)) > bound) continue;
                local.push_back(turning_point(ps, 0, m));
                local.push_back(turning_point(ps, 0, -m));
            }
            return;
        }
        const double rad2 = smax * smax - double(k) * double(k);
        if (rad2 < 0.0) return;
        const long mcap = long(std::floor(std::sqrt(rad2)));
        for (long m = -mcap; m <= mcap; ++m) {
            ModeIndex mode = turning_point(ps, k, m);
            if (std::fabs(r - mode.gamma) <= bound) local.push_back(mode);
        }
    });
    std::vector<ModeIndex> out;
    for (auto& v : perk) out.insert(out.end(), v.begin(), v.end());
    return out;
}

SpectrumLedger mode_sweep(const ProfileSet& ps, double r, const SweepOpts& opts) {
    if (r < 20.0) throw SolverFailure("mode_sweep: r >= 20 required");
    const double w = window_radius(opts.preset, r);
    const double bound = 2.0 * std::sqrt(r / 3.0) + 2.0 * opts.c_margin;
    const std::vector<ModeIndex> modes = enumerate_modes_near(ps, r, bound, opts.exec);

    SpectrumLedger ledger;
    ledger.window_lo = -w;
    ledger.window_hi = w;
    ledger.r = r;

    const CkCoeffCache cache = build_ck_cache(ps, opts.N);
    std::vector<std::vector<LedgerEntry>> found(modes.size());
    std::vector<std::string> failures(modes.size());
    parallel_for(std::ptrdiff_t(modes.size()), opts.exec, [&](std::ptrdiff_t i) {
        const ModeIndex& mode = modes[size_t(i)];
        SolveOpts so;
        so.N = opts.N;
        so.preset = opts.preset;
        so.check_unique = true;
        so.cache = &cache;
        auto push = [&](const RadialEigenpair& p, const char* multi_flag) {
            LedgerEntry e;
            e.lambda = p.lambda;
            e.multiplicity = 1;
            e.mode = p.mode;
            e.residual = p.residual_norm;
            e.beta_l2 = p.beta_l2;
            if (multi_flag) e.flag = multi_flag;
            else if (mode.pole_adjacent) e.flag = "pole";
            else if (std::fabs(p.lambda - 0.5 * (r - mode.gamma)) > opts.c_margin)
                e.flag = "offbranch";
            found[size_t(i)].push_back(e);
        };
        try {
            if (auto p = solve_mode(ps, mode, r, so)) push(*p, nullptr);
        } catch (const MultipleEigenvalues&) {
            // the sector genuinely carries several window eigenvalues at this
            // desk scale; enumerate them all and keep each, flagged
            try {
                const double w = window_radius(opts.preset, r);
                BandedSymmetric M = assemble_ck_cached(cache, mode.k, mode.m, r);
                for (double lam : window_eigenvalues(M, -w, w)) {
                    EigPair ep = shift_invert(M, lam, nullptr);
                    RadialEigenpair p;
                    p.mode = mode;
                    p.lambda = ep.lambda;
                    p.residual_norm = ep.residual;
                    double bl2 = 0.0;
                    for (int jj = 0; jj + 1 < opts.N; ++jj)
                        bl2 += ep.vec[size_t(2 * jj + 1)] * ep.vec[size_t(2 * jj + 1)];
                    p.beta_l2 = std::sqrt(bl2);
                    push(p, "multi");
                }
            } catch (const SpeclabError& e2) {
                failures[size_t(i)] = e2.what();
            }
        } catch (const SpeclabError& e) {
            failures[size_t(i)] = e.what();
        }
    });
    for (size_t i = 0; i < modes.size(); ++i) {
        if (!failures[i].empty())
            throw SolverFailure("mode_sweep: (k,m)=(" + std::to_string(modes[i].k) + "," +
                                std::to_string(modes[i].m) + "): " + failures[i]);
        for (const auto& e : found[i]) ledger.entries.push_back(e);
    }
    ledger.sort_entries();
    return ledger;
}

std::string ledger_csv(const SpectrumLedger& ledger) {
    std::string out = "model,k,m,rho_turn,gamma,lambda,residual,beta_l2,flag\n";
    char buf[512];
    for (const auto& e : ledger.entries) {
        std::snprintf(buf, sizeof buf, "%s,%ld,%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%s\n",
                      e.mode.model_tag == ModelTag::ck ? "ck" : "hat",
                      e.mode.k, e.mode.m, e.mode.rho_turn, e.mode.gamma,
                      e.lambda, e.residual, e.beta_l2, e.flag.c_str());
        out += buf;
    }
    return out;
}

} // namespace speclab
