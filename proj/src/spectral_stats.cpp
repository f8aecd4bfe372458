#include "speclab/spectral_stats.hpp"
#include "speclab/errors.hpp"

#include <algorithm>
#include <cmath>

namespace speclab {

namespace {

// integral_x^R exp(-a u^2) du via erf
double gauss_tail(double a, double x, double R) {
    const double s = std::sqrt(a);
    return 0.5 * std::sqrt(M_PI / a) * (std::erf(s * R) - std::erf(s * x));
}

} // namespace

double eta_dot(const SpectrumLedger& ledger) {
    const double r = ledger.r;
    if (!(r > M_E)) throw SpeclabError("eta_dot: r > e required");
    const double a = 20.0 * std::log(r) / r;
    const double R = std::sqrt(r) / 3.0;
    double sum = 0.0;
    for (const auto& e : ledger.entries) {
        const double l = e.lambda;
        if (l > 0.0 && l < R) sum += double(e.multiplicity) * gauss_tail(a, l, R);
        else if (l < 0.0 && l > -R) sum -= double(e.multiplicity) * gauss_tail(a, -l, R);
    }
    return std::sqrt(std::log(r) / r) * sum;
}

double eta_ddot(const SpectrumLedger& ledger) {
    const double r = ledger.r;
    if (!(r > M_E)) throw SpeclabError("eta_ddot: r > e required");
    const double a = 20.0 * std::log(r) / r;
    const double R = std::sqrt(r) / 3.0;
    double sum = 0.0;
    for (const auto& e : ledger.entries) {
        const double l = e.lambda;
        if (l > -R && l < R) sum += double(e.multiplicity) * l * std::exp(-a * l * l);
    }
    return std::pow(r, -1.5) * std::log(r) * sum;
}

SpectrumLedger filter_ck_vr(const SpectrumLedger& ledger, double V) {
    SpectrumLedger out = ledger;
    out.entries.clear();
    for (const auto& e : ledger.entries)
        if (double(e.mode.k) < double(e.mode.m) * V) out.entries.push_back(e);
    return out;
}

std::vector<PartitionPoint> build_partition(const std::vector<const SpectrumLedger*>& ledgers,
                                            double r) {
    std::vector<double> pos;
    for (const auto* l : ledgers)
        for (const auto& e : l->entries) pos.push_back(e.lambda);
    std::sort(pos.begin(), pos.end());

    const long J = long(std::floor(0.5 * std::sqrt(r)));
    std::vector<PartitionPoint> out;
    for (long j = -J + 1; j <= J - 1; ++j) {
        const double lo = double(j) - 1.0 / 15.0;
        const double hi = double(j) + 1.0 / 15.0;
        const auto first = std::lower_bound(pos.begin(), pos.end(), lo);
        const auto last = std::upper_bound(pos.begin(), pos.end(), hi);
        const long inside = long(last - first);
        long K = std::max<long>(31, 2 * inside + 17);
        if (K % 2 == 0) ++K;
        const double cell = (hi - lo) / double(K);
        const long center = (K - 1) / 2;
        long chosen = -1;
        for (long step = 0; step <= center && chosen < 0; ++step) {
            for (int sgn : {-1, +1}) {
                if (step == 0 && sgn > 0) continue;
                const long c = center + sgn * step;
                if (c < 0 || c >= K) continue;
                const double a = lo + cell * double(c);
                const double b = a + cell;
                const bool occupied = std::lower_bound(first, last, a) !=
                                      std::upper_bound(first, last, b);
                if (!occupied) { chosen = c; break; }
            }
        }
        if (chosen < 0)
            throw PartitionFailure("build_partition: no free sub-interval at j=" +
                                   std::to_string(j));
        PartitionPoint p;
        p.j = j;
        p.nu = lo + cell * (double(chosen) + 0.5);
        p.margin = 0.5 * cell;
        p.gap = 1e300;
        const auto it = std::lower_bound(pos.begin(), pos.end(), p.nu);
        if (it != pos.end()) p.gap = std::min(p.gap, std::fabs(*it - p.nu));
        if (it != pos.begin()) p.gap = std::min(p.gap, std::fabs(*(it - 1) - p.nu));
        if (pos.empty()) p.gap = 1e300;
        out.push_back(p);
    }
    return out;
}

std::vector<IndexCounts> index_sets(const SpectrumLedger& ck_ledger,
                                    const SpectrumLedger& hat_ledger,
                                    const std::vector<PartitionPoint>& partition,
                                    double V, double r) {
    const long rfloor = long(std::floor(r));
    std::vector<IndexCounts> out;
    for (size_t i = 0; i + 1 < partition.size(); ++i) {
        const double lo = partition[i].nu, hi = partition[i + 1].nu;
        IndexCounts ic;
        ic.j = partition[i].j;
        for (const auto& e : ck_ledger.entries) {
            if (e.lambda <= lo || e.lambda >= hi) continue;
            if (double(e.mode.k) < double(e.mode.m) * V) ++ic.ck_count;
        }
        for (const auto& e : hat_ledger.entries) {
            if (e.lambda <= lo || e.lambda >= hi) continue;
            ic.hat_count += rfloor - long(std::floor(double(e.mode.k) / V));
        }
        out.push_back(ic);
    }
    return out;
}

VWReport vafa_witten_check(const SpectrumLedger& hat_ledger, const GlobalConstants& gc) {
    VWReport rep;
    rep.step = 1.0 / gc.V;
    if (hat_ledger.entries.empty()) return rep;

    long mult = hat_ledger.entries.front().multiplicity;
    for (const auto& e : hat_ledger.entries)
        if (e.multiplicity != mult)
            throw StepMismatch("vafa_witten_check: non-constant multiplicity in window");
    rep.fj_realized = mult;

    std::vector<double> flat;
    for (const auto& e : hat_ledger.entries)
        for (long c = 0; c < e.multiplicity; ++c) flat.push_back(e.lambda);

    const double jmax = 0.5 * std::sqrt(gc.r) - rep.step;
    const double tol = 1e-12 * std::max(1.0, gc.r);
    for (size_t j = 0; j + size_t(mult) < flat.size(); ++j) {
        if (std::fabs(flat[j]) > jmax) continue;
        const double dev = flat[j + size_t(mult)] - flat[j] - rep.step;
        rep.deviations.emplace_back(long(j), dev);
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::fabs(dev));
        if (std::fabs(dev) > tol)
            throw StepMismatch("vafa_witten_check: step deviation at j=" + std::to_string(j));
    }

    // Lemma-style multiplicity ladders around the smallest non-negative value
    const long rfloor = long(std::floor(gc.r));
    const long k0 = long(std::floor(gc.r * gc.V / 2.0));
    rep.ladder_matches_formula = true;
    for (int side = 0; side < 2; ++side) {
        for (long j = 0;; ++j) {
            const long k = (side == 0) ? k0 - j : k0 + j + 1;
            const double lambda = gc.r / 2.0 - double(k) / gc.V;
            if (std::fabs(lambda) > hat_ledger.window_hi) break;
            const long measured = rfloor - long(std::floor(double(k) / gc.V));
            const long formula =
                rfloor - long(std::floor((1.0 / gc.V) * double(long(std::floor(gc.r * gc.V / 2.0))) +
                                         double(side == 0 ? -j : j + 1) / gc.V));
            if (side == 0) rep.ladder_plus.push_back(measured);
            else rep.ladder_minus.push_back(measured);
            if (measured != formula) rep.ladder_matches_formula = false;
        }
    }
    return rep;
}

namespace {

// gamma values of every sector with gamma <= cap
std::vector<ModeIndex> enumerate_gamma_below(const ProfileSet& ps, double cap, const Exec& exec) {
    const double smax = cap * ps.fg_norm_max / 2.0;
    const long kmax = long(std::ceil(smax));
    std::vector<std::vector<ModeIndex>> perk(size_t(kmax + 1));
    parallel_for(kmax + 1, exec, [&](std::ptrdiff_t kk) {
        const long k = long(kk);
        auto& local = perk[size_t(kk)];
        if (k == 0) {
            for (long m = 1; m <= long(std::floor(cap)); ++m) {
                local.push_back(turning_point(ps, 0, m));      // gamma = m
                local.push_back(turning_point(ps, 0, -m));
            }
            return;
        }
        const double rad2 = smax * smax - double(k) * double(k);
        if (rad2 < 0.0) return;
        const long mcap = long(std::floor(std::sqrt(rad2)));
        for (long m = -mcap; m <= mcap; ++m) {
            ModeIndex mode = turning_point(ps, k, m);
            if (mode.gamma <= cap) local.push_back(mode);
        }
    });
    std::vector<ModeIndex> out;
    for (auto& v : perk) out.insert(out.end(), v.begin(), v.end());
    return out;
}

} // namespace

SpectralFlowResult spectral_flow(const ProfileSet& ps, double R, const SpectralFlowOpts& opts) {
    SpectralFlowResult res;
    res.predicted = R * R / (32.0 * M_PI * M_PI) * conformal_volume(ps);

    const double band = opts.straddle_band;
    const std::vector<ModeIndex> modes = enumerate_gamma_below(ps, R + band, opts.exec);
    for (const auto& mo : modes) {
        if (mo.gamma <= R) ++res.gamma_count;
        if (std::fabs(mo.gamma - R) <= band) ++res.straddle_count;
    }

    struct PerMode {
        int crossed = 0;            // +1 / -1 signed count
        bool pre_sweep = false;
        bool tracked = false;
        double r_cross = 0.0;
        int negatives = 0;
    };
    std::vector<PerMode> acc(modes.size());
    std::vector<std::string> failures(modes.size());
    const CkCoeffCache cache = build_ck_cache(ps, opts.N);

    parallel_for(std::ptrdiff_t(modes.size()), opts.exec, [&](std::ptrdiff_t idx) {
        const ModeIndex& mode = modes[size_t(idx)];
        PerMode& pm = acc[size_t(idx)];
        try {
            if (mode.gamma < opts.r_min - band) {
                // crossing sits below the solver validity range; lambda(r) is
                // already positive at the sweep start
                pm.crossed = +1;
                pm.pre_sweep = true;
                return;
            }
            if (mode.gamma > R + band) return;

            std::vector<double> warm;
            auto lambda_at = [&](double r) -> std::optional<double> {
                SolveOpts so;
                so.N = opts.N;
                so.preset = WindowPreset::prop53;
                so.check_unique = false;
                so.warm_start = warm.empty() ? nullptr : &warm;
                so.cache = &cache;
                auto p = solve_mode(ps, mode, r, so);
                if (!p) return std::nullopt;
                warm.resize(p->alpha.size() * 2);
                for (size_t i = 0; i < p->alpha.size(); ++i) {
                    warm[2 * i] = p->alpha[i];
                    warm[2 * i + 1] = p->beta[i];
                }
                return p->lambda;
            };
            auto sign_at = [&](double r) -> int {
                auto l = lambda_at(r);
                if (l) return (*l >= 0.0) ? +1 : -1;
                return (r >= mode.gamma) ? +1 : -1;   // out-of-window side
            };

            // walk the grid from below the expected crossing
            double r_lo = std::max(opts.r_min, mode.gamma - band);
            r_lo = opts.r_min + std::floor((r_lo - opts.r_min) / opts.grid_step) * opts.grid_step;
            if (sign_at(r_lo) > 0) {
                if (r_lo <= opts.r_min + 1e-12) {
                    pm.crossed = +1;   // crossed at or below the sweep start
                    pm.pre_sweep = true;
                    return;
                }
                // unexpected: re-walk from the sweep start before giving up
                r_lo = opts.r_min;
                if (sign_at(r_lo) > 0) {
                    pm.crossed = +1;
                    pm.pre_sweep = true;
                    return;
                }
            }
            double r_hi = r_lo;
            bool found = false;
            while (r_hi < R - 1e-12) {
                const double next = std::min(R, r_hi + opts.grid_step);
                const int s = sign_at(next);
                if (s > 0) { found = true; r_lo = r_hi; r_hi = next; break; }
                r_hi = next;
            }
            if (!found) return;       // still negative at R: not crossed
            // bisection refinement in r
            while (r_hi - r_lo > opts.refine_dr) {
                const double mid = 0.5 * (r_lo + r_hi);
                if (sign_at(mid) > 0) r_hi = mid;
                else r_lo = mid;
            }
            pm.crossed = +1;
            pm.tracked = true;
            pm.r_cross = 0.5 * (r_lo + r_hi);
        } catch (const SpeclabError& e) {
            failures[size_t(idx)] = e.what();
        }
    });

    for (size_t i = 0; i < modes.size(); ++i) {
        if (!failures[i].empty())
            throw TrackingLoss("spectral_flow: (k,m)=(" + std::to_string(modes[i].k) + "," +
                               std::to_string(modes[i].m) + "): " + failures[i]);
        res.flow += acc[i].crossed;
        if (acc[i].pre_sweep) ++res.pre_sweep;
        res.negative_crossings += acc[i].negatives;
        if (opts.keep_records && acc[i].crossed != 0) {
            CrossingRecord rec;
            rec.mode = modes[i];
            rec.r_cross = acc[i].tracked ? acc[i].r_cross : std::nan("");
            rec.direction = acc[i].crossed;
            rec.tracked = acc[i].tracked;
            res.crossings.push_back(rec);
        }
    }
    std::sort(res.crossings.begin(), res.crossings.end(),
              [](const CrossingRecord& a, const CrossingRecord& b) {
                  if (a.mode.k != b.mode.k) return a.mode.k < b.mode.k;
                  return a.mode.m < b.mode.m;
              });
    return res;
}

} // namespace speclab
