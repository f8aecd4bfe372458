#include "speclab/profiles.hpp"
#include "speclab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace speclab {

double GlobalConstants::sigma() const { return std::floor(r) / r; }

void GlobalConstants::validate() const {
    if (!(V > 0.0)) throw ConfigError("GlobalConstants: V must be positive");
    if (!(delta > 0.0) || !(50.0 * delta < 0.5))
        throw ConfigError("GlobalConstants: need 0 < 50*delta < 1/2");
    if (!(r > 0.0)) throw ConfigError("GlobalConstants: r must be positive");
    if (r >= 20.0) {
        const double s = sigma();
        if (!(s > 0.9 && s < 1.1))
            throw ConfigError("GlobalConstants: sigma out of (9/10, 11/10)");
    }
}

double CutoffFunction::operator()(double x) const {
    const double d = std::fabs(x - center);
    if (d <= inner_radius) return 1.0;
    if (d >= outer_radius) return 0.0;
    return 1.0 - smoothstep5((d - inner_radius) / (outer_radius - inner_radius));
}

double CutoffFunction::d1(double x) const {
    const double d = std::fabs(x - center);
    if (d <= inner_radius || d >= outer_radius) return 0.0;
    const double w = outer_radius - inner_radius;
    const double s = smoothstep5_d1((d - inner_radius) / w) / w;
    return (x >= center) ? -s : s;
}

namespace {

// End data (value, d1, ..., dq) of a local polynomial at x.
std::vector<double> end_data(const LocalPoly& p, double x, int q) {
    std::vector<double> d(size_t(q) + 1);
    for (int j = 0; j <= q; ++j) d[size_t(j)] = p.deriv(x, j);
    return d;
}

struct PinnedSpec {
    // pinned pieces with their intervals; gaps get patched
    std::vector<double> breaks;
    std::vector<LocalPoly> pinned;   // size = breaks.size()/2 entries at even slots
};

// Monotone-reference subdivision of a gap: knot data at interior points from
// a slope-limited cubic through the endpoint values, quintic patches between.
void subdivided_gap(double a, double b,
                    const std::vector<double>& da, const std::vector<double>& db,
                    int rounds, std::vector<LocalPoly>& pieces, std::vector<double>& brk) {
    const double dv = (db[0] - da[0]) / (b - a);
    auto limit = [&](double s) {
        if (dv == 0.0) return 0.0;
        if (s * dv < 0.0) return 0.0;
        return (std::fabs(s) > 3.0 * std::fabs(dv)) ? 3.0 * dv : s;
    };
    const LocalPoly cubic = hermite_patch(a, b, {da[0], limit(da[1])}, {db[0], limit(db[1])});
    const int nseg = 1 << rounds;
    for (int s = 0; s < nseg; ++s) {
        const double lo = a + (b - a) * double(s) / nseg;
        const double hi = a + (b - a) * double(s + 1) / nseg;
        const std::vector<double> dl = (s == 0) ? da : end_data(cubic, lo, 2);
        const std::vector<double> dr = (s == nseg - 1) ? db : end_data(cubic, hi, 2);
        pieces.push_back(hermite_patch(lo, hi, dl, dr));
        brk.push_back(hi);
    }
}

// Assemble a piecewise poly from three pinned formulas and two transition
// patches. The middle formula is extended into each gap by `extend` times
// the gap length (its interval grows, the transitions shrink): eigensections
// concentrated near the flat zone then see exactly the flat coefficients
// well past the pinned boundary. Pinned-zone values are unchanged.
PiecewisePoly assemble(const std::vector<std::pair<double,double>>& zones,
                       const std::vector<LocalPoly>& pinned,
                       int q, double extend, int subdivide) {
    const double t0 = zones[1].first - extend * (zones[1].first - zones[0].second);
    const double t1 = zones[1].second + extend * (zones[2].first - zones[1].second);
    PiecewisePoly out;
    out.breaks.push_back(zones[0].first);
    out.pieces.push_back(pinned[0]);
    out.breaks.push_back(zones[0].second);
    if (subdivide <= 0) {
        out.pieces.push_back(hermite_patch(zones[0].second, t0,
                                           end_data(pinned[0], zones[0].second, q),
                                           end_data(pinned[1], t0, q)));
        out.breaks.push_back(t0);
    } else {
        subdivided_gap(zones[0].second, t0, end_data(pinned[0], zones[0].second, q),
                       end_data(pinned[1], t0, q), subdivide, out.pieces, out.breaks);
    }
    out.pieces.push_back(pinned[1]);
    out.breaks.push_back(t1);
    if (subdivide <= 0) {
        out.pieces.push_back(hermite_patch(t1, zones[2].first,
                                           end_data(pinned[1], t1, q),
                                           end_data(pinned[2], zones[2].first, q)));
        out.breaks.push_back(zones[2].first);
    } else {
        subdivided_gap(t1, zones[2].first, end_data(pinned[1], t1, q),
                       end_data(pinned[2], zones[2].first, q), subdivide, out.pieces, out.breaks);
    }
    out.pieces.push_back(pinned[2]);
    out.breaks.push_back(zones[2].second);
    return out;
}

ProfileSet build_with_order(const GlobalConstants& gc, int q, double extend, int subdivide) {
    const double d50 = 50.0 * gc.delta;
    const double sg = gc.sigma();
    ProfileSet ps;
    ps.constants = gc;
    ps.contact_order = q;
    ps.flat_extension = extend;

    // f_ck: rho^2 | patch | V | patch | (2-rho)^2
    {
        std::vector<std::pair<double,double>> zones = {
            {0.0, d50}, {1.0 - d50, 1.0 + d50}, {2.0 - d50, 2.0}};
        std::vector<LocalPoly> pin(3);
        pin[0] = LocalPoly{0.0, {0.0, 0.0, 1.0}};
        pin[1] = LocalPoly{1.0, {gc.V}};
        pin[2] = LocalPoly{2.0, {0.0, 0.0, 1.0}};
        ps.f_ck = assemble(zones, pin, q, extend, subdivide);
    }
    // g_ck: 2 - rho^2 | patch | 2 - rho | patch | -2 + (2-rho)^2
    {
        std::vector<std::pair<double,double>> zones = {
            {0.0, d50}, {1.0 - d50, 1.0 + d50}, {2.0 - d50, 2.0}};
        std::vector<LocalPoly> pin(3);
        pin[0] = LocalPoly{0.0, {2.0, 0.0, -1.0}};
        pin[1] = LocalPoly{2.0, {0.0, -1.0}};      // 2 - rho about 2
        pin[2] = LocalPoly{2.0, {-2.0, 0.0, 1.0}};
        ps.g_ck = assemble(zones, pin, q, extend, subdivide);
    }
    // g_hat: 0 | patch | 2 - rho | patch | 0
    {
        std::vector<std::pair<double,double>> zones = {
            {0.0, d50}, {1.0 - d50, 1.0 + d50}, {2.0 - d50, 2.0}};
        std::vector<LocalPoly> pin(3);
        pin[0] = LocalPoly{0.0, {0.0}};
        pin[1] = LocalPoly{2.0, {0.0, -1.0}};
        pin[2] = LocalPoly{0.0, {0.0}};
        ps.g_hat = assemble(zones, pin, q, extend, subdivide);
    }
    // h_hat: rho^2/2 | patch | sigma + (rho-2)/2 | patch | 2 sigma - (rho-2)^2/2
    {
        std::vector<std::pair<double,double>> zones = {
            {0.0, d50}, {1.0 - d50, 1.0 + d50}, {2.0 - d50, 2.0}};
        std::vector<LocalPoly> pin(3);
        pin[0] = LocalPoly{0.0, {0.0, 0.0, 0.5}};
        pin[1] = LocalPoly{2.0, {sg, 0.5}};
        pin[2] = LocalPoly{2.0, {2.0 * sg, 0.0, -0.5}};
        ps.h_hat = assemble(zones, pin, q, extend, subdivide);
    }

    double nmax = 0.0;
    for (int i = 0; i <= 4000; ++i) {
        const double rho = 2.0 * double(i) / 4000.0;
        nmax = std::max(nmax, std::hypot(ps.f(rho), ps.g(rho)));
    }
    ps.fg_norm_max = nmax;
    return ps;
}

} // namespace

ProfileScan scan_profiles(const ProfileSet& ps, int points) {
    ProfileScan sc;
    const double d50 = 50.0 * ps.constants.delta;
    sc.min_f_interior = 1e300;
    sc.min_Delta = 1e300;
    sc.min_fp_binding = 1e300;
    sc.max_gp_binding = -1e300;
    sc.min_hhp = 1e300;
    for (int i = 1; i <= points; ++i) {
        const double rho = 2.0 * double(i) / double(points + 1);
        sc.min_f_interior = std::min(sc.min_f_interior, ps.f(rho));
        sc.min_Delta = std::min(sc.min_Delta, ps.Delta(rho));
        sc.min_hhp = std::min(sc.min_hhp, ps.hhp(rho));
        if (rho < 1.0 + d50) {
            sc.min_fp_binding = std::min(sc.min_fp_binding, ps.fp(rho));
            sc.max_gp_binding = std::max(sc.max_gp_binding, ps.gp(rho));
        }
    }
    sc.ok = sc.min_f_interior > 0.0 && sc.min_Delta > 0.0 &&
            sc.min_fp_binding >= -1e-12 && sc.max_gp_binding < 0.0 && sc.min_hhp > 0.0;
    return sc;
}

ProfileSet build_profiles(const GlobalConstants& constants) {
    constants.validate();
    // Widest flat-zone extension and highest contact order that pass the
    // monotonicity scan win; extension keeps priority over contact order.
    for (double extend : {0.25, 0.15, 0.0}) {
        for (int q = 5; q >= 2; --q) {
            ProfileSet ps = build_with_order(constants, q, extend, 0);
            if (scan_profiles(ps).ok) return ps;
        }
    }
    for (int rounds = 1; rounds <= 8; ++rounds) {
        ProfileSet ps = build_with_order(constants, 2, 0.0, rounds);
        if (scan_profiles(ps).ok) return ps;
    }
    throw ConstructionFailure("build_profiles: no admissible interpolant "
                              "(monotonicity scan failed through 8 subdivisions)");
}

double profile_volume_integral(const ProfileSet& ps) {
    // Adaptive Simpson per piece; the integrand is piecewise polynomial.
    auto f = [&](double x) { return ps.fp(x) * ps.g(x) - ps.f(x) * ps.gp(x); };
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double a, double b, double fa, double fm, double fb, double whole, double eps,
            int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth > 48) throw QuadratureFailure("conformal_volume: no convergence");
            if (std::fabs(delta) <= 15.0 * eps || depth > 30)
                return left + right + delta / 15.0;
            return rec(a, m, fa, flm, fm, left, 0.5 * eps, depth + 1) +
                   rec(m, b, fm, frm, fb, right, 0.5 * eps, depth + 1);
        };
    double total = 0.0;
    const auto& brk = ps.f_ck.breaks;
    std::vector<double> cuts(brk);
    for (double b : ps.g_ck.breaks) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b <= a) continue;
        const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
        const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += rec(a, b, fa, fm, fb, whole, 1e-12 * (std::fabs(whole) + 1.0), 0);
    }
    return total;
}

double conformal_volume(const ProfileSet& ps) {
    const double twopi = 2.0 * M_PI;
    return twopi * twopi * profile_volume_integral(ps);
}

std::string profile_table(const ProfileSet& ps, int points) {
    std::string out = "rho\tf\tfp\tg\tgp\th\thp\tg_hat\tg_hatp\n";
    char buf[512];
    for (int i = 0; i <= points; ++i) {
        const double rho = 2.0 * double(i) / double(points);
        std::snprintf(buf, sizeof buf,
                      "%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\n",
                      rho, ps.f(rho), ps.fp(rho), ps.g(rho), ps.gp(rho),
                      ps.hh(rho), ps.hhp(rho), ps.gh(rho), ps.ghp(rho));
        out += buf;
    }
    return out;
}

} // namespace speclab
