#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "speclab/ck_model.hpp"
#include "speclab/errors.hpp"
#include "speclab/profiles.hpp"

#include <cmath>
#include <random>

using namespace speclab;

namespace {
const ProfileSet& ps100() {
    static ProfileSet ps = [] {
        GlobalConstants gc;
        gc.r = 100.0;
        return build_profiles(gc);
    }();
    return ps;
}
}

TEST_CASE("turning points: poles and flat zone") {
    const ProfileSet& ps = ps100();
    ModeIndex a = turning_point(ps, 0, 5);
    CHECK(a.rho_turn == 0.0);
    CHECK(a.gamma == 5.0);
    ModeIndex b = turning_point(ps, 0, -3);
    CHECK(b.rho_turn == 2.0);
    CHECK(b.gamma == 3.0);
    ModeIndex c = turning_point(ps, 4, 2);    // flat zone: rho = 2 - mV/k = 1
    CHECK(c.rho_turn == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(c.gamma == doctest::Approx(4.0).epsilon(1e-11));
    CHECK_THROWS_AS(turning_point(ps, 0, 0), DegenerateMode);
}

TEST_CASE("turning point root property and gamma formulas") {
    const ProfileSet& ps = ps100();
    std::mt19937_64 rng(17);
    for (int t = 0; t < 50; ++t) {
        const long k = 1 + long(rng() % 120);
        const long m = long(rng() % 241) - 120;
        ModeIndex mo = turning_point(ps, k, m);
        CHECK(std::fabs(double(k) * ps.g(mo.rho_turn) - double(m) * ps.f(mo.rho_turn)) < 1e-8);
        CHECK(mo.gamma == doctest::Approx(2.0 * double(k) / ps.f(mo.rho_turn)).epsilon(1e-12));
        // gamma is also (2 m f' - 2 k g') / (f' g - f g') at the root
        const double alt = (2.0 * double(m) * ps.fp(mo.rho_turn) -
                            2.0 * double(k) * ps.gp(mo.rho_turn)) /
                           (2.0 * ps.Delta(mo.rho_turn));
        CHECK(mo.gamma == doctest::Approx(alt).epsilon(1e-8));
    }
}

TEST_CASE("integer scaling fixes the turning point and scales gamma") {
    const ProfileSet& ps = ps100();
    std::mt19937_64 rng(23);
    for (int t = 0; t < 50; ++t) {
        const long k = 1 + long(rng() % 60);
        const long m = long(rng() % 121) - 60;
        const long c = 1 + long(rng() % 4);
        ModeIndex a = turning_point(ps, k, m);
        ModeIndex b = turning_point(ps, c * k, c * m);
        CHECK(b.rho_turn == doctest::Approx(a.rho_turn).epsilon(1e-9));
        CHECK(b.gamma == doctest::Approx(double(c) * a.gamma).epsilon(1e-9));
    }
}

TEST_CASE("turning point decreases in m for fixed k") {
    const ProfileSet& ps = ps100();
    for (long k : {3L, 17L, 40L}) {
        double prev = 3.0;
        for (long m = -30; m <= 30; m += 5) {
            ModeIndex mo = turning_point(ps, k, m);
            CHECK(mo.rho_turn < prev);
            prev = mo.rho_turn;
        }
    }
}

TEST_CASE("assembled operator is exactly symmetric") {
    const ProfileSet& ps = ps100();
    const RadialCoeffs coeffs = ck_coeffs(ps, 40, 17);
    DiscreteRadialOperator op = assemble_radial_operator(coeffs, 100.0, 300);
    const auto d = op.matrix.to_dense();
    const int n = op.matrix.n;
    CHECK(n == 2 * 300 - 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            CHECK(d[size_t(i) * n + j] == d[size_t(j) * n + i]);   // bit identical
}

TEST_CASE("cached assembly agrees with the generic path") {
    const ProfileSet& ps = ps100();
    const CkCoeffCache cache = build_ck_cache(ps, 300);
    BandedSymmetric M1 = assemble_ck_cached(cache, 40, 17, 100.0);
    DiscreteRadialOperator op = assemble_radial_operator(ck_coeffs(ps, 40, 17), 100.0, 300);
    REQUIRE(M1.ab.size() == op.matrix.ab.size());
    for (size_t i = 0; i < M1.ab.size(); ++i)
        CHECK(M1.ab[i] == doctest::Approx(op.matrix.ab[i]).epsilon(1e-13));
}

TEST_CASE("flat-zone eigenvalue equals half the gap to gamma") {
    // V=2, k=100, m=50, r=100: gamma = 100, exact Gaussian solution at 0
    const ProfileSet& ps = ps100();
    ModeIndex mo = turning_point(ps, 100, 50);
    CHECK(mo.gamma == doctest::Approx(100.0).epsilon(1e-12));
    SolveOpts so;
    so.N = 2000;
    auto p = solve_mode(ps, mo, 100.0, so);
    REQUIRE(p.has_value());
    CHECK(std::fabs(p->lambda) < 1e-3);
    CHECK(std::fabs(p->lambda) < 1e-6);     // far below the spec tolerance
    CHECK(p->residual_norm < 1e-9);
    // joint normalization on the grid
    double nrm = 0.0;
    for (double v : p->alpha) nrm += v * v;
    for (double v : p->beta) nrm += v * v;
    CHECK(nrm * p->grid_spacing == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("far sector: eigenvalue nearest the half-gap prediction") {
    // gamma = 4 sits far below the window; the Gaussian picture is only
    // approximate at this scale. Frozen against the measured value.
    GlobalConstants gc;
    gc.r = 200.0;
    ProfileSet ps = build_profiles(gc);
    ModeIndex mo = turning_point(ps, 4, 2);
    const CkCoeffCache cache = build_ck_cache(ps, 4000);
    BandedSymmetric M = assemble_ck_cached(cache, 4, 2, 200.0);
    EigPair ep = shift_invert(M, 98.0);
    CHECK(std::fabs(ep.lambda - 98.0) < 0.05);
}

TEST_CASE("no window eigenvalue when gamma is far from r") {
    const ProfileSet& ps = ps100();
    const double w = window_radius(WindowPreset::prop53, 100.0);
    ModeIndex mo = turning_point(ps, 100, 50);    // gamma = 100
    // shift gamma far out by solving at r where |r - gamma| > 2w + 2C
    const double r_far = 100.0 + 2.0 * w + 25.0;
    SolveOpts so;
    so.N = 1200;
    so.check_unique = false;
    GlobalConstants gf;
    gf.r = r_far;
    ProfileSet psf = build_profiles(gf);
    ModeIndex mof = turning_point(psf, 100, 50);
    auto p = solve_mode(psf, mof, r_far, so);
    CHECK_FALSE(p.has_value());
}

TEST_CASE("window eigenvalues match the dense oracle at N=400") {
    const ProfileSet& ps = ps100();
    const double w = window_radius(WindowPreset::prop53, 100.0);
    const CkCoeffCache cache = build_ck_cache(ps, 400);
    std::mt19937_64 rng(31);
    int matched = 0;
    for (int t = 0; t < 40 && matched < 20; ++t) {
        const long k = 1 + long(rng() % 110);
        const long m = long(rng() % 221) - 110;
        ModeIndex mo;
        try { mo = turning_point(ps, k, m); } catch (const SpeclabError&) { continue; }
        if (std::fabs(100.0 - mo.gamma) > 2.0 * w) continue;
        BandedSymmetric M = assemble_ck_cached(cache, k, m, 100.0);
        DenseEig full = dense_eigensolve(M, false);
        SolveOpts so;
        so.N = 400;
        so.cache = &cache;
        so.check_unique = false;
        auto p = solve_mode(ps, mo, 100.0, so);
        long dense_in_window = 0;
        double dense_val = 0.0;
        for (double v : full.values)
            if (v > -w && v < w) { ++dense_in_window; dense_val = v; }
        if (!p) {
            CHECK(dense_in_window == 0);
            continue;
        }
        REQUIRE(dense_in_window >= 1);
        CHECK(p->lambda == doctest::Approx(dense_val).epsilon(1e-9));
        ++matched;
    }
    CHECK(matched >= 10);
}

TEST_CASE("grid convergence of a generic transition mode is second order") {
    const ProfileSet& ps = ps100();
    ModeIndex mo = turning_point(ps, 31, 90);
    REQUIRE(!mo.pole_adjacent);
    double lam[3];
    const int Ns[3] = {800, 1600, 3200};
    for (int s = 0; s < 3; ++s) {
        SolveOpts so;
        so.N = Ns[s];
        auto p = solve_mode(ps, mo, 100.0, so);
        REQUIRE(p.has_value());
        lam[s] = p->lambda;
    }
    const double order = std::log2(std::fabs(lam[0] - lam[2]) / std::fabs(lam[1] - lam[2]) - 1.0);
    CHECK(order >= 1.9);
}

TEST_CASE("flat modes cross zero with slope about one half") {
    const ProfileSet& ps = ps100();
    ModeIndex mo = turning_point(ps, 100, 50);
    SolveOpts so;
    so.N = 1200;
    auto lo = solve_mode(ps, mo, 99.0, so);
    auto hi = solve_mode(ps, mo, 101.0, so);
    REQUIRE(lo.has_value());
    REQUIRE(hi.has_value());
    const double slope = (hi->lambda - lo->lambda) / 2.0;
    CHECK(slope >= 0.4);
    CHECK(slope <= 0.6);
}

TEST_CASE("beta component of flat modes decays in r") {
    double prev = 1e9;
    for (double r : {100.0, 200.0, 400.0}) {
        GlobalConstants gc;
        gc.r = r;
        ProfileSet ps = build_profiles(gc);
        ModeIndex mo = turning_point(ps, long(r), long(r) / 2);
        SolveOpts so;
        so.N = 2000;
        auto p = solve_mode(ps, mo, r, so);
        REQUIRE(p.has_value());
        CHECK(p->beta_l2 <= 1e-3 / std::sqrt(r));
        CHECK(p->beta_l2 < prev);
        prev = p->beta_l2;
    }
}

TEST_CASE("mode sweep: deterministic order, window containment, density bound") {
    const ProfileSet& ps = ps100();
    SweepOpts so;
    so.N = 800;
    SpectrumLedger led = mode_sweep(ps, 100.0, so);
    REQUIRE(!led.entries.empty());
    for (size_t i = 1; i < led.entries.size(); ++i) {
        const auto& a = led.entries[i - 1];
        const auto& b = led.entries[i];
        const bool ordered = a.lambda < b.lambda ||
                             (a.lambda == b.lambda &&
                              (a.mode.k < b.mode.k ||
                               (a.mode.k == b.mode.k && a.mode.m <= b.mode.m)));
        CHECK(ordered);
    }
    for (const auto& e : led.entries) {
        CHECK(e.lambda >= led.window_lo);
        CHECK(e.lambda <= led.window_hi);
    }
    // density bound: count <= 2x the analytic lattice density for the window
    const double density = profile_volume_integral(ps) / 2.0 * 100.0;   // per unit lambda
    const double width = (led.window_hi - led.window_lo);
    CHECK(double(led.total_count()) <= 2.0 * density * width);

    // sweep includes the expected flat mode
    bool found = false;
    for (const auto& e : led.entries)
        if (e.mode.k == 100 && e.mode.m == 50) found = true;
    CHECK(found);
}

TEST_CASE("serial and parallel sweeps agree bit for bit") {
    const ProfileSet& ps = ps100();
    SweepOpts a;
    a.N = 600;
    a.exec.jobs = 1;
    SweepOpts b = a;
    b.exec.jobs = 0;
    SpectrumLedger la = mode_sweep(ps, 100.0, a);
    SpectrumLedger lb = mode_sweep(ps, 100.0, b);
    REQUIRE(la.entries.size() == lb.entries.size());
    for (size_t i = 0; i < la.entries.size(); ++i) {
        CHECK(la.entries[i].lambda == lb.entries[i].lambda);
        CHECK(la.entries[i].mode.k == lb.entries[i].mode.k);
        CHECK(la.entries[i].mode.m == lb.entries[i].mode.m);
    }
}

TEST_CASE("solved non-pole sectors carry exactly one window eigenvalue") {
    const ProfileSet& ps = ps100();
    const double w = window_radius(WindowPreset::prop53, 100.0);
    const CkCoeffCache cache = build_ck_cache(ps, 800);
    std::mt19937_64 rng(41);
    int checked = 0;
    for (int t = 0; t < 200 && checked < 25; ++t) {
        const long k = 1 + long(rng() % 110);
        const long m = long(rng() % 221) - 110;
        ModeIndex mo;
        try { mo = turning_point(ps, k, m); } catch (const SpeclabError&) { continue; }
        if (mo.pole_adjacent) continue;
        if (std::fabs(100.0 - mo.gamma) > 2.0 * std::sqrt(100.0 / 3.0)) continue;
        BandedSymmetric M = assemble_ck_cached(cache, k, m, 100.0);
        CHECK(window_count(M, -w, w) <= 1);
        ++checked;
    }
    CHECK(checked >= 20);
}
