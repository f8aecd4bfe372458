#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "speclab/errors.hpp"
#include "speclab/hat_model.hpp"
#include "speclab/profiles.hpp"
#include "speclab/spectral_stats.hpp"

#include <cmath>

using namespace speclab;

namespace {
SpectrumLedger ledger_of(std::vector<std::pair<double, long>> vals, double r, double w) {
    SpectrumLedger led;
    led.r = r;
    led.window_lo = -w;
    led.window_hi = w;
    for (auto [l, mult] : vals) {
        LedgerEntry e;
        e.lambda = l;
        e.multiplicity = mult;
        led.entries.push_back(e);
    }
    led.sort_entries();
    return led;
}
}

TEST_CASE("eta sums: empty, antisymmetry, symmetric cancellation") {
    SpectrumLedger empty = ledger_of({}, 100.0, 5.0);
    CHECK(eta_dot(empty) == 0.0);
    CHECK(eta_ddot(empty) == 0.0);

    SpectrumLedger led = ledger_of({{0.7, 2}, {-1.3, 1}, {2.9, 3}}, 100.0, 5.0);
    CHECK(eta_dot(led.negated()) == -eta_dot(led));       // exact
    CHECK(eta_ddot(led.negated()) == -eta_ddot(led));

    SpectrumLedger sym = ledger_of({{0.7, 2}, {-0.7, 2}, {1.9, 1}, {-1.9, 1}}, 100.0, 5.0);
    CHECK(eta_dot(sym) == 0.0);
    CHECK(eta_ddot(sym) == 0.0);
}

TEST_CASE("eta truncates at sqrt(r)/3 regardless of the ledger window") {
    // an eigenvalue beyond the eta radius contributes nothing
    const double R = std::sqrt(100.0) / 3.0;
    SpectrumLedger a = ledger_of({{1.0, 1}}, 100.0, 6.0);
    SpectrumLedger b = ledger_of({{1.0, 1}, {R + 0.5, 7}}, 100.0, 6.0);
    CHECK(eta_dot(a) == eta_dot(b));
    CHECK(eta_ddot(a) == eta_ddot(b));
}

TEST_CASE("eta_dot against a direct quadrature of the definition") {
    SpectrumLedger led = ledger_of({{0.9, 2}, {-2.1, 1}}, 100.0, 6.0);
    const double r = 100.0;
    const double a = 20.0 * std::log(r) / r;
    const double R = std::sqrt(r) / 3.0;
    auto integral = [&](double lo, double hi) {
        const int n = 200000;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double u = lo + (hi - lo) * double(i) / n;
            const double f = std::exp(-a * u * u);
            acc += (i == 0 || i == n) ? 0.5 * f : f;
        }
        return acc * (hi - lo) / n;
    };
    const double expect = std::sqrt(std::log(r) / r) *
                          (2.0 * integral(0.9, R) - 1.0 * integral(2.1, R));
    CHECK(eta_dot(led) == doctest::Approx(expect).epsilon(1e-9));

    const double expect2 = std::pow(r, -1.5) * std::log(r) *
                           (2.0 * 0.9 * std::exp(-a * 0.81) - 2.1 * std::exp(-a * 4.41));
    CHECK(eta_ddot(led) == doctest::Approx(expect2).epsilon(1e-12));
}

TEST_CASE("partition: empty ledgers give the integers") {
    SpectrumLedger empty = ledger_of({}, 100.0, 5.0);
    auto part = build_partition({&empty}, 100.0);
    REQUIRE(!part.empty());
    for (const auto& p : part) {
        CHECK(p.nu == doctest::Approx(double(p.j)).epsilon(1e-12));
        CHECK(std::fabs(p.nu - double(p.j)) <= 0.1);
    }
}

TEST_CASE("partition avoids a lone eigenvalue with a verified gap") {
    SpectrumLedger led = ledger_of({{0.5, 1}}, 100.0, 5.0);
    auto part = build_partition({&led}, 100.0);
    for (const auto& p : part) {
        CHECK(std::fabs(p.nu - double(p.j)) <= 0.1);
        CHECK(p.gap >= p.margin);
    }
}

TEST_CASE("partition on the hat ledger at r=400 with re-scan") {
    GlobalConstants gc;
    gc.r = 400.0;
    const double w = std::sqrt(400.0 / 3.0);
    SpectrumLedger hat = hat_spectrum(gc, w);
    auto part = build_partition({&hat}, 400.0);
    const long J = long(std::floor(0.5 * std::sqrt(400.0)));
    CHECK(long(part.size()) == 2 * J - 1);
    for (const auto& p : part) {
        CHECK(std::fabs(p.nu - double(p.j)) <= 0.1);
        CHECK(p.gap >= p.margin);
        CHECK(p.gap >= 1e-4);               // c / r scale
        for (const auto& e : hat.entries)   // re-scan assertion
            CHECK(std::fabs(e.lambda - p.nu) >= p.margin);
    }
}

TEST_CASE("index sets: empty interval and direct hat enumeration") {
    GlobalConstants gc;
    gc.r = 100.0;
    const double w = std::sqrt(100.0 / 3.0);
    SpectrumLedger hat = hat_spectrum(gc, w);
    SpectrumLedger ck = ledger_of({{0.21, 1}}, 100.0, w);
    ck.entries[0].mode.k = 10;
    ck.entries[0].mode.m = 20;     // k < mV passes the filter

    std::vector<PartitionPoint> part(3);
    part[0].j = -1; part[0].nu = -1.0;
    part[1].j = 0;  part[1].nu = 0.02;
    part[2].j = 1;  part[2].nu = 1.01;
    auto counts = index_sets(ck, hat, part, gc.V, gc.r);
    REQUIRE(counts.size() == 2);

    // interval (-1, 0.02): hat eigenvalues 50 - k/2 in it are k in {100..101}
    long expect0 = 0;
    for (long k : {100L, 101L}) {
        const double lam = 50.0 - double(k) / 2.0;
        if (lam > -1.0 && lam < 0.02) expect0 += 100 - long(std::floor(double(k) / 2.0));
    }
    CHECK(counts[0].hat_count == expect0);
    CHECK(counts[0].ck_count == 0);
    // interval (0.02, 1.01) holds the ck entry and hat k in {98, 99}
    CHECK(counts[1].ck_count == 1);
    long expect1 = 0;
    for (long k : {98L, 99L}) expect1 += 100 - long(std::floor(double(k) / 2.0));
    CHECK(counts[1].hat_count == expect1);

    // per-interval counts are bounded by a constant times r
    for (const auto& c : counts) CHECK(c.hat_count <= 3 * 100);
}

TEST_CASE("vafa-witten: exact steps, ladders, realized fj") {
    GlobalConstants gc;
    gc.r = 100.0;
    const double w = std::sqrt(100.0 / 3.0);
    SpectrumLedger hat = hat_spectrum(gc, w);
    VWReport rep = vafa_witten_check(hat, gc);
    CHECK(rep.fj_realized == 201);
    CHECK(rep.step == 0.5);
    CHECK(rep.max_abs_deviation == 0.0);      // exact at V = 2
    CHECK(!rep.deviations.empty());
    CHECK(rep.ladder_matches_formula);
    REQUIRE(!rep.ladder_plus.empty());
    // n_0^+ at r=100: [r] - [(1/V)[rV/2]] = 100 - 50
    CHECK(rep.ladder_plus[0] == 50);
}

TEST_CASE("vafa-witten multiplicity ladder at r=100.3 matches the formulas") {
    GlobalConstants gc;
    gc.r = 100.3;
    const double w = std::sqrt(gc.r / 3.0);
    SpectrumLedger hat = hat_spectrum(gc, w);
    VWReport rep = vafa_witten_check(hat, gc);
    CHECK(rep.fj_realized == 201);
    CHECK(rep.ladder_matches_formula);
    CHECK(rep.ladder_plus[0] == 50);          // 100 - [(1/2)*100 - 0]
    CHECK(rep.max_abs_deviation <= 1e-12 * gc.r);
}

TEST_CASE("spectral flow is zero below the smallest admissible gamma") {
    GlobalConstants gc;
    gc.r = 100.0;
    ProfileSet ps = build_profiles(gc);
    SpectralFlowOpts opts;
    opts.N = 400;
    SpectralFlowResult sf = spectral_flow(ps, 0.5, opts);
    CHECK(sf.flow == 0);
    CHECK(sf.gamma_count == 0);
}

TEST_CASE("spectral flow matches the lattice count within the straddle margin") {
    GlobalConstants gc;
    gc.r = 100.0;
    ProfileSet ps = build_profiles(gc);
    SpectralFlowOpts opts;
    opts.N = 500;
    opts.keep_records = true;
    SpectralFlowResult sf = spectral_flow(ps, 40.0, opts);
    CHECK(sf.negative_crossings == 0);
    CHECK(std::llabs(sf.flow - sf.gamma_count) <= sf.straddle_count);
    CHECK(sf.predicted == doctest::Approx(40.0 * 40.0 / (32.0 * M_PI * M_PI) *
                                          conformal_volume(ps)).epsilon(1e-12));
    // every tracked crossing sits near its gamma
    for (const auto& rec : sf.crossings)
        if (rec.tracked) CHECK(std::fabs(rec.r_cross - rec.mode.gamma) < 5.0);
    // serial equals parallel
    SpectralFlowOpts ser = opts;
    ser.keep_records = false;
    ser.exec.jobs = 1;
    SpectralFlowResult sf2 = spectral_flow(ps, 40.0, ser);
    CHECK(sf2.flow == sf.flow);
}

TEST_CASE("ck filter keeps only k < mV sectors") {
    SpectrumLedger led = ledger_of({{0.1, 1}, {0.2, 1}, {0.3, 1}}, 100.0, 5.0);
    led.entries[0].mode.k = 10; led.entries[0].mode.m = 20;   // keep
    led.entries[1].mode.k = 50; led.entries[1].mode.m = 20;   // drop
    led.entries[2].mode.k = 10; led.entries[2].mode.m = -20;  // drop
    SpectrumLedger f = filter_ck_vr(led, 2.0);
    REQUIRE(f.entries.size() == 1);
    CHECK(f.entries[0].mode.k == 10);
    CHECK(f.entries[0].mode.m == 20);
}
