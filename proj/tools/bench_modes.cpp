// Benchmark: serial reference vs OpenMP mode sweep, plus the hat kernel
// batch. Prints a timing table and cross-checks that both paths produce
// identical ledgers.

#include "speclab/ck_model.hpp"
#include "speclab/hat_model.hpp"
#include "speclab/profiles.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>

using namespace speclab;

namespace {

double wall() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch()).count();
}

bool same_ledger(const SpectrumLedger& a, const SpectrumLedger& b) {
    if (a.entries.size() != b.entries.size()) return false;
    for (size_t i = 0; i < a.entries.size(); ++i) {
        if (a.entries[i].lambda != b.entries[i].lambda) return false;
        if (a.entries[i].mode.k != b.entries[i].mode.k) return false;
        if (a.entries[i].mode.m != b.entries[i].mode.m) return false;
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    double r = 100.0;
    int N = 800;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--r") && i + 1 < argc) r = std::atof(argv[++i]);
        if (!std::strcmp(argv[i], "--N") && i + 1 < argc) N = std::atoi(argv[++i]);
    }
    GlobalConstants gc;
    gc.r = r;
    ProfileSet ps = build_profiles(gc);

    std::printf("mode sweep benchmark, r=%g N=%d\n", r, N);
    std::printf("%-22s %12s %10s\n", "kernel", "seconds", "speedup");

    SweepOpts so;
    so.N = N;
    so.exec.jobs = 1;
    double t0 = wall();
    SpectrumLedger serial = mode_sweep(ps, r, so);
    const double t_serial = wall() - t0;
    std::printf("%-22s %12.3f %10s  (%zu eigenvalues)\n", "sweep serial", t_serial, "1.00x",
                serial.entries.size());

    so.exec.jobs = 0;
    t0 = wall();
    SpectrumLedger par = mode_sweep(ps, r, so);
    const double t_par = wall() - t0;
    std::printf("%-22s %12.3f %9.2fx  (identical: %s)\n", "sweep openmp", t_par,
                t_serial / t_par, same_ledger(serial, par) ? "yes" : "NO");

    // hat kernel batch: independent integral-factor constructions
    const long k0 = long(r * gc.V / 2.0);
    const long rfloor = long(r);
    auto batch = [&](const Exec& exec) {
        std::vector<double> norms(size_t(2 * rfloor + 1));
        parallel_for(2 * rfloor + 1, exec, [&](std::ptrdiff_t idx) {
            HatKernelElement el = kernel_element(ps, gc, k0, -long(idx), N);
            norms[size_t(idx)] = el.norm_constant;
        });
        return norms;
    };
    t0 = wall();
    auto n1 = batch(Exec{1});
    const double t_hat_serial = wall() - t0;
    std::printf("%-22s %12.3f %10s\n", "hat kernels serial", t_hat_serial, "1.00x");
    t0 = wall();
    auto n2 = batch(Exec{0});
    const double t_hat_par = wall() - t0;
    std::printf("%-22s %12.3f %9.2fx  (identical: %s)\n", "hat kernels openmp", t_hat_par,
                t_hat_serial / t_hat_par, (n1 == n2) ? "yes" : "NO");
    return 0;
}
