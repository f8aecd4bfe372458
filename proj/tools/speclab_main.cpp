// speclab command line: profiles | ck | hat | perturb | eta | sflow | report
//
// Exit codes: 0 success, 2 configuration/validation error, 3 numerical
// failure. Log verbosity via SPECLAB_LOG = quiet | info | debug.

#include "speclab/config.hpp"
#include "speclab/errors.hpp"
#include "speclab/ck_model.hpp"
#include "speclab/hat_model.hpp"
#include "speclab/perturbation.hpp"
#include "speclab/profiles.hpp"
#include "speclab/report.hpp"
#include "speclab/spectral_stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

using namespace speclab;
using nlohmann::json;

namespace {

int g_log_level = 1;   // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::fprintf(stderr, "[speclab] %s\n", msg.c_str());
}
void log_debug(const std::string& msg) {
    if (g_log_level >= 2) std::fprintf(stderr, "[speclab:debug] %s\n", msg.c_str());
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string rtag(double r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", r);
    return buf;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

GlobalConstants constants_for(const ExperimentConfig& cfg, double r) {
    GlobalConstants gc;
    gc.V = cfg.V;
    gc.delta = cfg.delta;
    gc.r = r;
    return gc;
}

Exec exec_of(const ExperimentConfig& cfg) { return Exec{cfg.parallelism}; }

// ---------------------------------------------------------------- profiles
int cmd_profiles(const ExperimentConfig& cfg, RunManifest& man) {
    Timer t;
    const GlobalConstants gc = constants_for(cfg, cfg.r_values.front());
    ProfileSet ps = build_profiles(gc);
    const ProfileScan sc = scan_profiles(ps);
    man.outputs.emplace_back(cfg.output_dir + "/profiles/profile_table.tsv",
                             write_file(cfg.output_dir + "/profiles/profile_table.tsv",
                                        profile_table(ps, cfg.table_points)));
    json v;
    v["contact_order"] = ps.contact_order;
    v["flat_extension"] = ps.flat_extension;
    v["scan_ok"] = sc.ok;
    v["min_f_interior"] = sc.min_f_interior;
    v["min_Delta"] = sc.min_Delta;
    v["min_fp_binding"] = sc.min_fp_binding;
    v["max_gp_binding"] = sc.max_gp_binding;
    v["min_hhp"] = sc.min_hhp;
    v["volume_integral"] = profile_volume_integral(ps);
    v["conformal_volume"] = conformal_volume(ps);
    v["sigma"] = gc.sigma();
    man.outputs.emplace_back(cfg.output_dir + "/profiles/validation.json",
                             write_file(cfg.output_dir + "/profiles/validation.json",
                                        v.dump(2) + "\n"));
    man.timings.emplace_back("profiles", t.seconds());
    return 0;
}

// ---------------------------------------------------------------------- ck
int cmd_ck(const ExperimentConfig& cfg, RunManifest& man) {
    for (double r : cfg.r_values) {
        Timer t;
        const GlobalConstants gc = constants_for(cfg, r);
        ProfileSet ps = build_profiles(gc);
        SweepOpts so;
        so.N = cfg.grid_N;
        so.preset = cfg.preset();
        so.c_margin = cfg.c_margin;
        so.exec = exec_of(cfg);
        SpectrumLedger led = mode_sweep(ps, r, so);
        const std::string path = cfg.output_dir + "/ck/ledger_r" + rtag(r) + ".csv";
        man.outputs.emplace_back(path, write_file(path, ledger_csv(led)));
        man.timings.emplace_back("ck r=" + rtag(r), t.seconds());
        log_info("ck r=" + rtag(r) + ": " + std::to_string(led.entries.size()) + " eigenvalues");
    }
    return 0;
}

// --------------------------------------------------------------------- hat
int cmd_hat(const ExperimentConfig& cfg, RunManifest& man) {
    for (double r : cfg.r_values) {
        Timer t;
        const GlobalConstants gc = constants_for(cfg, r);
        ProfileSet ps = build_profiles(gc);
        const double w = window_radius(cfg.preset(), r);
        SpectrumLedger led = hat_spectrum(gc, w);
        const long k0 = long(std::floor(r * cfg.V / 2.0));
        const long rfloor = long(std::floor(r));

        // per-(k,n) table for every window k, n sampled on a fixed stride
        std::vector<HatKernelElement> rows;
        for (const auto& e : led.entries) {
            const long nstep = std::max<long>(1, (2 * rfloor) / 40);
            for (long n = -2 * rfloor; n <= 0; n += nstep) {
                HatKernelElement el;
                el.k = e.mode.k;
                el.n = n;
                el.rho_turn = hat_turning_point(ps, gc, e.mode.k, n);
                rows.push_back(el);
            }
        }
        const std::string path = cfg.output_dir + "/hat/ledger_r" + rtag(r) + ".csv";
        man.outputs.emplace_back(path, write_file(path, hat_csv(rows, gc, w)));

        // kernel diagnostics for the configured k offsets
        json diag;
        diag["r"] = r;
        diag["multiplicity"] = 2 * rfloor + 1;
        diag["kernel"] = json::array();
        for (long off : cfg.hat_k_offsets) {
            const long k = k0 + off;
            if (std::fabs(r / 2.0 - double(k) / cfg.V) > w) continue;
            json jk;
            jk["k"] = k;
            jk["dimension"] = verify_kernel_dimension(ps, gc, k, cfg.hat_N);
            const long n_mid = std::lround(double(k) / cfg.V) - rfloor;  // flat-zone index
            HatKernelElement el = kernel_element(ps, gc, k, n_mid, cfg.hat_N);
            HatDiscreteCheck chk = hat_discrete_check(ps, gc, k, n_mid, cfg.hat_check_N);
            jk["n_checked"] = n_mid;
            jk["rho_turn"] = el.rho_turn;
            jk["gaussian_dist"] = el.gaussian_dist;
            jk["lambda"] = chk.pair.lambda;
            jk["eigenvalue_error"] = chk.eigenvalue_error;
            jk["beta_l2"] = chk.pair.beta_l2;
            jk["alpha_l2_dist"] = chk.alpha_l2_dist;
            diag["kernel"].push_back(jk);
        }
        const std::string jpath = cfg.output_dir + "/hat/kernel_r" + rtag(r) + ".json";
        man.outputs.emplace_back(jpath, write_file(jpath, diag.dump(2) + "\n"));
        man.timings.emplace_back("hat r=" + rtag(r), t.seconds());
        log_info("hat r=" + rtag(r) + ": " + std::to_string(led.entries.size()) +
                 " distinct eigenvalues");
    }
    return 0;
}

// ----------------------------------------------------------------- perturb
// Mode families: series-sane interior non-flat sectors at the smallest r,
// scaled by integer factors for the larger r values (same turning point,
// gamma scales exactly).
int cmd_perturb(const ExperimentConfig& cfg, RunManifest& man) {
    Timer t;
    const double r0 = cfg.r_values.front();
    const GlobalConstants gc0 = constants_for(cfg, r0);
    ProfileSet ps = build_profiles(gc0);
    std::vector<ModeIndex> base = select_perturbative_modes(ps, r0, cfg.perturb_modes);

    std::string csv = "family,r,k,m,rho_turn,gamma,lambda_num";
    for (int J = 1; J <= cfg.perturb_order; ++J) csv += ",mu_" + std::to_string(J);
    for (int J = 1; J <= cfg.perturb_order; ++J) csv += ",gap_" + std::to_string(J);
    csv += ",residual_sq,fitted_exponent\n";

    json ladders = json::array();
    for (size_t fam = 0; fam < base.size(); ++fam) {
        std::vector<double> lr, ldev;
        for (size_t step = 0; step < cfg.r_values.size(); ++step) {
            const double r = cfg.r_values[step];
            const long scale = long(std::llround(r / r0));
            const ModeIndex mode = turning_point(ps, base[fam].k * scale, base[fam].m * scale);
            TaylorCoefficients tc = taylor_extract(ps, mode);
            PerturbativeSolution sol = recursive_solution(tc, mode.gamma, r, cfg.perturb_order);

            SolveOpts so;
            so.N = cfg.perturb_N;
            so.check_unique = false;
            auto p1 = solve_mode(ps, mode, r, so);
            so.N = 2 * cfg.perturb_N;
            auto p2 = solve_mode(ps, mode, r, so);
            if (!p1 || !p2) continue;
            const double lam = (4.0 * p2->lambda - p1->lambda) / 3.0;   // h^2 extrapolation

            const CutoffFunction cut = mode_cutoff(ps, mode);
            const double rsq = approx_residual_sq(ps, mode, sol, cut, 2 * cfg.perturb_N);

            char line[1024];
            std::snprintf(line, sizeof line, "%zu,%.17g,%ld,%ld,%.17g,%.17g,%.17g",
                          fam, r, mode.k, mode.m, mode.rho_turn, mode.gamma, lam);
            csv += line;
            for (int J = 1; J <= cfg.perturb_order; ++J) csv += "," + fmt(sol.mu_partial(J));
            for (int J = 1; J <= cfg.perturb_order; ++J)
                csv += "," + fmt(std::fabs(lam - sol.mu_partial(J)));
            const double dev = std::fabs(lam - sol.mu_total());
            lr.push_back(std::log(r));
            ldev.push_back(std::log(std::max(dev, 1e-300)));

            json jl;
            jl["family"] = fam;
            jl["r"] = r;
            jl["k"] = mode.k;
            jl["m"] = mode.m;
            jl["mu0"] = sol.mu0;
            jl["mu_terms"] = sol.mu_terms;
            jl["a_polys"] = sol.a_polys;
            jl["b_polys"] = sol.b_polys;
            ladders.push_back(jl);

            double expo = 0.0;
            if (step + 1 == cfg.r_values.size() && lr.size() >= 2) {
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                for (size_t i = 0; i < lr.size(); ++i) {
                    sx += lr[i]; sy += ldev[i]; sxx += lr[i] * lr[i]; sxy += lr[i] * ldev[i];
                }
                const double n = double(lr.size());
                expo = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            }
            csv += "," + fmt(rsq) + "," + fmt(expo) + "\n";
        }
    }
    const std::string path = cfg.output_dir + "/perturb/comparison.csv";
    man.outputs.emplace_back(path, write_file(path, csv));
    const std::string jpath = cfg.output_dir + "/perturb/mu_ladders.json";
    man.outputs.emplace_back(jpath, write_file(jpath, ladders.dump(2) + "\n"));
    man.timings.emplace_back("perturb", t.seconds());
    return 0;
}

// --------------------------------------------------------------------- eta
json eta_report_json(const EtaFlowReport& rep) {
    json j;
    j["r"] = rep.r;
    j["eta_dot"] = {{"ck", rep.eta_dot_ck}, {"hat", rep.eta_dot_hat}};
    j["eta_ddot"] = {{"ck", rep.eta_ddot_ck}, {"hat", rep.eta_ddot_hat}};
    if (rep.flow) {
        j["flow"] = *rep.flow;
        j["predicted_flow"] = *rep.predicted_flow;
        j["residual"] = *rep.flow_residual;
    } else {
        j["flow"] = nullptr;
        j["predicted_flow"] = nullptr;
        j["residual"] = nullptr;
    }
    j["vw_max_dev"] = rep.vw_max_dev;
    j["vw_fj"] = rep.vw_fj;
    j["partition"] = json::array();
    for (const auto& p : rep.partition)
        j["partition"].push_back({{"j", p.j}, {"nu", p.nu}, {"gap", p.gap}});
    j["index_counts"] = json::array();
    for (const auto& ic : rep.index_counts)
        j["index_counts"].push_back({{"j", ic.j}, {"ck", ic.ck_count}, {"hat", ic.hat_count}});
    return j;
}

EtaFlowReport compute_eta_report(const ExperimentConfig& cfg, double r) {
    const GlobalConstants gc = constants_for(cfg, r);
    ProfileSet ps = build_profiles(gc);
    SweepOpts so;
    so.N = cfg.grid_N;
    so.preset = cfg.preset();
    so.c_margin = cfg.c_margin;
    so.exec = exec_of(cfg);
    SpectrumLedger ck = mode_sweep(ps, r, so);
    const double w = window_radius(cfg.preset(), r);
    SpectrumLedger hat_full = hat_spectrum(gc, w, HatMultiplicity::full_kernel);
    SpectrumLedger hat_vr = hat_spectrum(gc, w, HatMultiplicity::vr_filtered);
    SpectrumLedger ck_vr = filter_ck_vr(ck, cfg.V);

    EtaFlowReport rep;
    rep.r = r;
    rep.eta_dot_ck = eta_dot(ck_vr);
    rep.eta_ddot_ck = eta_ddot(ck_vr);
    rep.eta_dot_hat = eta_dot(hat_vr);
    rep.eta_ddot_hat = eta_ddot(hat_vr);
    VWReport vw = vafa_witten_check(hat_full, gc);
    rep.vw_max_dev = vw.max_abs_deviation;
    rep.vw_fj = vw.fj_realized;
    rep.partition = build_partition({&ck, &hat_full}, r);
    rep.index_counts = index_sets(ck, hat_full, rep.partition, cfg.V, r);
    if (cfg.eta_include_flow) {
        SpectralFlowOpts fo;
        fo.r_min = cfg.sflow_r_min;
        fo.grid_step = cfg.sflow_step;
        fo.N = cfg.sflow_N;
        fo.straddle_band = cfg.sflow_straddle_band;
        fo.exec = exec_of(cfg);
        SpectralFlowResult sf = spectral_flow(ps, r, fo);
        rep.flow = sf.flow;
        rep.predicted_flow = sf.predicted;
        rep.flow_residual = double(sf.flow) - sf.predicted;
    }
    return rep;
}

int cmd_eta(const ExperimentConfig& cfg, RunManifest& man) {
    std::string ts = "r,eta_dot_ck,eta_ddot_ck,eta_dot_hat,eta_ddot_hat,vw_fj,vw_max_dev\n";
    for (double r : cfg.r_values) {
        Timer t;
        EtaFlowReport rep = compute_eta_report(cfg, r);
        const std::string path = cfg.output_dir + "/eta/eta_r" + rtag(r) + ".json";
        man.outputs.emplace_back(path, write_file(path, eta_report_json(rep).dump(2) + "\n"));
        ts += fmt(rep.r) + "," + fmt(rep.eta_dot_ck) + "," + fmt(rep.eta_ddot_ck) + "," +
              fmt(rep.eta_dot_hat) + "," + fmt(rep.eta_ddot_hat) + "," +
              std::to_string(rep.vw_fj) + "," + fmt(rep.vw_max_dev) + "\n";
        man.timings.emplace_back("eta r=" + rtag(r), t.seconds());
    }
    const std::string tpath = cfg.output_dir + "/eta/timeseries.csv";
    man.outputs.emplace_back(tpath, write_file(tpath, ts));
    return 0;
}

// ------------------------------------------------------------------- sflow
int cmd_sflow(const ExperimentConfig& cfg, RunManifest& man) {
    std::string csv =
        "R,flow,predicted,residual,residual_over_R32,gamma_count,straddle,pre_sweep,negative\n";
    for (double R : cfg.r_values) {
        Timer t;
        const GlobalConstants gc = constants_for(cfg, R);
        ProfileSet ps = build_profiles(gc);
        SpectralFlowOpts fo;
        fo.r_min = cfg.sflow_r_min;
        fo.grid_step = cfg.sflow_step;
        fo.N = cfg.sflow_N;
        fo.straddle_band = cfg.sflow_straddle_band;
        fo.exec = exec_of(cfg);
        SpectralFlowResult sf = spectral_flow(ps, R, fo);
        const double resid = double(sf.flow) - sf.predicted;
        csv += fmt(R) + "," + std::to_string(sf.flow) + "," + fmt(sf.predicted) + "," +
               fmt(resid) + "," + fmt(std::fabs(resid) / std::pow(R, 1.5)) + "," +
               std::to_string(sf.gamma_count) + "," + std::to_string(sf.straddle_count) + "," +
               std::to_string(sf.pre_sweep) + "," + std::to_string(sf.negative_crossings) + "\n";
        man.timings.emplace_back("sflow R=" + rtag(R), t.seconds());
        log_info("sflow R=" + rtag(R) + ": flow=" + std::to_string(sf.flow) +
                 " predicted=" + fmt(sf.predicted));
    }
    const std::string path = cfg.output_dir + "/sflow/sweep.csv";
    man.outputs.emplace_back(path, write_file(path, csv));
    return 0;
}

// ------------------------------------------------------------------ report
int cmd_report(const ExperimentConfig& cfg, RunManifest& man) {
    json rpt;
    rpt["tool_version"] = kToolVersion;
    rpt["config"] = cfg.dump();

    Timer t_all;
    {
        const GlobalConstants gc = constants_for(cfg, cfg.r_values.front());
        ProfileSet ps = build_profiles(gc);
        const ProfileScan sc = scan_profiles(ps);
        rpt["profiles"] = {{"scan_ok", sc.ok},
                           {"contact_order", ps.contact_order},
                           {"flat_extension", ps.flat_extension},
                           {"conformal_volume", conformal_volume(ps)}};
    }
    rpt["eta"] = json::array();
    for (double r : cfg.r_values) {
        EtaFlowReport rep = compute_eta_report(cfg, r);
        rpt["eta"].push_back(eta_report_json(rep));
    }
    rpt["wall_seconds"] = t_all.seconds();

    std::string summary = "speclab consolidated report\n";
    summary += "===========================\n";
    for (const auto& e : rpt["eta"]) {
        summary += "r=" + e["r"].dump() + "  eta_dot(ck)=" + e["eta_dot"]["ck"].dump() +
                   "  eta_ddot(ck)=" + e["eta_ddot"]["ck"].dump() +
                   "  eta_dot(hat)=" + e["eta_dot"]["hat"].dump() +
                   "  eta_ddot(hat)=" + e["eta_ddot"]["hat"].dump() +
                   "  vw_fj=" + e["vw_fj"].dump() + "  vw_max_dev=" + e["vw_max_dev"].dump() +
                   "\n";
    }
    summary += "\nThe acceptance binary prints the per-criterion pass/fail table; this file "
               "carries the raw quantities.\n";

    const std::string jpath = cfg.output_dir + "/report/report.json";
    man.outputs.emplace_back(jpath, write_file(jpath, rpt.dump(2) + "\n"));
    const std::string spath = cfg.output_dir + "/report/summary.txt";
    man.outputs.emplace_back(spath, write_file(spath, summary));
    man.timings.emplace_back("report", t_all.seconds());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (const char* lv = std::getenv("SPECLAB_LOG")) {
        const std::string s = lv;
        if (s == "quiet") g_log_level = 0;
        else if (s == "debug") g_log_level = 2;
    }

    CLI::App app{"spectral laboratory for the two local Dirac models"};
    app.require_subcommand(1);
    app.fallthrough();    // global flags may follow the subcommand

    std::string config_path, out_dir;
    double r_override = 0.0;
    int jobs = -1;
    app.add_option("--config", config_path, "configuration file");
    app.add_option("--r", r_override, "override: run a single r value");
    app.add_option("--out", out_dir, "override: output directory");
    app.add_option("--jobs", jobs, "override: worker count (1 = serial)");

    bool print_defaults = false;
    auto* sub_profiles = app.add_subcommand("profiles", "profile tables and validation");
    sub_profiles->add_flag("--print-defaults", print_defaults, "dump the default config");
    auto* sub_ck = app.add_subcommand("ck", "open-book ledger sweep");
    auto* sub_hat = app.add_subcommand("hat", "mapping-torus ledger and kernel diagnostics");
    auto* sub_perturb = app.add_subcommand("perturb", "perturbative vs numeric comparison");
    auto* sub_eta = app.add_subcommand("eta", "eta functions, partitions, index counts");
    auto* sub_sflow = app.add_subcommand("sflow", "spectral flow sweep");
    auto* sub_report = app.add_subcommand("report", "consolidated report");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
        if (r_override > 0.0) cfg.r_values = {r_override};
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (jobs >= 0) cfg.parallelism = jobs;
        cfg.validate();

        if (print_defaults) {
            std::fputs(ExperimentConfig().dump().c_str(), stdout);
            return 0;
        }

        RunManifest man;
        man.config_digest = digest_hex(cfg.dump());
        int rc = 0;
        std::string cmd;
        try {
            if (sub_profiles->parsed()) { cmd = "profiles"; rc = cmd_profiles(cfg, man); }
            else if (sub_ck->parsed()) { cmd = "ck"; rc = cmd_ck(cfg, man); }
            else if (sub_hat->parsed()) { cmd = "hat"; rc = cmd_hat(cfg, man); }
            else if (sub_perturb->parsed()) { cmd = "perturb"; rc = cmd_perturb(cfg, man); }
            else if (sub_eta->parsed()) { cmd = "eta"; rc = cmd_eta(cfg, man); }
            else if (sub_sflow->parsed()) { cmd = "sflow"; rc = cmd_sflow(cfg, man); }
            else if (sub_report->parsed()) { cmd = "report"; rc = cmd_report(cfg, man); }
            man.command = cmd;
        } catch (const SpeclabError&) {
            man.command = cmd;
            man.status = "failed";
            man.failed_stage = cmd;
            write_file(cfg.output_dir + "/" + cmd + "/manifest.json", man.to_json());
            throw;
        }
        write_file(cfg.output_dir + "/" + cmd + "/manifest.json", man.to_json());
        log_debug("manifest written");
        return rc;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const SpeclabError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}
