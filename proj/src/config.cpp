#include "speclab/config.hpp"
#include "speclab/errors.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace speclab {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        if constexpr (std::is_same_v<T, double>) s += fmt(v[i]);
        else s += std::to_string(v[i]);
    }
    return s;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<long> parse_longs(const std::string& s) {
    std::vector<long> out;
    for (double v : parse_doubles(s)) out.push_back(long(v));
    return out;
}

} // namespace

WindowPreset ExperimentConfig::preset() const { return window_preset_from_string(window_preset); }

void ExperimentConfig::validate() const {
    if (!(V > 0.0)) throw ConfigError("config: V must be positive");
    if (!(delta > 0.0 && 50.0 * delta < 0.5)) throw ConfigError("config: need 0 < 50*delta < 1/2");
    if (r_values.empty()) throw ConfigError("config: r_values must be non-empty");
    for (double r : r_values)
        if (!(r >= 20.0)) throw ConfigError("config: every r must be >= 20");
    if (grid_N < 200) throw ConfigError("config: grid_N must be >= 200");
    if (hat_N < 200 || hat_check_N < 200) throw ConfigError("config: hat grid too small");
    if (perturb_order < 1 || perturb_order > 6)
        throw ConfigError("config: perturb_order must be in 1..6");
    if (perturb_N < 200) throw ConfigError("config: perturb_N must be >= 200");
    if (sflow_r_min < 20.0) throw ConfigError("config: sflow_r_min must be >= 20");
    if (!(sflow_step > 0.0 && sflow_step <= 1.0))
        throw ConfigError("config: sflow_step must be in (0, 1]");
    if (sflow_N < 200) throw ConfigError("config: sflow_N must be >= 200");
    if (parallelism < 0) throw ConfigError("config: parallelism must be >= 0");
    window_preset_from_string(window_preset);
}

std::string ExperimentConfig::dump() const {
    std::string s;
    s += "[global]\n";
    s += "V = " + fmt(V) + "\n";
    s += "delta = " + fmt(delta) + "\n";
    s += "r_values = " + join(r_values) + "\n";
    s += "grid_N = " + std::to_string(grid_N) + "\n";
    s += "window_preset = " + window_preset + "\n";
    s += "c_margin = " + fmt(c_margin) + "\n";
    s += "output_dir = " + output_dir + "\n";
    s += "parallelism = " + std::to_string(parallelism) + "\n";
    s += "\n[profiles]\n";
    s += "table_points = " + std::to_string(table_points) + "\n";
    s += "\n[hat]\n";
    s += "hat_N = " + std::to_string(hat_N) + "\n";
    s += "hat_check_N = " + std::to_string(hat_check_N) + "\n";
    s += "hat_k_offsets = " + join(hat_k_offsets) + "\n";
    s += "\n[perturb]\n";
    s += "perturb_order = " + std::to_string(perturb_order) + "\n";
    s += "perturb_modes = " + std::to_string(perturb_modes) + "\n";
    s += "perturb_N = " + std::to_string(perturb_N) + "\n";
    s += "\n[sflow]\n";
    s += "sflow_r_min = " + fmt(sflow_r_min) + "\n";
    s += "sflow_step = " + fmt(sflow_step) + "\n";
    s += "sflow_N = " + std::to_string(sflow_N) + "\n";
    s += "sflow_straddle_band = " + fmt(sflow_straddle_band) + "\n";
    s += "\n[eta]\n";
    s += std::string("eta_include_flow = ") + (eta_include_flow ? "true" : "false") + "\n";
    return s;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig c;
    std::stringstream ss(text);
    std::string line;
    std::map<std::string, std::string> kv;
    while (std::getline(ss, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;   // sections are cosmetic
        const size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config: bad line: " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto has = [&](const char* k) { return kv.count(k) > 0; };
    if (has("V")) c.V = std::stod(kv["V"]);
    if (has("delta")) c.delta = std::stod(kv["delta"]);
    if (has("r_values")) c.r_values = parse_doubles(kv["r_values"]);
    if (has("grid_N")) c.grid_N = std::stoi(kv["grid_N"]);
    if (has("window_preset")) c.window_preset = kv["window_preset"];
    if (has("c_margin")) c.c_margin = std::stod(kv["c_margin"]);
    if (has("output_dir")) c.output_dir = kv["output_dir"];
    if (has("parallelism")) c.parallelism = std::stoi(kv["parallelism"]);
    if (has("table_points")) c.table_points = std::stoi(kv["table_points"]);
    if (has("hat_N")) c.hat_N = std::stoi(kv["hat_N"]);
    if (has("hat_check_N")) c.hat_check_N = std::stoi(kv["hat_check_N"]);
    if (has("hat_k_offsets")) c.hat_k_offsets = parse_longs(kv["hat_k_offsets"]);
    if (has("perturb_order")) c.perturb_order = std::stoi(kv["perturb_order"]);
    if (has("perturb_modes")) c.perturb_modes = std::stoi(kv["perturb_modes"]);
    if (has("perturb_N")) c.perturb_N = std::stoi(kv["perturb_N"]);
    if (has("sflow_r_min")) c.sflow_r_min = std::stod(kv["sflow_r_min"]);
    if (has("sflow_step")) c.sflow_step = std::stod(kv["sflow_step"]);
    if (has("sflow_N")) c.sflow_N = std::stoi(kv["sflow_N"]);
    if (has("sflow_straddle_band")) c.sflow_straddle_band = std::stod(kv["sflow_straddle_band"]);
    if (has("eta_include_flow")) c.eta_include_flow = (kv["eta_include_flow"] == "true");
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

} // namespace speclab
