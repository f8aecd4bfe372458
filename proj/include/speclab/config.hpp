#pragma once
#include "speclab/ledger.hpp"

#include <string>
#include <vector>

namespace speclab {

// Flat INI-style configuration with sections. Every field has an embedded
// default; round-trips losslessly through dump/parse.
struct ExperimentConfig {
    // [global]
    double V = 2.0;
    double delta = 0.005;
    std::vector<double> r_values = {100.0, 200.0, 400.0};
    int grid_N = 1600;
    std::string window_preset = "prop53";
    double c_margin = 10.0;
    std::string output_dir = "out";
    int parallelism = 0;

    // [profiles]
    int table_points = 2000;

    // [hat]
    int hat_N = 4000;
    int hat_check_N = 8000;
    std::vector<long> hat_k_offsets = {-2, -1, 0, 1, 2};  // around floor(rV/2)

    // [perturb]
    int perturb_order = 6;
    int perturb_modes = 20;
    int perturb_N = 3000;

    // [sflow]
    double sflow_r_min = 20.0;
    double sflow_step = 1.0;
    int sflow_N = 600;
    double sflow_straddle_band = 3.0;

    // [eta]
    bool eta_include_flow = false;

    WindowPreset preset() const;
    void validate() const;

    std::string dump() const;
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig load(const std::string& path);
};

} // namespace speclab
