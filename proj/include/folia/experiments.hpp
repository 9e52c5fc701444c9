// folia: batch experiment driver. Each experiment runs a named suite over a
// model, writes CSV / JSON / plot-data files atomically, and reports a
// pass/fail verdict per check.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "folia/models.hpp"

namespace folia {

struct ExperimentConfig {
    std::string experiment;  // check-tensors, geodesic, jacobi, focal,
                             // hessian, laplacian-compare, poincare,
                             // spectrum, verify-cartan
    std::string model_id = "hyperbolic_product";
    ModelParams model_params;
    std::uint64_t seed = 12345;
    std::filesystem::path out_dir = "out";
    int samples = 0;        // 0 = experiment default
    double t_max = 0.0;     // 0 = experiment default
    double tol = 0.0;       // 0 = experiment default
    std::vector<double> R_list;  // spectrum radii; empty = {10, 20, 40}
    int grid = 4000;
    bool write_files = true;
};

struct CheckRow {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string comparator;  // "<", ">", "~" (absolute deviation below)
    bool pass = false;
};

struct ExperimentResult {
    std::string experiment;
    std::string model_id;
    std::uint64_t seed = 0;
    bool pass = true;
    std::vector<CheckRow> checks;
    std::vector<std::filesystem::path> files;

    void add(const std::string& name, double value, double threshold,
             const std::string& comparator);
};

// Throws ConfigError / UnknownModel / BadParameters on bad configuration.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Parse a JSON config file; unknown keys are errors.
ExperimentConfig load_config(const std::filesystem::path& path);

// Known experiment names, in canonical order.
const std::vector<std::string>& experiment_names();

// Full CLI entry point (argument parsing, dispatch, exit-status contract:
// 0 all checks pass, 1 check failure, 2 configuration or I/O error).
int run_cli(int argc, char** argv);

}  // namespace folia
