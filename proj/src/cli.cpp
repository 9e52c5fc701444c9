// CLI front end: one subcommand per experiment, config file plus flag
// overrides, exit-status contract (0 pass, 1 check failure, 2 config/IO).
#include <CLI11.hpp>
#include <iostream>

#include "folia/experiments.hpp"
#include "folia/report.hpp"

namespace folia {

namespace {

void print_result(const ExperimentResult& result) {
    for (const auto& c : result.checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << result.experiment
                  << "/" << result.model_id << ": " << c.name << " = "
                  << format_double(c.value) << " (" << c.comparator << " "
                  << format_double(c.threshold) << ")\n";
    }
    std::cout << (result.pass ? "OK" : "FAILED") << ": " << result.experiment
              << " on " << result.model_id << ", seed " << result.seed << "\n";
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"folia: numerical toolkit for Riemannian foliations"};
    app.require_subcommand(1);

    struct Flags {
        std::string model, config, out;
        std::uint64_t seed = 0;
        double tol = 0.0, tmax = 0.0;
        int samples = 0, grid = 0;
        std::vector<double> R;
        bool seed_set = false;
    };

    std::vector<std::pair<CLI::App*, std::shared_ptr<Flags>>> subs;
    for (const auto& name : experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " suite");
        auto flags = std::make_shared<Flags>();
        sub->add_option("--model", flags->model, "model id");
        sub->add_option("--config", flags->config, "JSON config file");
        sub->add_option("--out", flags->out, "output directory");
        sub->add_option("--seed", flags->seed, "top-level seed");
        sub->add_option("--tol", flags->tol, "tolerance override");
        sub->add_option("--samples", flags->samples, "sample count");
        sub->add_option("--tmax", flags->tmax, "scan horizon");
        sub->add_option("--grid", flags->grid, "grid size (spectrum)");
        sub->add_option("--R", flags->R, "ball radii (spectrum)");
        subs.emplace_back(sub, flags);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        for (auto& [sub, flags] : subs) {
            if (!sub->parsed()) continue;
            ExperimentConfig cfg;
            if (!flags->config.empty()) cfg = load_config(flags->config);
            cfg.experiment = sub->get_name();
            if (sub->count("--model")) cfg.model_id = flags->model;
            if (sub->count("--out")) cfg.out_dir = flags->out;
            if (sub->count("--seed")) cfg.seed = flags->seed;
            if (sub->count("--tol")) cfg.tol = flags->tol;
            if (sub->count("--samples")) cfg.samples = flags->samples;
            if (sub->count("--tmax")) cfg.t_max = flags->tmax;
            if (sub->count("--grid")) cfg.grid = flags->grid;
            if (sub->count("--R")) cfg.R_list = flags->R;

            const ExperimentResult result = run_experiment(cfg);
            print_result(result);
            return result.pass ? 0 : 1;
        }
        std::cerr << "no experiment selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownModel& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const BadParameters& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "experiment failed: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace folia
