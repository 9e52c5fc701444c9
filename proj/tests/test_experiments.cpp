#include <doctest.h>

#include <fstream>
#include <sstream>

#include "folia/experiments.hpp"
#include "folia/report.hpp"

using namespace folia;

namespace {
std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}
}  // namespace

TEST_CASE("experiment runs are deterministic: byte-identical outputs") {
    const std::filesystem::path dir_a = "/tmp/folia_test_det_a";
    const std::filesystem::path dir_b = "/tmp/folia_test_det_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);

    ExperimentConfig cfg;
    cfg.experiment = "check-tensors";
    cfg.model_id = "heisenberg";
    cfg.seed = 99;
    cfg.samples = 40;

    cfg.out_dir = dir_a;
    const ExperimentResult ra = run_experiment(cfg);
    cfg.out_dir = dir_b;
    const ExperimentResult rb = run_experiment(cfg);
    CHECK(ra.pass);
    CHECK(rb.pass);
    REQUIRE(ra.files.size() == rb.files.size());
    for (std::size_t i = 0; i < ra.files.size(); ++i) {
        const std::string a = slurp(ra.files[i]);
        const std::string b = slurp(rb.files[i]);
        CHECK(!a.empty());
        CHECK(a == b);
    }
    // summary JSON as well
    CHECK(slurp(dir_a / "check-tensors_heisenberg_summary.json") ==
          slurp(dir_b / "check-tensors_heisenberg_summary.json"));

    // a different seed changes the sampled rows
    const std::filesystem::path dir_c = "/tmp/folia_test_det_c";
    std::filesystem::remove_all(dir_c);
    cfg.seed = 100;
    cfg.out_dir = dir_c;
    const ExperimentResult rc = run_experiment(cfg);
    CHECK(rc.pass);
    CHECK(slurp(ra.files[0]) != slurp(rc.files[0]));
}

TEST_CASE("seed is recorded in every output file") {
    const std::filesystem::path dir = "/tmp/folia_test_seedrec";
    std::filesystem::remove_all(dir);
    ExperimentConfig cfg;
    cfg.experiment = "laplacian-compare";
    cfg.model_id = "euclidean_product";
    cfg.seed = 4242;
    cfg.samples = 4;
    cfg.out_dir = dir;
    const ExperimentResult res = run_experiment(cfg);
    for (const auto& f : res.files) {
        if (f.extension() == ".dat") continue;  // plot data carries no seed
        const std::string body = slurp(f);
        INFO(f.string());
        CHECK(body.find("4242") != std::string::npos);
    }
    CHECK(slurp(dir / "laplacian-compare_euclidean_product_summary.json")
              .find("4242") != std::string::npos);
}

TEST_CASE("config loading validates keys") {
    const std::filesystem::path cfg_path = "/tmp/folia_test_cfg.json";
    {
        std::ofstream os(cfg_path);
        os << R"({"experiment": "spectrum", "model": "hyperbolic_product",
                  "params": {"K": 1.0}, "seed": 7, "R": [10, 20],
                  "grid": 2000, "out": "/tmp/folia_cfg_out"})";
    }
    const ExperimentConfig cfg = load_config(cfg_path);
    CHECK(cfg.experiment == "spectrum");
    CHECK(cfg.model_id == "hyperbolic_product");
    CHECK(cfg.seed == 7);
    CHECK(cfg.R_list.size() == 2);
    CHECK(cfg.grid == 2000);

    {
        std::ofstream os(cfg_path);
        os << R"({"experiment": "spectrum", "typo_key": 1})";
    }
    CHECK_THROWS_AS(load_config(cfg_path), ConfigError);

    {
        std::ofstream os(cfg_path);
        os << "{not json";
    }
    CHECK_THROWS_AS(load_config(cfg_path), ConfigError);
}

TEST_CASE("unknown experiment and model are configuration errors") {
    ExperimentConfig cfg;
    cfg.experiment = "warp-drive";
    CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
    cfg.experiment = "geodesic";
    cfg.model_id = "warp-core";
    CHECK_THROWS_AS(run_experiment(cfg), UnknownModel);
}

TEST_CASE("cli exit-status contract") {
    const auto run = [](std::vector<std::string> args) {
        std::vector<char*> argv;
        args.insert(args.begin(), "folia_cli");
        for (auto& a : args) argv.push_back(a.data());
        return run_cli(static_cast<int>(argv.size()), argv.data());
    };
    CHECK(run({"geodesic", "--model", "euclidean_product", "--samples", "2",
               "--out", "/tmp/folia_cli_out"}) == 0);
    CHECK(run({"geodesic", "--model", "no_such_model", "--out",
               "/tmp/folia_cli_out"}) == 2);
    CHECK(run({"no-such-experiment"}) == 2);
    // hessian needs d_H >= 2: configuration error on sol
    CHECK(run({"hessian", "--model", "sol", "--out", "/tmp/folia_cli_out"}) ==
          2);
}

TEST_CASE("status-2 runs leave no partial output files") {
    const std::filesystem::path dir = "/tmp/folia_test_nopartial";
    std::filesystem::remove_all(dir);
    ExperimentConfig cfg;
    cfg.experiment = "geodesic";
    cfg.model_id = "hyperbolic_product";
    cfg.model_params["K"] = -3.0;  // rejected by the model builder
    cfg.out_dir = dir;
    CHECK_THROWS_AS(run_experiment(cfg), BadParameters);
    CHECK(!std::filesystem::exists(dir));
}

TEST_CASE("cli end-to-end with a config file") {
    const std::filesystem::path cfg_path = "/tmp/folia_cli_cfg.json";
    const std::filesystem::path out = "/tmp/folia_cli_cfg_out";
    std::filesystem::remove_all(out);
    {
        std::ofstream os(cfg_path);
        os << R"({"model": "heisenberg", "seed": 31415, "samples": 30,
                  "out": ")" << out.string() << R"("})";
    }
    const auto run = [](std::vector<std::string> args) {
        std::vector<char*> argv;
        args.insert(args.begin(), "folia_cli");
        for (auto& a : args) argv.push_back(a.data());
        return run_cli(static_cast<int>(argv.size()), argv.data());
    };
    CHECK(run({"check-tensors", "--config", cfg_path.string()}) == 0);
    CHECK(std::filesystem::exists(out / "check-tensors_heisenberg_summary.json"));
    const std::string summary =
        slurp(out / "check-tensors_heisenberg_summary.json");
    CHECK(summary.find("31415") != std::string::npos);
    CHECK(summary.find("\"pass\": true") != std::string::npos);
    // flag overrides beat the file
    CHECK(run({"check-tensors", "--config", cfg_path.string(), "--model",
               "nonexistent"}) == 2);
}

TEST_CASE("csv writer is RFC-4180 quoted and stable") {
    CsvWriter csv({"a", "b,comma", "c"});
    csv.row({std::string("plain"), 1.5, static_cast<long long>(7)});
    csv.row({std::string("quote\"inside"), 0.1, static_cast<long long>(-2)});
    const std::string out = csv.str();
    CHECK(out.find("\"b,comma\"") != std::string::npos);
    CHECK(out.find("\"quote\"\"inside\"") != std::string::npos);
    CHECK(out.find("\r\n") != std::string::npos);
    CHECK(out.find("1.5") != std::string::npos);
}
