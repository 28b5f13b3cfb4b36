// tofcs: simulate, calibrate, reconstruct and evaluate sparse-recovery
// depth pipelines for multipath-corrupted time-of-flight captures.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tofcs/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

tofcs::ExperimentConfig load_config_or_default(const std::string& path, std::uint64_t seed,
                                               bool seed_given) {
    tofcs::ExperimentConfig cfg;
    if (!path.empty()) cfg = tofcs::load_config(path);
    if (seed_given) {
        cfg.seed = seed;
        cfg.solver.seed = seed;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressed-sensing multipath suppression for iToF depth imaging"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    std::string config_path;
    std::string out_dir = "out";
    std::string method = "cc_omp";
    std::string matrix_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 1;

    app.add_option("--config", config_path, "Experiment config JSON")->expected(1);
    app.add_option("--seed", seed, "Override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--method", method, "Solver: cc_omp | omp_full | cosamp | fista | naive");
    app.add_option("--threads", threads, "Worker threads for reconstruction");

    auto* simulate = app.add_subcommand("simulate", "Render a scene to raw tap rasters");
    auto* calibrate =
        app.add_subcommand("calibrate", "Emulate the scan calibration and write the matrix");
    bool calib_csv = false;
    calibrate->add_flag("--csv", calib_csv, "Also write the debug CSV export");
    auto* reconstruct =
        app.add_subcommand("reconstruct", "Recover a depth map from simulated rasters");
    reconstruct->add_option("--matrix", matrix_path, "Use a calibrated matrix file");
    auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
    auto* info = app.add_subcommand("matrix-info", "Print coherence and cluster sizes");
    info->add_option("--matrix", matrix_path, "Inspect a matrix file instead of building one");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        tofcs::ExperimentConfig cfg = load_config_or_default(config_path, seed, seed_given);

        if (simulate->parsed()) {
            tofcs::run_simulate(cfg, out_dir);
            std::cout << "simulated scene '" << cfg.scene.type << "' -> " << out_dir << "\n";
        } else if (calibrate->parsed()) {
            tofcs::run_calibrate(cfg, out_dir, calib_csv);
            std::cout << "calibrated matrix -> " << out_dir << "/matrix.bin\n";
        } else if (reconstruct->parsed()) {
            const tofcs::SolverMethod m = tofcs::solver_method_from_string(method);
            std::optional<std::string> matrix;
            if (!matrix_path.empty()) matrix = matrix_path;
            tofcs::run_reconstruct(cfg, out_dir, m, threads, matrix);
            std::cout << "reconstructed with " << method << " -> " << out_dir << "\n";
        } else if (evaluate->parsed()) {
            tofcs::run_evaluate(cfg, out_dir, out_dir);
            std::cout << "metrics -> " << out_dir << "/metrics_report.json\n";
        } else if (info->parsed()) {
            std::optional<std::string> matrix;
            if (!matrix_path.empty()) matrix = matrix_path;
            std::cout << tofcs::matrix_info(cfg, matrix);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
