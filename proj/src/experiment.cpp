#include "tofcs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <thread>

#include "tofcs/geometry.hpp"

namespace tofcs {

namespace fs = std::filesystem;
using nlohmann::json;

NoiseModel ExperimentConfig::noise_model() const {
    NoiseModel noise;
    noise.read_noise_sigma =
        read_noise_sigma < 0.0 ? default_read_noise_sigma(plan) : read_noise_sigma;
    noise.shot_noise = shot_noise;
    noise.dark_offset = dark_offset;
    noise.seed = seed;
    return noise;
}

json config_to_json(const ExperimentConfig& cfg) {
    json scene{{"type", cfg.scene.type}};
    if (cfg.scene.type == "two_path") {
        scene["primary_depth_mm"] = cfg.scene.primary_depth_mm;
        scene["separation_mm"] = cfg.scene.separation_mm;
        scene["ratio"] = cfg.scene.ratio;
    } else if (cfg.scene.type == "corner") {
        scene["corner_depth_mm"] = cfg.scene.corner_depth_mm;
        scene["bounce_ratio"] = cfg.scene.bounce_ratio;
    } else if (cfg.scene.type == "glass") {
        scene["glass_depth_mm"] = cfg.scene.glass_depth_mm;
        scene["wall_depth_mm"] = cfg.scene.wall_depth_mm;
        scene["wall_ratio"] = cfg.scene.wall_ratio;
    }
    return json{{"grid", grid_to_json(cfg.grid)},
                {"plan", plan_to_json(cfg.plan)},
                {"intrinsics",
                 {{"fx", cfg.intrinsics.fx},
                  {"fy", cfg.intrinsics.fy},
                  {"cx", cfg.intrinsics.cx},
                  {"cy", cfg.intrinsics.cy},
                  {"width", cfg.intrinsics.width},
                  {"height", cfg.intrinsics.height}}},
                {"scene", scene},
                {"noise",
                 {{"read_noise_sigma", cfg.read_noise_sigma},
                  {"shot_noise", cfg.shot_noise},
                  {"dark_offset", cfg.dark_offset}}},
                {"n_frames", cfg.n_frames},
                {"solver",
                 {{"method", to_string(cfg.solver.method)},
                  {"k_clusters", cfg.solver.k_clusters},
                  {"k_sparse", cfg.solver.k_sparse},
                  {"residual_tol", cfg.solver.residual_tol},
                  {"k_top", cfg.solver.k_top},
                  {"window", cfg.solver.window},
                  {"neighbor_margin", cfg.solver.neighbor_margin},
                  {"lambda", cfg.solver.lambda},
                  {"max_iterations", cfg.solver.max_iterations}}},
                {"seed", cfg.seed}};
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (j.contains("grid")) cfg.grid = grid_from_json(j.at("grid"));
    if (j.contains("plan")) cfg.plan = plan_from_json(j.at("plan"));
    if (j.contains("intrinsics")) {
        const auto& in = j.at("intrinsics");
        cfg.intrinsics.fx = in.at("fx").get<double>();
        cfg.intrinsics.fy = in.at("fy").get<double>();
        cfg.intrinsics.cx = in.at("cx").get<double>();
        cfg.intrinsics.cy = in.at("cy").get<double>();
        cfg.intrinsics.width = in.at("width").get<int>();
        cfg.intrinsics.height = in.at("height").get<int>();
        cfg.intrinsics.validate();
    }
    if (j.contains("scene")) {
        const auto& sc = j.at("scene");
        cfg.scene.type = sc.at("type").get<std::string>();
        cfg.scene.primary_depth_mm = sc.value("primary_depth_mm", cfg.scene.primary_depth_mm);
        cfg.scene.separation_mm = sc.value("separation_mm", cfg.scene.separation_mm);
        cfg.scene.ratio = sc.value("ratio", cfg.scene.ratio);
        cfg.scene.corner_depth_mm = sc.value("corner_depth_mm", cfg.scene.corner_depth_mm);
        cfg.scene.bounce_ratio = sc.value("bounce_ratio", cfg.scene.bounce_ratio);
        cfg.scene.glass_depth_mm = sc.value("glass_depth_mm", cfg.scene.glass_depth_mm);
        cfg.scene.wall_depth_mm = sc.value("wall_depth_mm", cfg.scene.wall_depth_mm);
        cfg.scene.wall_ratio = sc.value("wall_ratio", cfg.scene.wall_ratio);
    }
    if (j.contains("noise")) {
        const auto& noise = j.at("noise");
        cfg.read_noise_sigma = noise.value("read_noise_sigma", cfg.read_noise_sigma);
        cfg.shot_noise = noise.value("shot_noise", cfg.shot_noise);
        cfg.dark_offset = noise.value("dark_offset", cfg.dark_offset);
    }
    cfg.n_frames = j.value("n_frames", cfg.n_frames);
    if (j.contains("solver")) {
        const auto& solver = j.at("solver");
        if (solver.contains("method"))
            cfg.solver.method = solver_method_from_string(solver.at("method").get<std::string>());
        cfg.solver.k_clusters = solver.value("k_clusters", cfg.solver.k_clusters);
        cfg.solver.k_sparse = solver.value("k_sparse", cfg.solver.k_sparse);
        cfg.solver.residual_tol = solver.value("residual_tol", cfg.solver.residual_tol);
        cfg.solver.k_top = solver.value("k_top", cfg.solver.k_top);
        cfg.solver.window = solver.value("window", cfg.solver.window);
        cfg.solver.neighbor_margin = solver.value("neighbor_margin", cfg.solver.neighbor_margin);
        cfg.solver.lambda = solver.value("lambda", cfg.solver.lambda);
        cfg.solver.max_iterations = solver.value("max_iterations", cfg.solver.max_iterations);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.solver.seed = cfg.seed;
    cfg.grid.validate();
    cfg.plan.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return config_from_json(json::parse(read_file(path)));
}

std::string config_hash(const ExperimentConfig& cfg) {
    return sha256_hex(config_to_json(cfg).dump());
}

MultipathScene build_scene(const ExperimentConfig& cfg) {
    const auto& sc = cfg.scene;
    if (sc.type == "two_path")
        return make_two_path_scene(cfg.grid, sc.primary_depth_mm, sc.separation_mm, sc.ratio,
                                   cfg.intrinsics.width, cfg.intrinsics.height);
    if (sc.type == "corner")
        return make_corner_scene(cfg.grid, cfg.intrinsics, sc.corner_depth_mm, sc.bounce_ratio);
    if (sc.type == "glass")
        return make_glass_scene(cfg.grid, cfg.intrinsics.width, cfg.intrinsics.height,
                                sc.glass_depth_mm, sc.wall_depth_mm, sc.wall_ratio);
    throw std::invalid_argument("unknown scene type: " + sc.type);
}

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

json scene_to_json(const MultipathScene& scene) {
    json pixels = json::array();
    for (const auto& paths : scene.pixels) {
        json px = json::array();
        for (const auto& p : paths)
            px.push_back(json{{"depth_mm", p.depth_mm}, {"amplitude", p.amplitude}});
        pixels.push_back(std::move(px));
    }
    return json{{"label", scene.label},
                {"width", scene.width},
                {"height", scene.height},
                {"pixels", std::move(pixels)}};
}

std::string hash_of(const fs::path& p) { return sha256_file(p.string()); }

}  // namespace

void run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const std::string hash = config_hash(cfg);
    const fs::path out(out_dir);

    MultipathScene scene = build_scene(cfg);
    RawFourPhase raw = render_four_phase(scene, cfg.plan, cfg.intrinsics, cfg.noise_model(),
                                         cfg.n_frames);

    json scene_json = scene_to_json(scene);
    scene_json["grid"] = grid_to_json(cfg.grid);
    scene_json["plan"] = plan_to_json(cfg.plan);
    scene_json["noise"] = {{"read_noise_sigma", cfg.noise_model().read_noise_sigma},
                           {"shot_noise", cfg.shot_noise},
                           {"dark_offset", cfg.dark_offset},
                           {"seed", cfg.seed}};
    scene_json["config_hash"] = hash;
    atomic_write((out / "scene.json").string(), scene_json.dump(2) + "\n");

    save_raw_four_phase((out / "raw.bin").string(), (out / "raw.json").string(), raw, hash);
    save_depth_map((out / "truth_depth.bin").string(), (out / "truth_depth.json").string(),
                   scene.truth, hash);

    std::map<std::string, std::string> artifacts;
    for (const char* name : {"scene.json", "raw.bin", "raw.json", "truth_depth.bin",
                             "truth_depth.json"})
        artifacts[name] = hash_of(out / name);
    write_manifest((out / "manifest_simulate.json").string(), hash, artifacts);
}

void run_calibrate(const ExperimentConfig& cfg, const std::string& out_dir, bool write_csv) {
    fs::create_directories(out_dir);
    const std::string hash = config_hash(cfg);
    const fs::path out(out_dir);

    SensingMatrix A =
        emulate_calibration(cfg.grid, cfg.plan, std::nullopt, cfg.noise_model(), cfg.n_frames);
    save_sensing_matrix((out / "matrix.bin").string(), A);

    std::map<std::string, std::string> artifacts;
    artifacts["matrix.bin"] = hash_of(out / "matrix.bin");
    if (write_csv) {
        write_matrix_csv((out / "matrix.csv").string(), A);
        artifacts["matrix.csv"] = hash_of(out / "matrix.csv");
    }
    write_manifest((out / "manifest_calibrate.json").string(), hash, artifacts);
}

void run_reconstruct(const ExperimentConfig& cfg, const std::string& artifact_dir,
                     SolverMethod method, int threads,
                     const std::optional<std::string>& matrix_path) {
    const fs::path dir(artifact_dir);
    const std::string hash = config_hash(cfg);

    std::string raw_hash;
    RawFourPhase raw = load_raw_four_phase((dir / "raw.bin").string(),
                                           (dir / "raw.json").string(), &raw_hash);
    if (raw_hash != hash)
        throw std::invalid_argument("run_reconstruct: artifact config hash mismatch");

    RawFourPhase sub = baseline_subtract(raw);
    const int width = sub.width, height = sub.height;
    const int n_px = width * height;

    SensingMatrix A;
    std::optional<ClusteredDictionary> dict;
    SolverConfig solver = cfg.solver;
    double fista_step = 0.0;
    if (method != SolverMethod::Naive) {
        if (matrix_path) {
            A = load_sensing_matrix(*matrix_path);
            if (A.cols() != cfg.grid.n_bins() || A.rows() != cfg.plan.n_configs())
                throw std::invalid_argument("run_reconstruct: matrix file does not match config");
        } else {
            A = build_sensing_matrix(cfg.grid, cfg.plan, std::nullopt,
                                     AtomModel::DutyCycleCorrelation);
        }
        if (method == SolverMethod::CC_OMP)
            dict = cluster_dictionary(A, solver.k_clusters, solver.seed);
        if (method == SolverMethod::FISTA)  // the power iteration runs once per matrix
            fista_step = 1.0 / largest_squared_singular_value(A.entries);
    }

    DepthMap pred(width, height, 0.0, false);
    std::vector<SparseSolution> solutions(static_cast<size_t>(n_px));

    parallel_for(n_px, threads, [&](int px) {
        const int x = px % width;
        const int y = px / width;
        const Eigen::VectorXcd c = to_complex_observation(sub, x, y);
        auto [nx, ny] = normalized_coords(x, y, cfg.intrinsics);
        double radial = 0.0;
        bool ok = false;
        if (method == SolverMethod::Naive) {
            const NaiveDepth naive = naive_depth_coherent(sub, x, y);
            if (naive.valid) {
                radial = naive.range_mm;
                ok = true;
            }
        } else if (c.norm() > 0.0) {
            SparseSolution sol;
            if (method == SolverMethod::CC_OMP)
                sol = cc_omp(c, *dict, solver.k_sparse, solver.residual_tol,
                             solver.neighbor_margin);
            else if (method == SolverMethod::FISTA) {
                FistaParams fp;
                fp.lambda = solver.lambda;
                fp.max_iterations = solver.max_iterations;
                fp.step_size = fista_step;
                sol = fista(c, A, fp);
            } else {
                sol = solve_baseline(method, c, A, solver.k_sparse, solver);
            }
            if (!sol.support.empty()) {
                const DepthEstimate est =
                    estimate_depth(sol, cfg.grid, solver.k_top, solver.window);
                radial = est.depth_mm;
                ok = true;
            }
            solutions[static_cast<size_t>(px)] = std::move(sol);
        }
        if (ok) {
            const double axial = radial_to_axial(radial, nx, ny);
            pred.set(x, y, axial, true);
        }
    });

    const std::string tag = to_string(method);
    const fs::path depth_bin = dir / ("pred_depth_" + tag + ".bin");
    const fs::path depth_json = dir / ("pred_depth_" + tag + ".json");
    save_depth_map(depth_bin.string(), depth_json.string(), pred, hash);

    // Sparse solution batch export.
    const fs::path sol_csv = dir / ("solutions_" + tag + ".csv");
    {
        std::string buf = "pixel,rank,bin,re,im,abs,residual_norm\n";
        char line[160];
        if (method != SolverMethod::Naive) {
            for (int px = 0; px < n_px; ++px) {
                const auto& sol = solutions[static_cast<size_t>(px)];
                for (size_t r = 0; r < sol.support.size(); ++r) {
                    const cplx v = sol.coefficients(static_cast<Eigen::Index>(r));
                    std::snprintf(line, sizeof(line), "%d,%zu,%d,%.12g,%.12g,%.12g,%.12g\n", px, r,
                                  sol.support[r], v.real(), v.imag(), std::abs(v),
                                  sol.residual_norm);
                    buf += line;
                }
            }
        }
        atomic_write(sol_csv.string(), buf);
    }

    // Point cloud of the reconstructed surface.
    const PointCloud cloud = backproject(pred, cfg.intrinsics);
    const fs::path ply = dir / ("cloud_" + tag + ".ply");
    const fs::path cloud_csv = dir / ("cloud_" + tag + ".csv");
    write_ply(ply.string(), cloud);
    write_point_csv(cloud_csv.string(), cloud);

    std::map<std::string, std::string> artifacts;
    for (const fs::path& p : {depth_bin, depth_json, sol_csv, ply, cloud_csv})
        artifacts[p.filename().string()] = hash_of(p);
    write_manifest((dir / ("manifest_reconstruct_" + tag + ".json")).string(), hash, artifacts);
}

void run_evaluate(const ExperimentConfig& cfg, const std::string& artifact_dir,
                  const std::string& out_dir) {
    const fs::path dir(artifact_dir);
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    const std::string hash = config_hash(cfg);

    std::string truth_hash;
    DepthMap truth = load_depth_map((dir / "truth_depth.bin").string(),
                                    (dir / "truth_depth.json").string(), &truth_hash);
    if (truth_hash != hash)
        throw std::invalid_argument("run_evaluate: truth artifact hash mismatch");

    // Discover per-method predictions.
    std::vector<std::pair<std::string, DepthMap>> preds;
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("pred_depth_", 0) == 0 && name.size() > 16 &&
            name.substr(name.size() - 5) == ".json")
            names.push_back(name.substr(11, name.size() - 16));
    }
    std::sort(names.begin(), names.end());
    for (const std::string& method : names) {
        std::string pred_hash;
        DepthMap pred = load_depth_map((dir / ("pred_depth_" + method + ".bin")).string(),
                                       (dir / ("pred_depth_" + method + ".json")).string(),
                                       &pred_hash);
        if (pred_hash != hash)
            throw std::invalid_argument("run_evaluate: mixed config hashes in predictions");
        preds.emplace_back(method, std::move(pred));
    }
    if (preds.empty()) throw std::invalid_argument("run_evaluate: no predictions found");

    std::vector<MetricsReport> reports;
    for (const auto& [method, pred] : preds)
        reports.push_back(evaluate_depth(pred, truth, cfg.grid, method));
    std::sort(reports.begin(), reports.end(),
              [](const MetricsReport& a, const MetricsReport& b) { return a.mae_mm < b.mae_mm; });

    json report_json{{"config_hash", hash}, {"config", config_to_json(cfg)}};
    json list = json::array();
    for (const auto& r : reports)
        list.push_back(json{{"method", r.method},
                            {"mae_mm", r.mae_mm},
                            {"rmse_mm", r.rmse_mm},
                            {"ssim", r.ssim_value},
                            {"n_valid", r.n_valid}});
    report_json["reports"] = list;
    atomic_write((out / "metrics_report.json").string(), report_json.dump(2) + "\n");

    // Depth profile down the central column, one CSV row per image row.
    {
        std::string buf = "row,truth";
        for (const auto& [method, pred] : preds) buf += "," + method;
        buf += "\n";
        const int col = truth.width / 2;
        char cell[64];
        for (int y = 0; y < truth.height; ++y) {
            std::snprintf(cell, sizeof(cell), "%d", y);
            buf += cell;
            auto append_value = [&](const DepthMap& map) {
                if (map.is_valid(col, y)) {
                    std::snprintf(cell, sizeof(cell), ",%.12g", map.at(col, y));
                    buf += cell;
                } else {
                    buf += ",nan";
                }
            };
            append_value(truth);
            for (const auto& [method, pred] : preds) append_value(pred);
            buf += "\n";
        }
        atomic_write((out / "cross_section.csv").string(), buf);
    }

    std::map<std::string, std::string> artifacts;
    artifacts["metrics_report.json"] = hash_of(out / "metrics_report.json");
    artifacts["cross_section.csv"] = hash_of(out / "cross_section.csv");
    write_manifest((out / "manifest_evaluate.json").string(), hash, artifacts);
}

std::string matrix_info(const ExperimentConfig& cfg,
                        const std::optional<std::string>& matrix_path) {
    SensingMatrix A = matrix_path
                          ? load_sensing_matrix(*matrix_path)
                          : build_sensing_matrix(cfg.grid, cfg.plan, std::nullopt,
                                                 AtomModel::DutyCycleCorrelation);
    ClusteredDictionary dict = cluster_dictionary(A, cfg.solver.k_clusters, cfg.solver.seed);

    std::string info;
    char line[160];
    std::snprintf(line, sizeof(line), "atom model: %s\n", to_string(A.atom_model).c_str());
    info += line;
    std::snprintf(line, sizeof(line), "rows (phase configs): %d\ncolumns (distance bins): %d\n",
                  A.rows(), A.cols());
    info += line;
    std::snprintf(line, sizeof(line), "grid: %.6g..%.6g mm, step %.6g mm\n", A.grid.d_min_mm,
                  A.grid.d_max_mm, A.grid.step_mm);
    info += line;
    std::snprintf(line, sizeof(line), "mutual coherence: %.9g\n", mutual_coherence(A));
    info += line;
    info += "cluster sizes:";
    for (int k = 0; k < dict.k_clusters; ++k) {
        std::snprintf(line, sizeof(line), " %zu", dict.members[k].size());
        info += line;
    }
    info += "\n";
    return info;
}

}  // namespace tofcs
