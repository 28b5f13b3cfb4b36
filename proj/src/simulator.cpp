#include "tofcs/simulator.hpp"

#include <cmath>

#include "tofcs/rng.hpp"

namespace tofcs {

namespace {

std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double frame_average(RandomStream& rng, double level, const NoiseModel& noise, int n_frames) {
    const bool noisy = noise.read_noise_sigma > 0.0 || (noise.shot_noise && level > 0.0);
    if (!noisy) return level;  // averaging a constant is exact
    double acc = 0.0;
    for (int f = 0; f < n_frames; ++f) {
        double v = level;
        if (noise.read_noise_sigma > 0.0) v += noise.read_noise_sigma * rng.next_gaussian();
        if (noise.shot_noise && level > 0.0) v += std::sqrt(level) * rng.next_gaussian();
        acc += v;
    }
    return acc / static_cast<double>(n_frames);
}

// Fill one pixel's tap and dark frames at slot `px`. The random streams are
// derived from (seed, pixel slot) so parallel rendering equals serial.
void render_pixel_into(RawFourPhase& raw, size_t px, const PixelPaths& paths,
                       const ModulationPlan& plan, const std::optional<PixelRef>& pixel,
                       const NoiseModel& noise, int n_frames, AtomModel waveform) {
    const auto taps = ModulationPlan::tap_offsets();
    std::vector<double> delays(paths.size());
    for (size_t p = 0; p < paths.size(); ++p) {
        if (paths[p].amplitude < 0.0)
            throw std::invalid_argument("render_four_phase: negative path amplitude");
        delays[p] = delay_phase(plan, paths[p].depth_mm, pixel);
    }

    RandomStream sig_rng(noise.seed, 2 * px);
    RandomStream dark_rng(noise.seed, 2 * px + 1);

    for (int m = 0; m < plan.n_configs(); ++m) {
        for (int t = 0; t < 4; ++t) {
            double signal = 0.0;
            for (size_t p = 0; p < paths.size(); ++p)
                signal += paths[p].amplitude *
                          waveform_correlation(waveform, plan.duty_cycle,
                                               delays[p] - plan.phase_shifts[m] - taps[t]);
            raw.taps[m][t][px] =
                frame_average(sig_rng, signal + noise.dark_offset, noise, n_frames);
            raw.darks[m][t][px] = frame_average(dark_rng, noise.dark_offset, noise, n_frames);
        }
    }
}

RawFourPhase make_empty_raw(int width, int height, const ModulationPlan& plan, int n_frames) {
    RawFourPhase raw;
    raw.width = width;
    raw.height = height;
    raw.n_frames = n_frames;
    raw.plan = plan;
    const size_t n_px = static_cast<size_t>(width) * height;
    raw.taps.resize(plan.n_configs());
    raw.darks.resize(plan.n_configs());
    for (int m = 0; m < plan.n_configs(); ++m)
        for (int t = 0; t < 4; ++t) {
            raw.taps[m][t].assign(n_px, 0.0);
            raw.darks[m][t].assign(n_px, 0.0);
        }
    return raw;
}

}  // namespace

double default_read_noise_sigma(const ModulationPlan& plan) {
    return 0.01 * duty_correlation(0.0, plan.duty_cycle);
}

Eigen::VectorXcd scene_vector(const PixelPaths& paths, const DepthGrid& grid) {
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(grid.n_bins());
    for (const auto& p : paths) {
        if (p.amplitude < 0.0)
            throw std::invalid_argument("scene_vector: negative path amplitude");
        g(grid.nearest_bin(p.depth_mm)) += p.amplitude;
    }
    return g;
}

Eigen::VectorXcd synthesize_observation(const PixelPaths& paths, const SensingMatrix& A_true,
                                        const NoiseModel& noise) {
    noise.validate();
    if (paths.empty()) throw std::invalid_argument("synthesize_observation: empty path list");
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(A_true.rows());
    for (const auto& p : paths) {
        const int bin = A_true.grid.nearest_bin(p.depth_mm);  // throws off-grid
        c += p.amplitude * A_true.unnormalized_column(bin);
    }
    if (noise.read_noise_sigma > 0.0) {
        RandomStream rng(noise.seed, 0x0b5e11);
        for (Eigen::Index m = 0; m < c.size(); ++m)
            c(m) += cplx(noise.read_noise_sigma * rng.next_gaussian(),
                         noise.read_noise_sigma * rng.next_gaussian());
    }
    return c;
}

RawFourPhase render_four_phase(const MultipathScene& scene, const ModulationPlan& plan,
                               const std::optional<CameraIntrinsics>& intrinsics,
                               const NoiseModel& noise, int n_frames, AtomModel waveform) {
    plan.validate();
    noise.validate();
    if (n_frames < 1) throw std::invalid_argument("render_four_phase: n_frames must be >= 1");

    RawFourPhase raw = make_empty_raw(scene.width, scene.height, plan, n_frames);
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            std::optional<PixelRef> pixel;
            if (intrinsics)
                pixel = PixelRef{static_cast<double>(x), static_cast<double>(y), *intrinsics};
            const size_t px = raw.index(x, y);
            render_pixel_into(raw, px, scene.pixels[px], plan, pixel, noise, n_frames, waveform);
        }
    }
    return raw;
}

RawFourPhase render_four_phase_pixel(const PixelPaths& paths, const ModulationPlan& plan,
                                     const std::optional<PixelRef>& pixel,
                                     const NoiseModel& noise, int n_frames, AtomModel waveform) {
    plan.validate();
    noise.validate();
    if (n_frames < 1) throw std::invalid_argument("render_four_phase: n_frames must be >= 1");
    RawFourPhase raw = make_empty_raw(1, 1, plan, n_frames);
    render_pixel_into(raw, 0, paths, plan, pixel, noise, n_frames, waveform);
    return raw;
}

RawFourPhase baseline_subtract(const RawFourPhase& raw) {
    if (!raw.has_darks())
        throw std::invalid_argument("baseline_subtract: missing dark frames");
    RawFourPhase out = raw;
    for (int m = 0; m < raw.n_configs(); ++m)
        for (int t = 0; t < 4; ++t) {
            auto& tap = out.taps[m][t];
            const auto& dark = raw.darks[m][t];
            for (size_t i = 0; i < tap.size(); ++i) tap[i] -= dark[i];
            std::fill(out.darks[m][t].begin(), out.darks[m][t].end(), 0.0);
        }
    out.subtracted = true;
    return out;
}

Eigen::VectorXcd to_complex_observation(const RawFourPhase& raw, int x, int y) {
    if (!raw.subtracted)
        throw std::invalid_argument("to_complex_observation: input is not baseline-subtracted");
    const size_t px = raw.index(x, y);
    Eigen::VectorXcd c(raw.n_configs());
    for (int m = 0; m < raw.n_configs(); ++m)
        c(m) = cplx(raw.taps[m][0][px] - raw.taps[m][2][px],
                    raw.taps[m][1][px] - raw.taps[m][3][px]);
    return c;
}

SensingMatrix emulate_calibration(const DepthGrid& grid, const ModulationPlan& plan,
                                  const std::optional<PixelRef>& pixel,
                                  const NoiseModel& noise, int n_frames) {
    grid.validate();
    plan.validate();
    if (grid.d_max_mm > plan.unambiguous_range_mm())
        throw std::invalid_argument("emulate_calibration: grid exceeds the unambiguous range");

    SensingMatrix A;
    A.grid = grid;
    A.plan = plan;
    A.pixel = pixel;
    A.atom_model = AtomModel::DutyCycleCorrelation;
    A.entries.resize(plan.n_configs(), grid.n_bins());

    for (int i = 0; i < grid.n_bins(); ++i) {
        NoiseModel col_noise = noise;
        col_noise.seed = combine_seed(noise.seed, static_cast<std::uint64_t>(i));
        PixelPaths target = {{grid.depth_of(i), 1.0}};
        RawFourPhase raw = render_four_phase_pixel(target, plan, pixel, col_noise, n_frames,
                                                   AtomModel::DutyCycleCorrelation);
        A.entries.col(i) = to_complex_observation(baseline_subtract(raw), 0, 0);
    }
    A.column_norms = normalize_columns(A.entries);
    return A;
}

MultipathScene make_two_path_scene(const DepthGrid& grid, double primary_depth_mm,
                                   double separation_mm, double ratio,
                                   int width, int height) {
    if (!grid.contains(primary_depth_mm) || !grid.contains(primary_depth_mm + separation_mm))
        throw std::invalid_argument("make_two_path_scene: paths outside grid");
    MultipathScene scene;
    scene.width = width;
    scene.height = height;
    scene.label = "two_path";
    scene.truth = DepthMap(width, height, primary_depth_mm);
    scene.pixels.assign(static_cast<size_t>(width) * height,
                        {{primary_depth_mm, 1.0}, {primary_depth_mm + separation_mm, ratio}});
    return scene;
}

MultipathScene make_corner_scene(const DepthGrid& grid, const CameraIntrinsics& intrinsics,
                                 double corner_depth_mm, double bounce_ratio) {
    intrinsics.validate();
    const double z0 = corner_depth_mm;

    MultipathScene scene;
    scene.width = intrinsics.width;
    scene.height = intrinsics.height;
    scene.label = "corner";
    scene.truth = DepthMap(intrinsics.width, intrinsics.height);
    scene.pixels.resize(static_cast<size_t>(intrinsics.width) * intrinsics.height);

    for (int v = 0; v < intrinsics.height; ++v) {
        for (int u = 0; u < intrinsics.width; ++u) {
            auto [x, y] = normalized_coords(u, v, intrinsics);
            // Walls z = z0 + X (left) and z = z0 - X (right) meet at 90 deg.
            const double d_primary = z0 / (1.0 + std::abs(x));
            const double elong = std::sqrt(1.0 + x * x + y * y);

            // Specular second bounce via the opposite wall: reflect the
            // camera origin across that wall's plane and take half the
            // emitter -> mirror point -> surface -> sensor path.
            const double mx = (x <= 0.0) ? z0 : -z0;  // mirrored origin
            const double qx = x * d_primary, qy = y * d_primary, qz = d_primary;
            const double to_mirror = std::sqrt((qx - mx) * (qx - mx) + qy * qy +
                                               (qz - z0) * (qz - z0));
            const double direct = std::sqrt(qx * qx + qy * qy + qz * qz);
            const double r_secondary = 0.5 * (to_mirror + direct);
            double d_secondary = r_secondary / elong;
            d_secondary = std::min(std::max(d_secondary, grid.d_min_mm), grid.d_max_mm);

            if (!grid.contains(d_primary))
                throw std::invalid_argument("make_corner_scene: wall outside grid");

            scene.truth.set(u, v, d_primary);
            scene.pixels[scene.index(u, v)] = {{d_primary, 1.0}, {d_secondary, bounce_ratio}};
        }
    }
    return scene;
}

MultipathScene make_glass_scene(const DepthGrid& grid, int width, int height,
                                double glass_depth_mm, double wall_depth_mm,
                                double wall_ratio) {
    if (!grid.contains(glass_depth_mm) || !grid.contains(wall_depth_mm))
        throw std::invalid_argument("make_glass_scene: planes outside grid");
    MultipathScene scene;
    scene.width = width;
    scene.height = height;
    scene.label = "glass";
    scene.truth = DepthMap(width, height, glass_depth_mm);
    scene.pixels.assign(static_cast<size_t>(width) * height,
                        {{glass_depth_mm, 1.0}, {wall_depth_mm, wall_ratio}});
    return scene;
}

}  // namespace tofcs
