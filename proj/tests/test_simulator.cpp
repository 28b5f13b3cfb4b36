#include <doctest.h>

#include <cmath>
#include <vector>

#include "tofcs/simulator.hpp"

using namespace tofcs;

namespace {

// Angle between complex directions, stable near zero: the norm of the
// component of a orthogonal to b is sin(angle).
double column_angle(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    const Eigen::VectorXcd ah = a.normalized(), bh = b.normalized();
    const cplx overlap = bh.dot(ah);
    return std::asin(std::min(1.0, (ah - overlap * bh).norm()));
}

double sample_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return std::sqrt(var / (xs.size() - 1));
}

ModulationPlan small_plan() { return ModulationPlan::standard(2); }

}  // namespace

TEST_CASE("synthesize observation: one-hot and linear") {
    DepthGrid grid(300.0, 1300.0, 1.0);
    ModulationPlan plan = ModulationPlan::standard();
    SensingMatrix A = build_sensing_matrix(grid, plan, std::nullopt,
                                           AtomModel::DutyCycleCorrelation);

    // Single path lands on the unnormalized column of its bin.
    Eigen::VectorXcd c = synthesize_observation({{650.0, 1.0}}, A, NoiseModel::none());
    const int bin = (650 - 300) / 1;
    CHECK((c - A.unnormalized_column(bin)).cwiseAbs().maxCoeff() <= 1e-15);

    // Linearity of the observation model.
    Eigen::VectorXcd c2 = synthesize_observation({{500.0, 1.0}, {900.0, 0.4}}, A,
                                                 NoiseModel::none());
    Eigen::VectorXcd expected =
        A.unnormalized_column(grid.nearest_bin(500.0)) * 1.0 +
        A.unnormalized_column(grid.nearest_bin(900.0)) * 0.4;
    CHECK((c2 - expected).cwiseAbs().maxCoeff() <= 1e-12);

    Eigen::VectorXcd ca = synthesize_observation({{500.0, 1.0}}, A, NoiseModel::none());
    Eigen::VectorXcd cb = synthesize_observation({{900.0, 0.4}}, A, NoiseModel::none());
    CHECK((c2 - (ca + cb)).cwiseAbs().maxCoeff() <= 1e-12);

    // Deterministic under a fixed seed, bit for bit.
    NoiseModel noise;
    noise.read_noise_sigma = 0.01;
    noise.seed = 42;
    Eigen::VectorXcd n1 = synthesize_observation({{650.0, 1.0}}, A, noise);
    Eigen::VectorXcd n2 = synthesize_observation({{650.0, 1.0}}, A, noise);
    CHECK((n1 - n2).cwiseAbs().maxCoeff() == 0.0);
    noise.seed = 43;
    Eigen::VectorXcd n3 = synthesize_observation({{650.0, 1.0}}, A, noise);
    CHECK((n1 - n3).cwiseAbs().maxCoeff() > 0.0);

    // Paths outside the grid are rejected.
    CHECK_THROWS_AS(synthesize_observation({{2000.0, 1.0}}, A, NoiseModel::none()),
                    std::invalid_argument);
}

TEST_CASE("render four phase: offsets, averaging, determinism") {
    ModulationPlan plan = ModulationPlan::standard();
    NoiseModel noise;
    noise.dark_offset = 10.0;

    // Zero-amplitude scene: every tap and dark frame equals the offset.
    RawFourPhase raw = render_four_phase_pixel({{650.0, 0.0}}, plan, std::nullopt, noise, 3);
    for (int m = 0; m < raw.n_configs(); ++m)
        for (int t = 0; t < 4; ++t) {
            CHECK(raw.taps[m][t][0] == doctest::Approx(10.0));
            CHECK(raw.darks[m][t][0] == doctest::Approx(10.0));
        }

    // Averaging a noiseless capture changes nothing.
    RawFourPhase one = render_four_phase_pixel({{600.0, 1.0}}, plan, std::nullopt,
                                               NoiseModel::none(), 1);
    RawFourPhase hundred = render_four_phase_pixel({{600.0, 1.0}}, plan, std::nullopt,
                                                   NoiseModel::none(), 100);
    for (int m = 0; m < one.n_configs(); ++m)
        for (int t = 0; t < 4; ++t) CHECK(one.taps[m][t][0] == hundred.taps[m][t][0]);

    // Same seed, same bits.
    NoiseModel seeded;
    seeded.read_noise_sigma = 1.0;
    seeded.seed = 7;
    RawFourPhase a = render_four_phase_pixel({{600.0, 1.0}}, plan, std::nullopt, seeded, 4);
    RawFourPhase b = render_four_phase_pixel({{600.0, 1.0}}, plan, std::nullopt, seeded, 4);
    for (int m = 0; m < a.n_configs(); ++m)
        for (int t = 0; t < 4; ++t) {
            CHECK(a.taps[m][t][0] == b.taps[m][t][0]);
            CHECK(a.darks[m][t][0] == b.darks[m][t][0]);
        }
}

TEST_CASE("frame averaging shrinks the tap noise as 1/sqrt(n)") {
    ModulationPlan plan = small_plan();
    const int trials = 10000;
    std::vector<double> tap_n1, tap_n100;
    tap_n1.reserve(trials);
    tap_n100.reserve(trials);
    for (int s = 0; s < trials; ++s) {
        NoiseModel noise;
        noise.read_noise_sigma = 4.0;
        noise.seed = static_cast<std::uint64_t>(s);
        tap_n1.push_back(
            render_four_phase_pixel({{600.0, 1.0}}, plan, std::nullopt, noise, 1).taps[0][0][0]);
        tap_n100.push_back(
            render_four_phase_pixel({{600.0, 1.0}}, plan, std::nullopt, noise, 100)
                .taps[0][0][0]);
    }
    const double s1 = sample_std(tap_n1);
    const double s100 = sample_std(tap_n100);
    CHECK(s1 == doctest::Approx(4.0).epsilon(0.10));
    CHECK(s100 == doctest::Approx(0.4).epsilon(0.10));
    CHECK(s1 / s100 == doctest::Approx(10.0).epsilon(0.10));
}

TEST_CASE("baseline subtraction") {
    ModulationPlan plan = small_plan();
    NoiseModel noise;
    noise.dark_offset = 10.0;

    RawFourPhase raw = render_four_phase_pixel({{650.0, 0.0}}, plan, std::nullopt, noise, 1);
    RawFourPhase sub = baseline_subtract(raw);
    CHECK(sub.subtracted);
    for (int m = 0; m < sub.n_configs(); ++m)
        for (int t = 0; t < 4; ++t) {
            CHECK(sub.taps[m][t][0] == doctest::Approx(0.0));
            CHECK(sub.darks[m][t][0] == 0.0);
        }

    // Offset removal is exact in the noiseless additive model.
    RawFourPhase with_signal = render_four_phase_pixel({{650.0, 1.0}}, plan, std::nullopt,
                                                       noise, 1);
    RawFourPhase signal_only = render_four_phase_pixel({{650.0, 1.0}}, plan, std::nullopt,
                                                       NoiseModel::none(), 1);
    RawFourPhase recovered = baseline_subtract(with_signal);
    for (int m = 0; m < recovered.n_configs(); ++m)
        for (int t = 0; t < 4; ++t)
            CHECK(recovered.taps[m][t][0] == doctest::Approx(signal_only.taps[m][t][0]));

    // Missing dark frames are rejected.
    RawFourPhase no_darks = raw;
    no_darks.darks.clear();
    CHECK_THROWS_AS(baseline_subtract(no_darks), std::invalid_argument);
}

TEST_CASE("baseline subtraction doubles the per-pixel variance") {
    ModulationPlan plan = small_plan();
    const int trials = 10000;
    std::vector<double> plain, subtracted;
    for (int s = 0; s < trials; ++s) {
        NoiseModel noise;
        noise.read_noise_sigma = 2.0;
        noise.dark_offset = 5.0;
        noise.seed = static_cast<std::uint64_t>(s);
        RawFourPhase raw = render_four_phase_pixel({{600.0, 1.0}}, plan, std::nullopt, noise, 1);
        plain.push_back(raw.taps[0][0][0]);
        subtracted.push_back(baseline_subtract(raw).taps[0][0][0]);
    }
    const double v_plain = sample_std(plain) * sample_std(plain);
    const double v_sub = sample_std(subtracted) * sample_std(subtracted);
    CHECK(v_sub / v_plain == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("complex observation pairing") {
    ModulationPlan plan = small_plan();
    RawFourPhase raw = render_four_phase_pixel({{650.0, 0.0}}, plan, std::nullopt,
                                               NoiseModel::none(), 1);
    // Hand-crafted taps: c = (I0 - I180) + j (I90 - I270).
    raw.subtracted = true;
    raw.taps[0][0][0] = 2.0;
    raw.taps[0][1][0] = 5.0;
    raw.taps[0][2][0] = 1.0;
    raw.taps[0][3][0] = 3.0;
    raw.taps[1][0][0] = 4.0;
    raw.taps[1][1][0] = 4.0;
    raw.taps[1][2][0] = 4.0;
    raw.taps[1][3][0] = 4.0;
    Eigen::VectorXcd c = to_complex_observation(raw, 0, 0);
    CHECK(c(0) == cplx(1.0, 2.0));
    CHECK(c(1) == cplx(0.0, 0.0));

    raw.subtracted = false;
    CHECK_THROWS_AS(to_complex_observation(raw, 0, 0), std::invalid_argument);
}

TEST_CASE("rendered single path lands on its matrix column") {
    DepthGrid grid(300.0, 1300.0, 1.0);
    ModulationPlan plan = ModulationPlan::standard();
    SensingMatrix A = build_sensing_matrix(grid, plan, std::nullopt,
                                           AtomModel::DutyCycleCorrelation);

    for (double depth : {400.0, 777.0, 1250.0}) {
        RawFourPhase raw = render_four_phase_pixel({{depth, 0.8}}, plan, std::nullopt,
                                                   NoiseModel::none(), 1);
        Eigen::VectorXcd c = to_complex_observation(baseline_subtract(raw), 0, 0);
        CHECK(column_angle(c, A.entries.col(grid.nearest_bin(depth))) <= 1e-9);
    }
}

TEST_CASE("emulated calibration reproduces the analytic matrix") {
    DepthGrid grid(300.0, 1300.0, 25.0);
    ModulationPlan plan = ModulationPlan::standard();

    SensingMatrix emulated = emulate_calibration(grid, plan, std::nullopt,
                                                 NoiseModel::none(), 1);
    SensingMatrix analytic = build_sensing_matrix(grid, plan, std::nullopt,
                                                  AtomModel::DutyCycleCorrelation);
    CHECK((emulated.entries - analytic.entries).cwiseAbs().maxCoeff() <= 1e-9);

    // Degenerate single-bin grid still yields a unit column.
    DepthGrid one_bin(500.0, 500.5, 1.0);
    SensingMatrix single = emulate_calibration(one_bin, plan, std::nullopt,
                                               NoiseModel::none(), 1);
    CHECK(single.cols() == 1);
    CHECK(std::abs(single.entries.col(0).norm() - 1.0) <= 1e-12);
}

TEST_CASE("calibration column error shrinks with frame averaging") {
    DepthGrid grid(400.0, 1200.0, 400.0);  // 3 bins
    ModulationPlan plan = ModulationPlan::standard();
    SensingMatrix analytic = build_sensing_matrix(grid, plan, std::nullopt,
                                                  AtomModel::DutyCycleCorrelation);

    const int seeds = 100;
    double err[3] = {0.0, 0.0, 0.0};
    const int frames[3] = {1, 10, 100};
    for (int s = 0; s < seeds; ++s) {
        for (int f = 0; f < 3; ++f) {
            NoiseModel noise;
            noise.read_noise_sigma = 0.01;
            noise.seed = static_cast<std::uint64_t>(s);
            SensingMatrix em = emulate_calibration(grid, plan, std::nullopt, noise, frames[f]);
            for (int i = 0; i < em.cols(); ++i)
                err[f] += column_angle(em.entries.col(i), analytic.entries.col(i));
        }
    }
    CHECK(err[0] > err[1]);
    CHECK(err[1] > err[2]);
}

TEST_CASE("peripheral pixels stay consistent after correction") {
    DepthGrid grid(300.0, 1300.0, 10.0);
    ModulationPlan plan = ModulationPlan::standard();
    CameraIntrinsics intr;
    intr.fx = intr.fy = 50.0;
    intr.cx = 31.5;
    intr.cy = 23.5;
    intr.width = 64;
    intr.height = 48;

    const double depth = 700.0;  // same axial plane for both pixels
    const PixelRef center{intr.cx, intr.cy, intr};
    const PixelRef edge{2.0, 3.0, intr};

    for (const PixelRef& pixel : {center, edge}) {
        SensingMatrix A = build_sensing_matrix(grid, plan, pixel,
                                               AtomModel::DutyCycleCorrelation);
        RawFourPhase raw = render_four_phase_pixel({{depth, 1.0}}, plan, pixel,
                                                   NoiseModel::none(), 1);
        Eigen::VectorXcd c = to_complex_observation(baseline_subtract(raw), 0, 0);
        CHECK(column_angle(c, A.entries.col(grid.nearest_bin(depth))) <= 1e-9);
    }
}

TEST_CASE("canonical scenes") {
    DepthGrid grid(300.0, 1300.0, 1.0);
    CameraIntrinsics intr;
    intr.fx = intr.fy = 40.0;
    intr.cx = 15.5;
    intr.cy = 11.5;
    intr.width = 32;
    intr.height = 24;

    MultipathScene two = make_two_path_scene(grid, 650.0, 300.0, 0.4, 2, 2);
    CHECK(two.pixels.size() == 4);
    CHECK(two.at(0, 0).size() == 2);
    CHECK(two.at(0, 0)[0].amplitude == 1.0);
    CHECK(two.at(0, 0)[1].depth_mm == doctest::Approx(950.0));
    CHECK(two.truth.at(0, 0) == doctest::Approx(650.0));
    CHECK_THROWS_AS(make_two_path_scene(grid, 1250.0, 300.0, 0.4), std::invalid_argument);

    MultipathScene corner = make_corner_scene(grid, intr, 800.0, 0.3);
    CHECK(corner.width == intr.width);
    for (int v = 0; v < corner.height; ++v)
        for (int u = 0; u < corner.width; ++u) {
            const auto& paths = corner.at(u, v);
            REQUIRE(paths.size() == 2);
            CHECK(paths[0].amplitude == 1.0);
            CHECK(paths[1].amplitude == doctest::Approx(0.3));
            CHECK(grid.contains(paths[0].depth_mm));
            CHECK(grid.contains(paths[1].depth_mm));
            CHECK(paths[1].depth_mm >= paths[0].depth_mm - 1e-9);
            CHECK(corner.truth.at(u, v) == doctest::Approx(paths[0].depth_mm));
        }

    MultipathScene glass = make_glass_scene(grid, 4, 4, 600.0, 1100.0, 0.5);
    CHECK(glass.at(1, 1)[0].depth_mm == doctest::Approx(600.0));
    CHECK(glass.at(1, 1)[1].amplitude == doctest::Approx(0.5));
    CHECK(glass.truth.at(2, 2) == doctest::Approx(600.0));
}

TEST_CASE("whole-scene rendering is deterministic") {
    DepthGrid grid(300.0, 1300.0, 1.0);
    ModulationPlan plan = ModulationPlan::standard(4);
    CameraIntrinsics intr;
    intr.fx = intr.fy = 10.0;
    intr.cx = 1.5;
    intr.cy = 1.5;
    intr.width = 4;
    intr.height = 4;
    MultipathScene scene = make_glass_scene(grid, 4, 4, 600.0, 1100.0, 0.5);

    NoiseModel noise;
    noise.read_noise_sigma = 0.001;
    noise.seed = 5;
    RawFourPhase raw = render_four_phase(scene, plan, intr, noise, 2);
    CHECK(raw.width == 4);
    CHECK(raw.n_configs() == 4);
    RawFourPhase again = render_four_phase(scene, plan, intr, noise, 2);
    for (int m = 0; m < raw.n_configs(); ++m)
        for (int t = 0; t < 4; ++t)
            for (size_t i = 0; i < raw.taps[m][t].size(); ++i)
                CHECK(raw.taps[m][t][i] == again.taps[m][t][i]);
}

TEST_CASE("default read noise is one percent of the correlation peak") {
    ModulationPlan plan = ModulationPlan::standard();
    CHECK(default_read_noise_sigma(plan) ==
          doctest::Approx(0.01 * duty_correlation(0.0, plan.duty_cycle)));
}
