#include "tofcs/sensing.hpp"

#include <cmath>

namespace tofcs {

std::pair<double, double> normalized_coords(double u, double v, const CameraIntrinsics& intr) {
    intr.validate();
    if (!intr.in_bounds(u, v))
        throw std::invalid_argument("normalized_coords: pixel outside sensor bounds");
    return {(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy};
}

double corrected_range(double depth_mm, double x, double y) {
    if (depth_mm <= 0.0) throw std::invalid_argument("corrected_range: depth must be > 0");
    return depth_mm * std::sqrt(1.0 + x * x + y * y);
}

namespace {

// Count of integers n with a <= n < b intersected with [0, limit).
inline long count_in(double a, double b, long limit) {
    double lo = std::max(a, 0.0);
    double hi = std::min(b, static_cast<double>(limit));
    if (hi <= lo) return 0;
    long c = static_cast<long>(std::ceil(hi)) - static_cast<long>(std::ceil(lo));
    return c > 0 ? c : 0;
}

}  // namespace

double duty_correlation(double psi, double duty) {
    if (duty <= 0.0 || duty > 1.0)
        throw std::invalid_argument("duty_correlation: duty must be in (0, 1]");
    // Circular overlap of two unit pulses of width 2 pi * duty offset by psi.
    const double width = kTwoPi * duty;
    double delta = std::fmod(std::abs(psi), kTwoPi);
    delta = std::min(delta, kTwoPi - delta);
    const double overlap = std::max(0.0, width - delta) + std::max(0.0, width + delta - kTwoPi);
    return overlap / kTwoPi;
}

double sampled_duty_correlation(double psi, double duty, int n_samples) {
    if (duty <= 0.0 || duty > 1.0)
        throw std::invalid_argument("sampled_duty_correlation: duty must be in (0, 1]");
    if (n_samples < 1) throw std::invalid_argument("sampled_duty_correlation: need n_samples >= 1");

    const double n = static_cast<double>(n_samples);
    const double on = duty * n;                       // samples k with k < on are high
    const long k0 = static_cast<long>(std::ceil(on - 1e-12));

    double t = std::fmod(psi / kTwoPi, 1.0) * n;      // shift in sample units
    if (t < 0.0) t += n;

    // Shifted sample is high iff (k + t) mod N < on, i.e. k in
    // [-t, on - t) or [N - t, N + on - t); intersect with the pulse [0, k0).
    long hits = count_in(-t, on - t, k0) + count_in(n - t, n + on - t, k0);
    return static_cast<double>(hits) / n;
}

double waveform_correlation(AtomModel model, double duty, double psi) {
    if (model == AtomModel::IdealSinusoid) return 0.5 * std::cos(psi);
    return duty_correlation(psi, duty);
}

cplx four_tap_response(AtomModel model, double duty, double u) {
    if (model == AtomModel::IdealSinusoid)
        return std::exp(cplx(0.0, u));
    const double c0 = duty_correlation(u, duty);
    const double c90 = duty_correlation(u - kPi / 2.0, duty);
    const double c180 = duty_correlation(u - kPi, duty);
    const double c270 = duty_correlation(u - 3.0 * kPi / 2.0, duty);
    return {c0 - c180, c90 - c270};
}

double delay_phase(const ModulationPlan& plan, double depth_mm,
                   const std::optional<PixelRef>& pixel) {
    double range = depth_mm;
    if (pixel) {
        auto [x, y] = normalized_coords(pixel->u, pixel->v, pixel->intrinsics);
        range = corrected_range(depth_mm, x, y);
    }
    const double tau = 2.0 * range / kSpeedOfLightMmPerSec;
    return kTwoPi * plan.f_mod_hz * tau;
}

Eigen::VectorXcd response_vector(const ModulationPlan& plan, double depth_mm,
                                 const std::optional<PixelRef>& pixel, AtomModel model) {
    const double psi = delay_phase(plan, depth_mm, pixel);
    Eigen::VectorXcd column(plan.n_configs());
    for (int m = 0; m < plan.n_configs(); ++m)
        column(m) = four_tap_response(model, plan.duty_cycle, psi - plan.phase_shifts[m]);
    return column;
}

Eigen::VectorXd normalize_columns(Eigen::MatrixXcd& matrix) {
    Eigen::VectorXd norms(matrix.cols());
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
        const double norm = matrix.col(j).norm();
        if (norm <= 0.0)
            throw std::runtime_error("normalize_columns: zero column at bin " + std::to_string(j));
        matrix.col(j) /= norm;
        norms(j) = norm;
    }
    return norms;
}

SensingMatrix build_sensing_matrix(const DepthGrid& grid, const ModulationPlan& plan,
                                   const std::optional<PixelRef>& pixel, AtomModel model) {
    grid.validate();
    plan.validate();
    if (grid.d_max_mm > plan.unambiguous_range_mm())
        throw std::invalid_argument("build_sensing_matrix: grid exceeds the unambiguous range c/(2f)");

    SensingMatrix A;
    A.grid = grid;
    A.plan = plan;
    A.pixel = pixel;
    A.atom_model = model;
    A.entries.resize(plan.n_configs(), grid.n_bins());
    for (int i = 0; i < grid.n_bins(); ++i)
        A.entries.col(i) = response_vector(plan, grid.depth_of(i), pixel, model);
    A.column_norms = normalize_columns(A.entries);
    return A;
}

double mutual_coherence(const SensingMatrix& A) {
    const int n = A.cols();
    if (n < 2)
        throw std::invalid_argument("mutual_coherence: need at least two columns");
    const Eigen::MatrixXcd gram = A.entries.adjoint() * A.entries;
    double mu = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
            mu = std::max(mu, std::abs(gram(i, k)));
    return mu;
}

}  // namespace tofcs
