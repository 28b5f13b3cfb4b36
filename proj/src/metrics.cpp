#include "tofcs/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tofcs {

namespace {

void check_dims(const DepthMap& a, const DepthMap& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("depth metrics: dimension mismatch");
}

}  // namespace

double mae(const DepthMap& pred, const DepthMap& truth) {
    check_dims(pred, truth);
    double sum = 0.0;
    long n = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!pred.valid[i] || !truth.valid[i]) continue;
        sum += std::abs(pred.values[i] - truth.values[i]);
        ++n;
    }
    if (n == 0) throw std::invalid_argument("mae: empty joint valid mask");
    return sum / static_cast<double>(n);
}

double rmse(const DepthMap& pred, const DepthMap& truth) {
    check_dims(pred, truth);
    double sum = 0.0;
    long n = 0;
    for (size_t i = 0; i < pred.size(); ++i) {
        if (!pred.valid[i] || !truth.valid[i]) continue;
        const double d = pred.values[i] - truth.values[i];
        sum += d * d;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("rmse: empty joint valid mask");
    return std::sqrt(sum / static_cast<double>(n));
}

double ssim(const DepthMap& pred, const DepthMap& truth, int window, double c1, double c2) {
    check_dims(pred, truth);
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("ssim: window must be odd and >= 3");

    const int w = pred.width, h = pred.height;
    const double n = static_cast<double>(window) * window;
    double total = 0.0;
    long count = 0;

    for (int y = 0; y + window <= h; ++y) {
        for (int x = 0; x + window <= w; ++x) {
            bool ok = true;
            double sp = 0.0, st = 0.0;
            for (int dy = 0; dy < window && ok; ++dy)
                for (int dx = 0; dx < window; ++dx) {
                    const size_t i = pred.index(x + dx, y + dy);
                    if (!pred.valid[i] || !truth.valid[i]) { ok = false; break; }
                    sp += pred.values[i];
                    st += truth.values[i];
                }
            if (!ok) continue;

            const double mu_p = sp / n, mu_t = st / n;
            double var_p = 0.0, var_t = 0.0, cov = 0.0;
            for (int dy = 0; dy < window; ++dy)
                for (int dx = 0; dx < window; ++dx) {
                    const size_t i = pred.index(x + dx, y + dy);
                    const double dp = pred.values[i] - mu_p;
                    const double dt = truth.values[i] - mu_t;
                    var_p += dp * dp;
                    var_t += dt * dt;
                    cov += dp * dt;
                }
            var_p /= n;
            var_t /= n;
            cov /= n;

            const double lum = (2.0 * mu_p * mu_t + c1) / (mu_p * mu_p + mu_t * mu_t + c1);
            const double str = (2.0 * cov + c2) / (var_p + var_t + c2);
            total += lum * str;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("ssim: no fully valid window");
    return total / static_cast<double>(count);
}

double ssim(const DepthMap& pred, const DepthMap& truth, const DepthGrid& grid) {
    const double span = grid.d_max_mm - grid.d_min_mm;
    const double c1 = (0.01 * span) * (0.01 * span);
    const double c2 = (0.03 * span) * (0.03 * span);
    return ssim(pred, truth, 7, c1, c2);
}

double recon_error_pct(const Eigen::VectorXcd& g_hat, const Eigen::VectorXcd& g_true) {
    if (g_hat.size() != g_true.size())
        throw std::invalid_argument("recon_error_pct: length mismatch");
    const double denom = g_true.norm();
    if (denom == 0.0) throw std::invalid_argument("recon_error_pct: zero reference vector");
    return 100.0 * (g_hat - g_true).norm() / denom;
}

double recon_error_pct(const Eigen::VectorXd& g_hat, const Eigen::VectorXd& g_true) {
    return recon_error_pct(Eigen::VectorXcd(g_hat.cast<cplx>()),
                           Eigen::VectorXcd(g_true.cast<cplx>()));
}

MetricsReport evaluate_depth(const DepthMap& pred, const DepthMap& truth,
                             const DepthGrid& grid, const std::string& method) {
    MetricsReport report;
    report.method = method;
    report.mae_mm = mae(pred, truth);
    report.rmse_mm = rmse(pred, truth);
    report.ssim_value = ssim(pred, truth, grid);
    long n = 0;
    for (size_t i = 0; i < pred.size(); ++i)
        if (pred.valid[i] && truth.valid[i]) ++n;
    report.n_valid = n;
    return report;
}

}  // namespace tofcs
