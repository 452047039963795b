#include "silab/common.hpp"

#include <atomic>
#include <cmath>

namespace silab {

namespace {
std::atomic<int> g_workers{0};  // 0 = not set yet
}

int worker_count() {
    int n = g_workers.load(std::memory_order_relaxed);
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_worker_count(int n) {
    require(n >= 1, "worker count must be >= 1");
    g_workers.store(n, std::memory_order_relaxed);
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    require(xs.size() == ys.size() && xs.size() >= 2, "line fit needs >= 2 points");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    require(std::abs(denom) > 1e-14 * n * sxx, "line fit abscissae are degenerate");
    LineFit f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (f.intercept + f.slope * xs[i]);
        rss += r * r;
    }
    f.residual_rms = std::sqrt(rss / n);
    return f;
}

}  // namespace silab
