#include "silab/estimator.hpp"

#include <algorithm>
#include <cmath>

namespace silab {

namespace {

void require_unit(Vec2 v, const char* name) {
    require(std::fabs(v.norm() - 1.0) < 1e-9,
            std::string(name) + " must be a unit vector");
}

void require_bandwidth(double h) {
    require(h > 0.0, "bandwidth h must be positive");
}

// Flip theta so that nu . theta >= 0; returns s = nu . theta after the flip.
double canonicalise_pair(Vec2& theta, Vec2 nu) {
    if (nu.dot(theta) < 0.0) theta = theta * -1.0;
    return std::min(1.0, nu.dot(theta));
}

}  // namespace

// ============================================================================
// Transforms
// ============================================================================

TransformMatrix matrix_single(Vec2 theta, double h) {
    require_unit(theta, "theta");
    require_bandwidth(h);
    return {theta.x / h, theta.y / h, -theta.y, theta.x};
}

TransformMatrix matrix_pair(Vec2 theta, Vec2 nu, double h) {
    require_unit(theta, "theta");
    require_unit(nu, "nu");
    require_bandwidth(h);
    const double s = canonicalise_pair(theta, nu);
    const Vec2 w = theta + nu;
    const double d_par = 2.0 * h * (1.0 + s);
    const double d_perp = 2.0 * (1.0 + s);
    return {w.x / d_par, w.y / d_par, -w.y / d_perp, w.x / d_perp};
}

KernelWindow window_single(Vec2 theta, double h) {
    require_unit(theta, "theta");
    require_bandwidth(h);
    return {theta, h, 1.0};
}

KernelWindow window_pair(Vec2 theta, Vec2 nu, double h) {
    require_unit(theta, "theta");
    require_unit(nu, "nu");
    require_bandwidth(h);
    const double s = canonicalise_pair(theta, nu);
    const Vec2 w = theta + nu;
    const double g = std::sqrt(2.0 * (1.0 + s));  // |theta + nu|
    const double wn = w.norm();
    return {{w.x / wn, w.y / wn}, h * g, g};
}

double window_weight(const ProductKernel& kernel, const KernelWindow& window, Vec2 delta) {
    const double u = window.omega.dot(delta) / window.len_par;
    const double v = window.omega.perp().dot(delta) / window.len_perp;
    return kernel(u, v);
}

// ============================================================================
// Directions
// ============================================================================

Vec2 direction_from_angle(double radians) {
    return {std::cos(radians), std::sin(radians)};
}

std::vector<Vec2> direction_grid(int n_directions) {
    require(n_directions >= 1, "direction grid needs n_directions >= 1");
    std::vector<Vec2> dirs;
    dirs.reserve(n_directions);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < n_directions; ++i)
        dirs.push_back(direction_from_angle(pi * i / n_directions));
    return dirs;
}

// ============================================================================
// Evaluation
// ============================================================================

namespace {

struct CxBand {
    double lo, hi;
    bool empty;
};

// Solve |a*cx + b| <= r for cx; a == 0 makes the condition row-wide.
CxBand solve_band(double a, double b, double r, double full_lo, double full_hi) {
    if (a == 0.0) {
        if (std::fabs(b) > r) return {0.0, -1.0, true};
        return {full_lo, full_hi, false};
    }
    double lo = (-r - b) / a;
    double hi = (r - b) / a;
    if (lo > hi) std::swap(lo, hi);
    return {lo, hi, false};
}

}  // namespace

double accumulate_window(const GridSpec& grid, const double* data, int batch,
                         const ProductKernel& kernel, const KernelWindow& window,
                         Vec2 x, double* acc) {
    require(batch >= 1, "batch must be >= 1");
    const int n = grid.n_per_axis;
    const double step = grid.step();
    const double hw = grid.half_width;
    const Vec2 om = window.omega;

    // Row band of the support rectangle.  One cell of slack each side soaks
    // up interval rounding; cells outside the support get kappa == 0 anyway.
    const double ext_y = 0.5 * (std::fabs(om.y) * window.len_par +
                                std::fabs(om.x) * window.len_perp);
    int iy_lo = (int)std::ceil((x.y - ext_y + hw) / step - 0.5) - 1;
    int iy_hi = (int)std::floor((x.y + ext_y + hw) / step - 0.5) + 1;
    iy_lo = std::max(iy_lo, 0);
    iy_hi = std::min(iy_hi, n - 1);

    const double r_par = 0.5 * window.len_par;
    const double r_perp = 0.5 * window.len_perp;
    const double d_par = om.dot(x);
    const double d_perp = om.perp().dot(x);
    const double du = om.x * step / window.len_par;
    const double dv = -om.y * step / window.len_perp;

    double mass = 0.0;
    for (int iy = iy_lo; iy <= iy_hi; ++iy) {
        const double cy = -hw + (iy + 0.5) * step;
        // Column range where both |u| <= 1/2 and |v| <= 1/2 can hold.
        const CxBand par = solve_band(om.x, om.y * cy - d_par, r_par, -hw, hw);
        const CxBand perp = solve_band(-om.y, om.x * cy - d_perp, r_perp, -hw, hw);
        if (par.empty || perp.empty) continue;
        const double cx_lo = std::max(par.lo, perp.lo);
        const double cx_hi = std::min(par.hi, perp.hi);
        if (cx_lo > cx_hi) continue;
        int ix_lo = std::max((int)std::ceil((cx_lo + hw) / step - 0.5) - 1, 0);
        int ix_hi = std::min((int)std::floor((cx_hi + hw) / step - 0.5) + 1, n - 1);
        if (ix_lo > ix_hi) continue;

        const double cx0 = -hw + (ix_lo + 0.5) * step;
        double u = (om.x * (cx0 - x.x) + om.y * (cy - x.y)) / window.len_par;
        double v = (-om.y * (cx0 - x.x) + om.x * (cy - x.y)) / window.len_perp;
        const double* row = data + ((std::size_t)iy * n + ix_lo) * batch;
        for (int ix = ix_lo; ix <= ix_hi; ++ix, row += batch, u += du, v += dv) {
            const double kap = kernel.axis(u) * kernel.axis(v);
            if (kap != 0.0) {
                mass += kap;
                for (int b = 0; b < batch; ++b) acc[b] += kap * row[b];
            }
        }
    }
    return mass * grid.cell_area();
}

double estimate(const Observation& obs, const ProductKernel& kernel,
                const KernelWindow& window, Vec2 x) {
    double acc = 0.0;
    const double mass = accumulate_window(obs.grid, obs.increments.data(), 1,
                                          kernel, window, x, &acc);
    require(mass > 0.0, "kernel window catches no grid cells at this bandwidth/location");
    return acc / mass;
}

double estimate_single(const Observation& obs, const ProductKernel& kernel,
                       Vec2 theta, double h, Vec2 x) {
    return estimate(obs, kernel, window_single(theta, h), x);
}

double estimate_pair(const Observation& obs, const ProductKernel& kernel,
                     Vec2 theta, Vec2 nu, double h, Vec2 x) {
    return estimate(obs, kernel, window_pair(theta, nu, h), x);
}

std::vector<double> estimate_batch(const FieldPyramid& pyramid, int level,
                                   const ProductKernel& kernel,
                                   const KernelWindow& window, Vec2 x) {
    require(level >= 0 && level < (int)pyramid.levels.size(), "pyramid level out of range");
    const GridSpec lg{pyramid.grid.half_width, pyramid.level_n[level]};
    std::vector<double> acc(pyramid.batch, 0.0);
    const double mass = accumulate_window(lg, pyramid.levels[level].data(), pyramid.batch,
                                          kernel, window, x, acc.data());
    require(mass > 0.0, "kernel window catches no grid cells at this bandwidth/location");
    for (double& a : acc) a /= mass;
    return acc;
}

}  // namespace silab
