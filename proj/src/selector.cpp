#include "silab/selector.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>

namespace silab {

namespace {

void require_probe(Vec2 x) {
    require(std::fabs(x.x) <= 0.5 && std::fabs(x.y) <= 0.5, "x must lie in [-1/2, 1/2]^2");
}

// Coarsest pyramid level that still resolves a window of length eta with the
// configured number of quadrature cells.
int quadrature_level(const FieldPyramid& pyramid, double eta, const SelectorConfig& config) {
    return pyramid.finest_level_with_step_at_most(eta / config.quadrature_cells_per_bandwidth);
}

}  // namespace

// ============================================================================
// Threshold constants
// ============================================================================

double lambda_const(const Kernel1D& kernel) {
    require(kernel.sup_norm > 0.0 && kernel.lipschitz >= 0.0,
            "kernel carries no certified constants");
    return 8.0 * std::sqrt(std::log(1.0 + 2.0 * kernel.lipschitz * kernel.sup_norm)) + 50.0;
}

double lambda_const(const ProductKernel& kernel) { return lambda_const(kernel.axis); }

double threshold(double eta, const SelectorConfig& config) {
    require(eta > 0.0 && eta <= 1.0, "threshold needs eta in (0, 1]");
    if (config.epsilon == 0.0) return 0.0;
    const double bracket = lambda_const(config.kernel) + std::sqrt(4.0 * config.r + 2.0) + 1.0;
    return config.threshold_scale * 2.0 * config.kernel.sup_norm() * bracket * config.epsilon *
           std::sqrt(std::log(1.0 / config.epsilon) / eta);
}

double epsilon_guard_bound(double bound_M, const ProductKernel& kernel) {
    require(bound_M > 0.0, "epsilon guard needs bound_M > 0");
    const double ratio = 2.0 * bound_M * kernel.axis.l1_norm / kernel.axis.sup_norm;
    return std::exp(-std::max(1.0, ratio * ratio));
}

void SelectorConfig::validate() const {
    require(r >= 1.0, "risk order r must be >= 1");
    require(epsilon >= 0.0 && epsilon <= std::exp(-1.0), "epsilon must lie in [0, e^-1]");
    require(n_directions >= 16 && n_directions % 2 == 0, "n_directions must be even and >= 16");
    require(threshold_scale > 0.0, "threshold_scale must be positive");
    require(h_min_cells >= 2, "h_min_cells must be >= 2");
    require(quadrature_cells_per_bandwidth >= 2, "quadrature_cells_per_bandwidth must be >= 2");
    require(!kernel.axis.coeffs.empty() && kernel.axis.sup_norm > 0.0,
            "kernel carries no certified constants");
    require(bound_M >= 0.0, "bound_M must be >= 0");
    if (bound_M > 0.0)
        require(epsilon <= epsilon_guard_bound(bound_M, kernel),
                "epsilon exceeds the admissible level for the supplied bound_M");
}

// ============================================================================
// Grids
// ============================================================================

std::vector<double> bandwidth_grid(double epsilon) {
    require(epsilon > 0.0 && epsilon <= std::exp(-1.0), "epsilon must lie in (0, e^-1]");
    std::vector<double> out;
    for (double h = 1.0; h >= epsilon * epsilon; h *= 0.5) out.push_back(h);
    return out;
}

std::vector<double> scan_levels(double epsilon, const GridSpec& grid, int h_min_cells) {
    require(epsilon >= 0.0 && epsilon <= std::exp(-1.0), "epsilon must lie in [0, e^-1]");
    require(h_min_cells >= 2, "h_min_cells must be >= 2");
    double floor_h = h_min_cells * grid.step();
    if (epsilon > 0.0) floor_h = std::max(floor_h, epsilon * epsilon);
    require(floor_h <= 1.0, "grid too coarse to resolve any bandwidth level");
    std::vector<double> out;
    for (double h = 1.0; h >= floor_h; h *= 0.5) out.push_back(h);
    return out;
}

std::vector<Vec2> selection_net(int n_directions) {
    require(n_directions >= 16 && n_directions % 2 == 0, "n_directions must be even and >= 16");
    std::vector<Vec2> net = direction_grid(n_directions / 2);
    net.reserve(n_directions);
    for (int i = 0; i < n_directions / 2; ++i) net.push_back(net[i] * -1.0);
    return net;
}

// ============================================================================
// Trace serialization
// ============================================================================

void SelectionTrace::write_csv(std::ostream& out) const {
    const int n_levels = static_cast<int>(bandwidth_grid.size());
    out << std::setprecision(17);
    out << "theta_index,theta_x,theta_y,h,R,in_p\n";
    for (int d = 0; d < static_cast<int>(directions.size()); ++d)
        for (int l = 0; l < n_levels; ++l)
            out << d << ',' << directions[d].x << ',' << directions[d].y << ','
                << bandwidth_grid[l] << ',' << r_value(d, l) << ',' << (in_p(d, l) ? 1 : 0)
                << '\n';
    out << "# summary theta_hat_x=" << theta_hat.x << " theta_hat_y=" << theta_hat.y
        << " h_tilde=";
    if (p_nonempty)
        out << h_tilde;
    else
        out << "none";
    out << " h_hat=" << h_hat << " estimate=" << estimate << " fallback="
        << (fallback_used ? 1 : 0) << '\n';
}

// ============================================================================
// Batched engine
// ============================================================================

SelectorEngine::SelectorEngine(const FieldPyramid& pyramid, Vec2 x, const SelectorConfig& config)
    : config_(config), x_(x), batch_(pyramid.batch) {
    config_.validate();
    require_probe(x);
    require(batch_ >= 1, "pyramid carries no observations");

    levels_ = scan_levels(config_.epsilon, pyramid.grid, config_.h_min_cells);
    SelectorConfig unit = config_;
    unit.threshold_scale = 1.0;
    thresholds_.reserve(levels_.size());
    for (double h : levels_) thresholds_.push_back(threshold(h, unit));

    const int half = config_.n_directions / 2;
    axes_ = direction_grid(half);
    net_ = selection_net(config_.n_directions);

    const int n_levels = static_cast<int>(levels_.size());
    singles_.assign(static_cast<std::size_t>(n_levels) * half * batch_, 0.0);
    gaps_.assign(static_cast<std::size_t>(n_levels) * half * batch_, 0.0);

    // Per level: all singles first (the pair folds read them), then every
    // canonical pair (i, j), i <= j.  Each pair value feeds the gap of both
    // members; estimates are even in the direction, so the half net covers
    // the full-circle suprema exactly.
    for (int e = 0; e < n_levels; ++e) {
        const double eta = levels_[e];
        const int lvl = quadrature_level(pyramid, eta, config_);
        for (int j = 0; j < half; ++j) {
            const std::vector<double> est =
                estimate_batch(pyramid, lvl, config_.kernel, window_single(axes_[j], eta), x_);
            std::copy(est.begin(), est.end(),
                      singles_.begin() + (static_cast<std::size_t>(e) * half + j) * batch_);
        }
        for (int i = 0; i < half; ++i) {
            for (int j = i; j < half; ++j) {
                const std::vector<double> pair = estimate_batch(
                    pyramid, lvl, config_.kernel, window_pair(axes_[i], axes_[j], eta), x_);
                double* gap_i = &gaps_[(static_cast<std::size_t>(e) * half + i) * batch_];
                const double* single_j =
                    &singles_[(static_cast<std::size_t>(e) * half + j) * batch_];
                for (int b = 0; b < batch_; ++b)
                    gap_i[b] = std::max(gap_i[b], std::fabs(pair[b] - single_j[b]));
                if (j != i) {
                    double* gap_j = &gaps_[(static_cast<std::size_t>(e) * half + j) * batch_];
                    const double* single_i =
                        &singles_[(static_cast<std::size_t>(e) * half + i) * batch_];
                    for (int b = 0; b < batch_; ++b)
                        gap_j[b] = std::max(gap_j[b], std::fabs(pair[b] - single_i[b]));
                }
            }
        }
    }
}

SelectionTrace SelectorEngine::run(int column) const {
    return run(column, config_.threshold_scale);
}

SelectionTrace SelectorEngine::run(int column, double threshold_scale) const {
    require(column >= 0 && column < batch_, "column out of range");
    require(threshold_scale > 0.0, "threshold_scale must be positive");
    const int n_levels = static_cast<int>(levels_.size());
    const int half = static_cast<int>(axes_.size());
    const int n_dirs = static_cast<int>(net_.size());

    SelectionTrace trace;
    trace.bandwidth_grid = levels_;
    trace.directions = net_;
    trace.R_values.resize(static_cast<std::size_t>(n_dirs) * n_levels);

    // R over the half net: suffix max over levels of gap - TH, since the
    // levels are descending and the statistic scans every eta <= h.
    std::vector<double> r_axis(static_cast<std::size_t>(half) * n_levels);
    for (int i = 0; i < half; ++i) {
        double running = -std::numeric_limits<double>::infinity();
        for (int e = n_levels - 1; e >= 0; --e) {
            running = std::max(running,
                               gap_at(e, i, column) - threshold_scale * thresholds_[e]);
            r_axis[static_cast<std::size_t>(i) * n_levels + e] = running;
        }
    }
    for (int d = 0; d < n_dirs; ++d)
        for (int e = 0; e < n_levels; ++e)
            trace.R_values[static_cast<std::size_t>(d) * n_levels + e] =
                r_axis[static_cast<std::size_t>(d % half) * n_levels + e];

    // First stage: the largest level owning a member of P, then the
    // lexicographically smallest qualifying direction (first coordinate,
    // then second) over the full net.
    int level_tilde = -1;
    for (int e = 0; e < n_levels && level_tilde < 0; ++e)
        for (int i = 0; i < half; ++i)
            if (r_axis[static_cast<std::size_t>(i) * n_levels + e] <= 0.0) {
                level_tilde = e;
                break;
            }

    int axis_hat = 0;
    if (level_tilde >= 0) {
        trace.p_nonempty = true;
        trace.h_tilde = levels_[level_tilde];
        int best = -1;
        for (int d = 0; d < n_dirs; ++d) {
            if (r_axis[static_cast<std::size_t>(d % half) * n_levels + level_tilde] > 0.0)
                continue;
            if (best < 0 || net_[d].x < net_[best].x ||
                (net_[d].x == net_[best].x && net_[d].y < net_[best].y))
                best = d;
        }
        trace.theta_hat = net_[best];
        axis_hat = best % half;
    } else {
        trace.theta_hat = Vec2{1.0, 0.0};
        trace.fallback_used = true;
        axis_hat = 0;  // net_[0] == (1, 0)
    }

    // Second stage at theta_hat: largest level whose estimate stays within
    // TH(eta) of every smaller-level estimate.  The smallest level passes
    // vacuously, so the scan always terminates.
    for (int k = 0; k < n_levels; ++k) {
        bool ok = true;
        for (int e = k; e < n_levels && ok; ++e)
            ok = std::fabs(single_at(k, axis_hat, column) - single_at(e, axis_hat, column)) <=
                 threshold_scale * thresholds_[e];
        if (ok) {
            trace.h_hat = levels_[k];
            trace.estimate = single_at(k, axis_hat, column);
            break;
        }
    }
    return trace;
}

// ============================================================================
// One-shot interface
// ============================================================================

double compute_R(const Observation& obs, Vec2 theta, double h, Vec2 x,
                 const SelectorConfig& config) {
    config.validate();
    require_probe(x);
    const std::vector<double> levels = scan_levels(config.epsilon, obs.grid, config.h_min_cells);
    int start = -1;
    for (int l = 0; l < static_cast<int>(levels.size()) && start < 0; ++l)
        if (std::fabs(levels[l] - h) <= 1e-12 * levels[l]) start = l;
    require(start >= 0, "h must be one of the scanned bandwidth levels");

    const FieldPyramid pyramid = build_pyramid(obs);
    const std::vector<Vec2> net = selection_net(config.n_directions);
    double best = -std::numeric_limits<double>::infinity();
    for (int e = start; e < static_cast<int>(levels.size()); ++e) {
        const double eta = levels[e];
        const int lvl = quadrature_level(pyramid, eta, config);
        double gap = 0.0;
        for (const Vec2& nu : net) {
            const double single =
                estimate_batch(pyramid, lvl, config.kernel, window_single(nu, eta), x)[0];
            const double pair = estimate_batch(pyramid, lvl, config.kernel,
                                               window_pair(theta, nu, eta), x)[0];
            gap = std::max(gap, std::fabs(pair - single));
        }
        best = std::max(best, gap - threshold(eta, config));
    }
    return best;
}

FirstStageResult first_stage(const Observation& obs, Vec2 x, const SelectorConfig& config) {
    const SelectionTrace trace = select_estimate(obs, x, config);
    FirstStageResult result;
    result.bandwidth_grid = trace.bandwidth_grid;
    result.directions = trace.directions;
    const std::size_t cells = trace.R_values.size();
    result.p_membership.resize(cells);
    for (std::size_t k = 0; k < cells; ++k)
        result.p_membership[k] = trace.R_values[k] <= 0.0 ? 1 : 0;
    result.theta_hat = trace.theta_hat;
    result.p_nonempty = trace.p_nonempty;
    result.h_tilde = trace.h_tilde;
    result.fallback_used = trace.fallback_used;
    return result;
}

double second_stage(const Observation& obs, Vec2 theta_hat, Vec2 x,
                    const SelectorConfig& config) {
    config.validate();
    require_probe(x);
    const FieldPyramid pyramid = build_pyramid(obs);
    const std::vector<double> levels = scan_levels(config.epsilon, obs.grid, config.h_min_cells);
    const int n_levels = static_cast<int>(levels.size());
    std::vector<double> value(n_levels), th(n_levels);
    for (int e = 0; e < n_levels; ++e) {
        const int lvl = quadrature_level(pyramid, levels[e], config);
        value[e] = estimate_batch(pyramid, lvl, config.kernel,
                                  window_single(theta_hat, levels[e]), x)[0];
        th[e] = threshold(levels[e], config);
    }
    for (int k = 0; k < n_levels; ++k) {
        bool ok = true;
        for (int e = k; e < n_levels && ok; ++e) ok = std::fabs(value[k] - value[e]) <= th[e];
        if (ok) return levels[k];
    }
    return levels.back();
}

SelectionTrace select_estimate(const Observation& obs, Vec2 x, const SelectorConfig& config) {
    const SelectorEngine engine(build_pyramid(obs), x, config);
    return engine.run(0);
}

}  // namespace silab
