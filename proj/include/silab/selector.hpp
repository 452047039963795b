#pragma once

#include <iosfwd>
#include <vector>

#include "silab/estimator.hpp"
#include "silab/kernels.hpp"
#include "silab/noise_field.hpp"

namespace silab {

// ============================================================================
// Two-stage adaptive selection over direction x bandwidth.
//
// Stage one scans a direction net against a dyadic bandwidth grid with the
// pair/single comparison statistic
//
//     R_(theta,h)(x) = max_{eta <= h} { max_nu |Fhat_(theta,eta)(nu,eta)(x)
//                                              - Fhat_(nu,eta)(x)| - TH(eta) }
//
// and keeps P(x) = {(theta,h) : R <= 0}.  The selected direction is a member
// of P at the largest such h (smallest first coordinate on ties, then
// smallest second).  Stage two runs the classical bandwidth scan at the
// selected direction:
//
//     hhat = max{h : |Fhat_(theta,h)(x) - Fhat_(theta,eta)(x)| <= TH(eta)
//                    for all grid eta <= h},
//
// and the final estimate is Fhat_(theta_hat, hhat)(x).
// ============================================================================

struct SelectorConfig {
    double r = 2.0;             // risk order entering the threshold
    double epsilon = 0.0;       // noise level; 0 switches the threshold off
    int n_directions = 256;     // full-circle direction net, must be even
    ProductKernel kernel{make_default_kernel()};
    double threshold_scale = 1.0;   // multiplies TH; 1 keeps the plain formula

    // Discretization knobs.  Bandwidths below h_min_cells grid steps are not
    // scanned (the window would be unresolved); each estimator integrates on
    // the coarsest pyramid level that still puts quadrature_cells_per_bandwidth
    // cells across the window length.
    int h_min_cells = 4;
    int quadrature_cells_per_bandwidth = 16;

    // Optional envelope bound on the signal.  When positive, validate()
    // enforces epsilon <= epsilon_guard_bound(bound_M, kernel); when zero the
    // caller opted out and no check runs.
    double bound_M = 0.0;

    void validate() const;
};

// Lambda(K, Q) = 8 sqrt(ln(1 + 2 Q ||K||_inf)) + 50 with the univariate
// kernel's sup norm and certified Lipschitz constant Q.
double lambda_const(const Kernel1D& kernel);
double lambda_const(const ProductKernel& kernel);

// TH(eta) = 2 ||K||_inf^2 [Lambda + sqrt(4r+2) + 1] eps sqrt(eta^-1 ln(1/eps)),
// times threshold_scale.  ||K||_inf is again univariate, so the square is the
// sup norm of the product kernel.  epsilon == 0 gives 0 (deterministic mode).
double threshold(double eta, const SelectorConfig& config);

// Largest admissible noise level exp{-max[1, (2 M ||K||_1 / ||K||_inf)^2]}
// for signals bounded by M.
double epsilon_guard_bound(double bound_M, const ProductKernel& kernel);

// Dyadic bandwidth grid {2^-k} cap [eps^2, 1], descending; requires eps > 0.
std::vector<double> bandwidth_grid(double epsilon);

// The subset of the grid the procedure actually scans on a discrete
// observation: levels with h >= h_min_cells * grid.step().  eps == 0 keeps
// every resolved level.  Throws when even h = 1 is unresolved.
std::vector<double> scan_levels(double epsilon, const GridSpec& grid, int h_min_cells);

// Uniform net of n directions over the full circle.  The second half is the
// exact negation of the first, so antipodal pairs are bitwise consistent.
std::vector<Vec2> selection_net(int n_directions);

// ----------------------------------------------------------------------------
// Selection records.
// ----------------------------------------------------------------------------

struct SelectionTrace {
    std::vector<double> bandwidth_grid;  // scanned levels, descending
    std::vector<Vec2> directions;        // full-circle net
    std::vector<double> R_values;        // [dir * n_levels + level]
    Vec2 theta_hat{1.0, 0.0};
    bool p_nonempty = false;
    double h_tilde = 0.0;  // meaningful only when p_nonempty
    double h_hat = 0.0;
    double estimate = 0.0;
    bool fallback_used = false;

    double r_value(int dir, int level) const {
        return R_values[static_cast<std::size_t>(dir) * bandwidth_grid.size() + level];
    }
    bool in_p(int dir, int level) const { return r_value(dir, level) <= 0.0; }

    // One row per (dir, level) with the R value and P membership, then a
    // trailing summary comment row.
    void write_csv(std::ostream& out) const;
};

struct FirstStageResult {
    std::vector<double> bandwidth_grid;
    std::vector<Vec2> directions;
    std::vector<char> p_membership;  // [dir * n_levels + level]
    Vec2 theta_hat{1.0, 0.0};
    bool p_nonempty = false;
    double h_tilde = 0.0;
    bool fallback_used = false;
};

// ----------------------------------------------------------------------------
// Batched engine.  Construction evaluates, per scanned level, every single
// estimator on the direction net and every canonical direction pair, for all
// pyramid columns at once; selections for individual columns are then cheap
// table folds.  Estimates are exactly even in the direction, so only the half
// net is evaluated and antipodal net entries share values.
// ----------------------------------------------------------------------------

class SelectorEngine {
  public:
    SelectorEngine(const FieldPyramid& pyramid, Vec2 x, const SelectorConfig& config);

    int columns() const { return batch_; }
    const std::vector<double>& levels() const { return levels_; }
    const std::vector<Vec2>& net() const { return net_; }

    SelectionTrace run(int column) const;
    // same rule under a replacement threshold_scale; the cached tables are
    // scale-free, so calibration can rescan scales without rebuilding them
    SelectionTrace run(int column, double threshold_scale) const;

  private:
    double single_at(int level, int axis, int column) const {
        return singles_[(static_cast<std::size_t>(level) * axes_.size() + axis) * batch_ +
                        column];
    }
    double gap_at(int level, int axis, int column) const {
        return gaps_[(static_cast<std::size_t>(level) * axes_.size() + axis) * batch_ + column];
    }

    SelectorConfig config_;
    Vec2 x_;
    int batch_ = 0;
    std::vector<double> levels_;      // scanned bandwidths, descending
    std::vector<double> thresholds_;  // TH per level at threshold_scale = 1
    std::vector<Vec2> axes_;          // half net, size n_directions / 2
    std::vector<Vec2> net_;           // full net, size n_directions
    std::vector<double> singles_;     // [level][axis][column]
    std::vector<double> gaps_;        // [level][axis][column]: max_nu |pair - single|
};

// ----------------------------------------------------------------------------
// One-shot interface on a single observation.  compute_R recomputes every
// estimator it needs directly (no shared tables); the engine must reproduce
// its values exactly, which the tests pin down.
// ----------------------------------------------------------------------------

// The scanned double supremum for one (theta, h); theta need not lie on the
// net, h must be a scanned level, x in [-1/2, 1/2]^2.
double compute_R(const Observation& obs, Vec2 theta, double h, Vec2 x,
                 const SelectorConfig& config);

FirstStageResult first_stage(const Observation& obs, Vec2 x, const SelectorConfig& config);

double second_stage(const Observation& obs, Vec2 theta_hat, Vec2 x,
                    const SelectorConfig& config);

SelectionTrace select_estimate(const Observation& obs, Vec2 x, const SelectorConfig& config);

}  // namespace silab
