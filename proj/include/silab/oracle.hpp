#pragma once

#include <functional>
#include <vector>

#include "silab/common.hpp"
#include "silab/estimator.hpp"
#include "silab/kernels.hpp"
#include "silab/noise_field.hpp"

namespace silab {

// ============================================================================
// Oracle-side quantities.  Everything here sees the true link f; the adaptive
// machinery never does.  The central object is the bias functional
//
//     Delta(h, z) = sup_{delta <= h} |(1/delta) Int K((u-z)/delta) (f(u) - f(z)) du|
//
// together with its running-average (maximal) version, their max Delta*, and
// the benchmark bandwidth
//
//     h* = sup{ h in [eps^2, 1] : sqrt(h) Delta*(h, y) <= |K|_inf eps sqrt(ln(1/eps)) }.
// ============================================================================

struct BiasProfile {
    Kernel1D kernel;
    std::function<double(double)> link;
    int levels_per_octave = 8;       // dyadic refinement of the delta and h ladders
    int quadrature_per_unit = 2048;  // midpoint density of all univariate integrals
};

// Reference (pointwise) implementations of the bias functionals.  The sup over
// delta runs down the dyadic ladder {h 2^{-j/P}} until the smoothing integral
// would keep fewer than four midpoint nodes; below that width the ladder
// degenerates to the single level delta = h.
double delta(const BiasProfile& profile, double h, double z);

// sup over dyadic a in [1/quadrature_per_unit, 1] of the window averages
// (1/2a) Int_{y-a}^{y+a} Delta(h, z) dz.
double maximal_delta(const BiasProfile& profile, double h, double y);

double delta_star(const BiasProfile& profile, double h, double y);

// ----------------------------------------------------------------------------
// Shared table for bandwidth scans and sweeps.  Precomputes the bias ladder
// over a z row once (the expensive part), so every h level, every y in
// [y_lo, y_hi], and every eps with eps^2 >= h_floor reuses it.  On ladder
// bandwidths and z nodes the table reproduces the reference functions.
// ----------------------------------------------------------------------------

class OracleTable {
  public:
    OracleTable(BiasProfile profile, double y_lo, double y_hi, double h_floor);

    // descending ladder 2^{-k/P} from 1 down to h_floor
    const std::vector<double>& bandwidth_levels() const { return h_levels_; }

    double delta_at(double h, double z) const;
    double maximal_at(double h, double y) const;
    double star_at(double h, double y) const;

    // z quadrature grid carrying the delta rows: z_node(i) = z0 + i/Q over
    // [y_lo - 1, y_hi + 1], the only z values delta_at accepts
    int z_count() const { return delta_.empty() ? 0 : static_cast<int>(delta_[0].size()); }
    double z_node(int i) const { return z0_ + i * dz_; }
    double z_spacing() const { return dz_; }

    // Largest ladder level in [eps^2, 1] passing the bias constraint; the
    // off-ladder endpoint eps^2 is checked last with the neighbouring ladder
    // bias value (conservatively large).  Throws when the set is empty.
    double bandwidth(double epsilon, double y) const;

  private:
    int level_index(double h) const;
    double star_level(int level, double y) const;
    double window_average(int level, double y, double a) const;

    BiasProfile p_;
    double y_lo_ = 0.0, y_hi_ = 0.0;
    double z0_ = 0.0;   // first z node; spacing 1/quadrature_per_unit
    double dz_ = 0.0;
    int stop_level_ = 0;  // deepest level still resolved by >= 4 quadrature nodes
    std::vector<double> h_levels_;
    std::vector<std::vector<double>> delta_;   // [level][z node]
    std::vector<std::vector<double>> prefix_;  // [level][z node + 1]
};

// ----------------------------------------------------------------------------
// Benchmark bandwidth and risk bound.
// ----------------------------------------------------------------------------

struct OracleResult {
    double h_star = 0.0;
    double risk_bound = 0.0;
    double c_r = 0.0;
};

// [E(1 + |xi|)^r]^{1/r} for standard normal xi, r >= 1.
double c_r_constant(double r);

// c_r [ |K|_inf^4 eps^2 ln(1/eps) / h_star ]^{1/2}
double oracle_risk_bound(double h_star, double epsilon, double r, const Kernel1D& kernel);

double oracle_bandwidth(const BiasProfile& profile, double epsilon, double y);

OracleResult oracle_summary(const BiasProfile& profile, double epsilon, double r, double y);

// The benchmark estimator itself: the single window at the true direction and
// the oracle bandwidth.
double oracle_estimate(const Observation& obs, const ProductKernel& kernel,
                       Vec2 theta_true, double h_star, Vec2 x);

// Continuum response of a window to the noiseless field f(t' theta0):
// Int K(u)K(v) f(x' theta0 + alpha u + gamma v) du dv over [-1/2,1/2]^2 by
// midpoint quadrature (bias diagnostics and expected selector statistics).
double window_response(const Kernel1D& kernel, const std::function<double(double)>& link,
                       Vec2 theta0, const KernelWindow& window, Vec2 x, int quad_n = 512);

}  // namespace silab
