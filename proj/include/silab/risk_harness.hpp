#pragma once

// ==========================================================================
// Monte Carlo risk harness
// ==========================================================================
// Pointwise and global risks
//
//     R_{r,x} = (E |F^(x) - F(x)|^r)^{1/r},
//     R_r     = ((1/|probes|) sum_x E |F^(x) - F(x)|^r)^{1/r},
//
// epsilon sweeps with rate fits against powers of eps sqrt(ln(1/eps)),
// threshold calibration on pure noise, and the oracle-ratio study that pits
// the adaptive estimator against its benchmark bound at every noise level.
// Estimation procedures are pluggable; replicates are simulated in chunks
// with a counter-based seed schedule, so results do not depend on the chunk
// size and reruns are bit-identical.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "silab/common.hpp"
#include "silab/estimator.hpp"
#include "silab/noise_field.hpp"
#include "silab/oracle.hpp"
#include "silab/selector.hpp"
#include "silab/signals.hpp"

namespace silab {

// ==== procedures ==========================================================

// A procedure binds to one simulated batch at one probe, hoisting whatever
// is shared across the batch (selector tables, the oracle bandwidth), and
// then maps column -> estimate.
using BoundProcedure = std::function<double(int column)>;

struct Procedure {
    std::string name;
    std::function<BoundProcedure(const FieldPyramid&, Vec2)> bind;
};

// full two-stage selection per column
Procedure adaptive_procedure(const SelectorConfig& config);

// the benchmark: true direction, bandwidth h*(x . theta0) from the noiseless
// link, single-window estimate at the shared quadrature policy
Procedure oracle_procedure(const BiasProfile& profile, Vec2 theta0, double epsilon,
                           int quadrature_cells_per_bandwidth = 16);

// fixed direction and bandwidth
Procedure fixed_procedure(const ProductKernel& kernel, Vec2 theta, double h,
                          int quadrature_cells_per_bandwidth = 16);

// ==== Monte Carlo risks ===================================================

struct RiskConfig {
    double r = 2.0;
    int replicates = 200;
    std::uint64_t master_seed = 1;
    GridSpec grid;
    int batch = 32;  // pyramid columns simulated per chunk
    NoiseMode noise = NoiseMode::on;

    void validate() const;
};

struct RiskResult {
    double risk = 0.0;       // (mean |err|^r)^{1/r}
    double std_error = 0.0;  // delta-method standard error of risk
    double moment = 0.0;     // mean |err|^r
    int replicates = 0;
};

RiskResult pointwise_risk(const Procedure& proc, const std::function<double(Vec2)>& F,
                          double epsilon, Vec2 x, const RiskConfig& config);

// Fubini route: per-replicate spatial average of |err|^r over the probes,
// then the Monte Carlo mean and r-th root.  Equals the probe-grid L_r norm
// of the pointwise moments up to summation order.
RiskResult global_risk(const Procedure& proc, const std::function<double(Vec2)>& F,
                       double epsilon, const std::vector<Vec2>& probes,
                       const RiskConfig& config);

// per_axis^2 midpoints tiling [-1/2,1/2]^2 with equal weights
std::vector<Vec2> probe_grid(int per_axis);

// ==== rate fits ===========================================================

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    double theoretical_exponent = 0.0;
};

double rate_abscissa(double epsilon);    // eps sqrt(ln(1/eps))
double pointwise_exponent(double beta);  // 2 beta / (2 beta + 1)

// exponent of eps sqrt(ln(1/eps)) in the global rate: 2 beta/(2 beta + 1)
// when (2 beta + 1) p >= r (the boundary case carries an extra log factor
// that is reported, never asserted), else
// (beta - 1/p + 1/r) / (beta - 1/p + 1/2)
double global_exponent(double beta, double p, double r);

// log risk regressed on log(eps sqrt(ln(1/eps))); >= 4 distinct levels
RateFit rate_fit(const std::vector<double>& epsilons, const std::vector<double>& risks,
                 double theoretical_exponent);

// ==== threshold calibration ===============================================

struct Calibration {
    double threshold_scale = 0.0;
    double false_rejection = 0.0;  // share of pure-noise columns with h^ < 1
    int replicates = 0;
};

// Smallest scale on the ladder 0.9^k, k = 0..90, whose pure-noise false
// rejection of the full bandwidth stays at or below target.  Per column the
// ladder is scanned from 1.0 downward and the deepest consecutively passing
// scale is recorded, so occasional non-monotone flips count conservatively.
Calibration calibrate_threshold(SelectorConfig config, const RiskConfig& mc,
                                double target = 0.05);

// XORed into the master seed for calibration noise, so the calibrated scale
// is never tuned on the replicates it is later measured on
inline constexpr std::uint64_t calibration_seed_tag = 0x9E3779B97F4A7C15ull;

// ==== oracle-ratio study ==================================================

// 8 [Lambda + sqrt(4r+2) + 1] + c_r [(2 + sqrt 2) Lambda + 2] + 1
double c_r1_constant(double r, const Kernel1D& kernel);
// 2^{1/r} [2 M + Lambda c_{2r}]
double c_r2_constant(double r, double bound_M, const Kernel1D& kernel);

struct SweepRow {
    double epsilon = 0.0;
    double threshold_scale = 0.0;
    double false_rejection = 0.0;
    double adaptive_risk = 0.0;
    double adaptive_se = 0.0;
    double oracle_risk = 0.0;
    double oracle_se = 0.0;
    double h_star = 0.0;
    double oracle_bound = 0.0;     // c_r [ |K|^4 eps^2 ln(1/eps) / h* ]^{1/2}
    double certified_bound = 0.0;  // C_{r,1} |K|^2 eps sqrt(ln(1/eps)/h*) + C_{r,2} |K|^2 eps sqrt(ln(1/eps))
    double ratio = 0.0;            // adaptive_risk / oracle_bound
};

struct OracleRatioStudy {
    double c_r1 = 0.0;
    double c_r2 = 0.0;
    std::vector<SweepRow> rows;
};

// For each eps: calibrate (optional), measure the adaptive and benchmark
// risks at x, and evaluate the certified bound with the computed constants.
// The selector inherits r, eps, bound_M and the calibrated scale per row;
// calibration noise is seeded disjointly from the experiment noise.
OracleRatioStudy oracle_ratio_study(const SingleIndexSignal& signal,
                                    const std::vector<double>& epsilons, Vec2 x,
                                    SelectorConfig selector, const RiskConfig& mc,
                                    bool calibrate = true);

// ==== global-rate study ===================================================

struct GlobalSweepRow {
    double epsilon = 0.0;
    double threshold_scale = 0.0;
    double false_rejection = 0.0;
    double risk = 0.0;
    double std_error = 0.0;
};

struct GlobalRateStudy {
    std::vector<GlobalSweepRow> rows;
    RateFit fit;          // log risk vs log(eps sqrt(ln(1/eps)))
    std::string regime;   // dense / middle / sparse by (2 beta + 1) p vs r
};

// Adaptive global risk over the probe grid per eps, fitted against the
// theoretical exponent for (beta, p, mc.r).  Needs >= 4 noise levels.  The
// middle regime carries an unresolved log factor, so its fit is reported but
// should never be asserted against.
GlobalRateStudy global_rate_study(const SingleIndexSignal& signal,
                                  const std::vector<double>& epsilons,
                                  const std::vector<Vec2>& probes, SelectorConfig selector,
                                  const RiskConfig& mc, double beta, double p,
                                  bool calibrate = true);

// ==== L_p bias scaling ====================================================

// (Int_{-1/2}^{1/2} |Delta(h, z)|^p dz)^{1/p} summed over the table's own z
// nodes; h must sit on the table's ladder and the table must cover
// [-1/2, 1/2].
double bias_lp_norm(const OracleTable& table, double h, double p);

}  // namespace silab
