#include "silab/risk_harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

namespace silab {

namespace {

int window_level(const FieldPyramid& pyramid, double h, int cells) {
    return pyramid.finest_level_with_step_at_most(h / cells);
}

}  // namespace

// ==== procedures ==========================================================

Procedure adaptive_procedure(const SelectorConfig& config) {
    config.validate();
    Procedure proc;
    proc.name = "adaptive";
    proc.bind = [config](const FieldPyramid& pyramid, Vec2 x) -> BoundProcedure {
        auto engine = std::make_shared<SelectorEngine>(pyramid, x, config);
        return [engine](int column) { return engine->run(column).estimate; };
    };
    return proc;
}

Procedure oracle_procedure(const BiasProfile& profile, Vec2 theta0, double epsilon,
                           int quadrature_cells_per_bandwidth) {
    check_epsilon(epsilon, NoiseMode::on);
    require(std::fabs(theta0.norm() - 1.0) <= 1e-12, "theta0 must be a unit vector");
    require(quadrature_cells_per_bandwidth >= 2,
            "quadrature_cells_per_bandwidth must be >= 2");
    const int cells = quadrature_cells_per_bandwidth;
    // h* depends on the probe only through y = x . theta0; probes repeat
    // across chunks, so the ladder scan is worth caching
    auto cache = std::make_shared<std::map<double, double>>();
    Procedure proc;
    proc.name = "oracle";
    proc.bind = [profile, theta0, epsilon, cells,
                 cache](const FieldPyramid& pyramid, Vec2 x) -> BoundProcedure {
        const double y = theta0.dot(x);
        auto hit = cache->find(y);
        if (hit == cache->end())
            hit = cache->emplace(y, oracle_bandwidth(profile, epsilon, y)).first;
        const double h_star = hit->second;
        const ProductKernel kernel{profile.kernel};
        auto est = std::make_shared<std::vector<double>>(
            estimate_batch(pyramid, window_level(pyramid, h_star, cells), kernel,
                           window_single(theta0, h_star), x));
        return [est](int column) { return est->at(static_cast<std::size_t>(column)); };
    };
    return proc;
}

Procedure fixed_procedure(const ProductKernel& kernel, Vec2 theta, double h,
                          int quadrature_cells_per_bandwidth) {
    require(std::fabs(theta.norm() - 1.0) <= 1e-12, "theta must be a unit vector");
    require(h > 0.0 && h <= 1.0, "bandwidth must lie in (0, 1]");
    require(quadrature_cells_per_bandwidth >= 2,
            "quadrature_cells_per_bandwidth must be >= 2");
    const int cells = quadrature_cells_per_bandwidth;
    Procedure proc;
    proc.name = "fixed";
    proc.bind = [kernel, theta, h, cells](const FieldPyramid& pyramid,
                                          Vec2 x) -> BoundProcedure {
        auto est = std::make_shared<std::vector<double>>(estimate_batch(
            pyramid, window_level(pyramid, h, cells), kernel, window_single(theta, h), x));
        return [est](int column) { return est->at(static_cast<std::size_t>(column)); };
    };
    return proc;
}

// ==== Monte Carlo risks ===================================================

void RiskConfig::validate() const {
    require(r >= 1.0, "risk order r must be >= 1");
    require(replicates >= 1, "replicates must be >= 1");
    require(batch >= 1, "batch must be >= 1");
}

namespace {

struct MomentAccumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    int count = 0;

    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++count;
    }

    RiskResult finish(double r) const {
        RiskResult out;
        out.replicates = count;
        out.moment = sum / count;
        out.risk = std::pow(out.moment, 1.0 / r);
        if (count > 1 && out.moment > 0.0) {
            const double var =
                std::max(0.0, sum_sq / count - out.moment * out.moment) * count /
                (count - 1.0);
            const double se_moment = std::sqrt(var / count);
            out.std_error = se_moment * out.risk / (r * out.moment);
        }
        return out;
    }
};

}  // namespace

RiskResult pointwise_risk(const Procedure& proc, const std::function<double(Vec2)>& F,
                          double epsilon, Vec2 x, const RiskConfig& config) {
    config.validate();
    require(static_cast<bool>(proc.bind), "procedure is unbound");
    check_epsilon(epsilon, config.noise);
    const double truth = F(x);
    const std::vector<double> samples = field_samples(F, config.grid);

    MomentAccumulator acc;
    for (int done = 0; done < config.replicates;) {
        const int take = std::min(config.batch, config.replicates - done);
        const FieldPyramid pyramid =
            simulate_pyramid(samples, epsilon, config.grid, config.master_seed,
                             static_cast<std::uint64_t>(done), take, config.noise);
        const BoundProcedure bound = proc.bind(pyramid, x);
        for (int b = 0; b < take; ++b)
            acc.add(std::pow(std::fabs(bound(b) - truth), config.r));
        done += take;
    }
    return acc.finish(config.r);
}

RiskResult global_risk(const Procedure& proc, const std::function<double(Vec2)>& F,
                       double epsilon, const std::vector<Vec2>& probes,
                       const RiskConfig& config) {
    config.validate();
    require(static_cast<bool>(proc.bind), "procedure is unbound");
    require(!probes.empty(), "global risk needs at least one probe");
    check_epsilon(epsilon, config.noise);
    const std::vector<double> samples = field_samples(F, config.grid);

    MomentAccumulator acc;
    std::vector<double> row;
    std::vector<double> probe_moment(probes.size(), 0.0);
    for (int done = 0; done < config.replicates;) {
        const int take = std::min(config.batch, config.replicates - done);
        const FieldPyramid pyramid =
            simulate_pyramid(samples, epsilon, config.grid, config.master_seed,
                             static_cast<std::uint64_t>(done), take, config.noise);
        row.assign(static_cast<std::size_t>(take), 0.0);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            const double truth = F(probes[p]);
            const BoundProcedure bound = proc.bind(pyramid, probes[p]);
            for (int b = 0; b < take; ++b) {
                const double loss = std::pow(std::fabs(bound(b) - truth), config.r);
                row[static_cast<std::size_t>(b)] += loss;
                probe_moment[p] += loss;
            }
        }
        for (int b = 0; b < take; ++b)
            acc.add(row[static_cast<std::size_t>(b)] / static_cast<double>(probes.size()));
        done += take;
    }
    const RiskResult out = acc.finish(config.r);

    // global risk never exceeds the grid L_r norm of the pointwise risks
    // (here they agree up to summation order, so this doubles as an
    // aggregation check)
    double grid_lr_moment = 0.0;
    for (double m : probe_moment) grid_lr_moment += m / config.replicates;
    grid_lr_moment /= static_cast<double>(probes.size());
    require(out.moment <= grid_lr_moment * (1.0 + 1e-9) + 1e-300,
            "global risk exceeded the grid norm of pointwise risks");
    return out;
}

std::vector<Vec2> probe_grid(int per_axis) {
    require(per_axis >= 1, "probe grid needs per_axis >= 1");
    std::vector<Vec2> out;
    out.reserve(static_cast<std::size_t>(per_axis) * per_axis);
    for (int iy = 0; iy < per_axis; ++iy)
        for (int ix = 0; ix < per_axis; ++ix)
            out.push_back(Vec2{(ix + 0.5) / per_axis - 0.5, (iy + 0.5) / per_axis - 0.5});
    return out;
}

// ==== rate fits ===========================================================

double rate_abscissa(double epsilon) {
    require(epsilon > 0.0 && epsilon < 1.0, "rate abscissa needs epsilon in (0, 1)");
    return epsilon * std::sqrt(std::log(1.0 / epsilon));
}

double pointwise_exponent(double beta) {
    require(beta > 0.0, "beta must be positive");
    return 2.0 * beta / (2.0 * beta + 1.0);
}

double global_exponent(double beta, double p, double r) {
    require(beta > 0.0, "beta must be positive");
    require(p >= 1.0 && r >= 1.0, "p and r must be >= 1");
    const double lhs = (2.0 * beta + 1.0) * p;
    if (lhs >= r - 1e-12) return 2.0 * beta / (2.0 * beta + 1.0);
    return (beta - 1.0 / p + 1.0 / r) / (beta - 1.0 / p + 0.5);
}

RateFit rate_fit(const std::vector<double>& epsilons, const std::vector<double>& risks,
                 double theoretical_exponent) {
    require(epsilons.size() == risks.size(), "rate_fit needs matching lengths");
    require(epsilons.size() >= 4, "rate_fit needs at least four noise levels");
    std::vector<double> xs, ys;
    xs.reserve(epsilons.size());
    ys.reserve(risks.size());
    for (std::size_t i = 0; i < epsilons.size(); ++i) {
        require(risks[i] > 0.0, "rate_fit needs positive risks");
        xs.push_back(std::log(rate_abscissa(epsilons[i])));
        ys.push_back(std::log(risks[i]));
    }
    const LineFit line = fit_line(xs, ys);
    RateFit fit;
    fit.slope = line.slope;
    fit.intercept = line.intercept;
    fit.residual_rms = line.residual_rms;
    fit.theoretical_exponent = theoretical_exponent;
    return fit;
}

// ==== threshold calibration ===============================================

Calibration calibrate_threshold(SelectorConfig config, const RiskConfig& mc,
                                double target) {
    config.validate();
    mc.validate();
    require(config.epsilon > 0.0, "calibration needs a positive noise level");
    require(mc.noise == NoiseMode::on, "calibration runs on live noise");
    require(target > 0.0 && target < 1.0, "target must lie in (0, 1)");
    require(scan_levels(config.epsilon, mc.grid, config.h_min_cells).size() >= 2,
            "calibration needs at least two bandwidth levels");

    std::vector<double> scales;
    scales.reserve(91);
    for (int k = 0; k <= 90; ++k) scales.push_back(std::pow(0.9, static_cast<double>(k)));

    // deepest consecutively passing ladder index per pure-noise column
    std::vector<int> deepest;
    deepest.reserve(static_cast<std::size_t>(mc.replicates));
    const std::vector<double> zero;
    for (int done = 0; done < mc.replicates;) {
        const int take = std::min(mc.batch, mc.replicates - done);
        const FieldPyramid pyramid =
            simulate_pyramid(zero, config.epsilon, mc.grid, mc.master_seed,
                             static_cast<std::uint64_t>(done), take);
        const SelectorEngine engine(pyramid, Vec2{0.0, 0.0}, config);
        for (int b = 0; b < take; ++b) {
            int k = 0;
            while (k < static_cast<int>(scales.size()) &&
                   engine.run(b, scales[static_cast<std::size_t>(k)]).h_hat == 1.0)
                ++k;
            deepest.push_back(k - 1);
        }
        done += take;
    }

    // smallest scale whose rejection share stays within target
    Calibration cal;
    cal.replicates = mc.replicates;
    for (int k = static_cast<int>(scales.size()) - 1; k >= 0; --k) {
        int rejected = 0;
        for (int d : deepest) rejected += d < k ? 1 : 0;
        const double share = static_cast<double>(rejected) / mc.replicates;
        if (share <= target) {
            cal.threshold_scale = scales[static_cast<std::size_t>(k)];
            cal.false_rejection = share;
            return cal;
        }
    }
    throw guard_error("no threshold scale meets the false-rejection target");
}

// ==== oracle-ratio study ==================================================

double c_r1_constant(double r, const Kernel1D& kernel) {
    require(r >= 1.0, "risk order r must be >= 1");
    const double lam = lambda_const(kernel);
    return 8.0 * (lam + std::sqrt(4.0 * r + 2.0) + 1.0) +
           c_r_constant(r) * ((2.0 + std::sqrt(2.0)) * lam + 2.0) + 1.0;
}

double c_r2_constant(double r, double bound_M, const Kernel1D& kernel) {
    require(r >= 1.0, "risk order r must be >= 1");
    require(bound_M >= 0.0, "bound_M must be >= 0");
    return std::pow(2.0, 1.0 / r) *
           (2.0 * bound_M + lambda_const(kernel) * c_r_constant(2.0 * r));
}

OracleRatioStudy oracle_ratio_study(const SingleIndexSignal& signal,
                                    const std::vector<double>& epsilons, Vec2 x,
                                    SelectorConfig selector, const RiskConfig& mc,
                                    bool calibrate) {
    mc.validate();
    require(!epsilons.empty(), "sweep needs at least one noise level");
    require(mc.noise == NoiseMode::on, "risk sweeps run on live noise");
    require(signal.bound_M > 0.0, "signal carries no sup bound");

    selector.r = mc.r;
    selector.bound_M = signal.bound_M;
    const BiasProfile profile{selector.kernel.axis, signal.link};
    const double sup_sq = selector.kernel.sup_norm();

    OracleRatioStudy study;
    study.c_r1 = c_r1_constant(mc.r, selector.kernel.axis);
    study.c_r2 = c_r2_constant(mc.r, signal.bound_M, selector.kernel.axis);

    const std::function<double(Vec2)> field = signal;
    const double y = signal.theta0.dot(x);

    // one bias table at the deepest floor serves every noise level: the
    // ladder below eps^2 is simply never scanned
    double eps_min = epsilons.front();
    for (double eps : epsilons) {
        check_epsilon(eps, NoiseMode::on);
        eps_min = std::min(eps_min, eps);
    }
    const OracleTable table(profile, y, y, eps_min * eps_min);

    for (double eps : epsilons) {
        SelectorConfig cfg = selector;
        cfg.epsilon = eps;

        SweepRow row;
        row.epsilon = eps;
        if (calibrate) {
            RiskConfig cal_mc = mc;
            cal_mc.master_seed ^= calibration_seed_tag;
            const Calibration cal = calibrate_threshold(cfg, cal_mc);
            cfg.threshold_scale = cal.threshold_scale;
            row.false_rejection = cal.false_rejection;
        }
        row.threshold_scale = cfg.threshold_scale;

        const RiskResult adaptive = pointwise_risk(adaptive_procedure(cfg), field, eps, x, mc);
        row.adaptive_risk = adaptive.risk;
        row.adaptive_se = adaptive.std_error;

        // the oracle procedure at a known h* is a fixed-window estimate
        row.h_star = table.bandwidth(eps, y);
        const RiskResult oracle = pointwise_risk(
            fixed_procedure(selector.kernel, signal.theta0, row.h_star,
                            cfg.quadrature_cells_per_bandwidth),
            field, eps, x, mc);
        row.oracle_risk = oracle.risk;
        row.oracle_se = oracle.std_error;

        row.oracle_bound = oracle_risk_bound(row.h_star, eps, mc.r, profile.kernel);
        const double lg = std::sqrt(std::log(1.0 / eps));
        row.certified_bound = study.c_r1 * sup_sq * eps * lg / std::sqrt(row.h_star) +
                              study.c_r2 * sup_sq * eps * lg;
        row.ratio = row.adaptive_risk / row.oracle_bound;
        study.rows.push_back(row);
    }
    return study;
}

// ==== global-rate study ===================================================

GlobalRateStudy global_rate_study(const SingleIndexSignal& signal,
                                  const std::vector<double>& epsilons,
                                  const std::vector<Vec2>& probes, SelectorConfig selector,
                                  const RiskConfig& mc, double beta, double p,
                                  bool calibrate) {
    mc.validate();
    require(epsilons.size() >= 4, "global rate fits need at least four noise levels");
    require(mc.noise == NoiseMode::on, "risk sweeps run on live noise");
    require(signal.bound_M > 0.0, "signal carries no sup bound");

    selector.r = mc.r;
    selector.bound_M = signal.bound_M;
    const std::function<double(Vec2)> field = signal;

    GlobalRateStudy study;
    std::vector<double> risks;
    for (double eps : epsilons) {
        SelectorConfig cfg = selector;
        cfg.epsilon = eps;

        GlobalSweepRow row;
        row.epsilon = eps;
        if (calibrate) {
            RiskConfig cal_mc = mc;
            cal_mc.master_seed ^= calibration_seed_tag;
            const Calibration cal = calibrate_threshold(cfg, cal_mc);
            cfg.threshold_scale = cal.threshold_scale;
            row.false_rejection = cal.false_rejection;
        }
        row.threshold_scale = cfg.threshold_scale;

        const RiskResult res = global_risk(adaptive_procedure(cfg), field, eps, probes, mc);
        row.risk = res.risk;
        row.std_error = res.std_error;
        study.rows.push_back(row);
        risks.push_back(res.risk);
    }

    study.fit = rate_fit(epsilons, risks, global_exponent(beta, p, mc.r));
    const double lhs = (2.0 * beta + 1.0) * p;
    if (std::fabs(lhs - mc.r) <= 1e-12)
        study.regime = "middle";
    else
        study.regime = lhs > mc.r ? "dense" : "sparse";
    return study;
}

// ==== L_p bias scaling ====================================================

double bias_lp_norm(const OracleTable& table, double h, double p) {
    require(p >= 1.0, "p must be >= 1");
    double sum = 0.0;
    int used = 0;
    for (int i = 0; i < table.z_count(); ++i) {
        const double z = table.z_node(i);
        if (z < -0.5 - 1e-12 || z > 0.5 + 1e-12) continue;
        sum += std::pow(table.delta_at(h, z), p) * table.z_spacing();
        ++used;
    }
    require(used >= 16, "bias table too coarse over [-1/2, 1/2]");
    return std::pow(sum, 1.0 / p);
}

}  // namespace silab
