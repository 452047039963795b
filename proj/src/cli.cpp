#include "silab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "silab/lower_bound.hpp"

namespace fs = std::filesystem;

namespace silab {

namespace {

constexpr const char* kToolVersion = "silab 1.0";

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string flag_text(bool v) { return v ? "true" : "false"; }

// ==== report staging ======================================================
// Bodies accumulate in memory and reach disk only after the whole command
// succeeded, each through a tmp file + rename, so interrupted or failed runs
// leave no partial reports behind.

class Reports {
  public:
    explicit Reports(const RunConfig& config) : config_(config) {}

    std::ostringstream& stage(const std::string& name) {
        staged_.emplace_back(name, std::ostringstream{});
        return staged_.back().second;
    }

    // returns the comma-joined file list for the RESULT line
    std::string commit() {
        const fs::path dir(config_.out_dir);
        fs::create_directories(dir);
        std::vector<fs::path> written;
        std::string joined;
        try {
            for (const auto& [name, body] : staged_) {
                const fs::path final_path = dir / name;
                const fs::path tmp_path = dir / (name + ".tmp");
                {
                    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
                    require(out.good(), "cannot open " + tmp_path.string());
                    write_header(out);
                    out << body.str();
                    require(out.good(), "write failed for " + tmp_path.string());
                }
                fs::rename(tmp_path, final_path);
                written.push_back(final_path);
                if (!joined.empty()) joined += ',';
                joined += name;
            }
        } catch (...) {
            for (const auto& [name, body] : staged_) {
                std::error_code ec;
                fs::remove(dir / (name + ".tmp"), ec);
            }
            for (const fs::path& p : written) {
                std::error_code ec;
                fs::remove(p, ec);
            }
            throw;
        }
        return joined;
    }

  private:
    void write_header(std::ostream& out) const {
        const RunConfig& c = config_;
        out << "# tool = " << kToolVersion << "\n"
            << "# command = " << c.command << "\n"
            << "# signal = " << c.signal_preset() << "\n"
            << "# kernel = " << c.kernel << "\n"
            << "# epsilon = " << num(c.epsilon) << "\n"
            << "# r = " << num(c.r) << "\n"
            << "# beta = " << num(c.beta) << "\n"
            << "# L = " << num(c.L) << "\n"
            << "# p = " << num(c.p) << "\n"
            << "# theta-deg = " << num(c.theta_deg) << "\n"
            << "# n-grid = " << c.n_grid << "\n"
            << "# n-directions = " << c.n_directions << "\n"
            << "# replicates = " << c.replicates << "\n"
            << "# seed = " << c.seed << "\n"
            << "# threshold-scale = " << num(c.threshold_scale) << "\n"
            << "# jobs = " << c.jobs << "\n"
            << "# heavy = " << flag_text(c.heavy) << "\n"
            << "# dump-field = " << flag_text(c.dump_field) << "\n";
    }

    RunConfig config_;
    std::vector<std::pair<std::string, std::ostringstream>> staged_;
};

struct Summary {
    bool ok = true;
    std::vector<std::pair<std::string, std::string>> kv;

    void add(const std::string& key, const std::string& value) { kv.emplace_back(key, value); }
    void add(const std::string& key, double value) { kv.emplace_back(key, num(value)); }
};

// ==== commands ============================================================

Summary cmd_simulate(const RunConfig& config, Reports& reports) {
    const SingleIndexSignal signal = config.make_signal();
    const GridSpec grid{1.25, config.n_grid};
    const Observation obs = simulate(signal, config.epsilon, grid, config.seed, 0);

    std::ostringstream& body = reports.stage("simulate.csv");
    body << "# columns: ix,iy,t1,t2,increment\n";
    for (int iy = 0; iy < grid.n_per_axis; ++iy)
        for (int ix = 0; ix < grid.n_per_axis; ++ix) {
            const Vec2 t = grid.center(ix, iy);
            body << ix << ',' << iy << ',' << num(t.x) << ',' << num(t.y) << ','
                 << num(obs.increment(ix, iy)) << '\n';
        }

    if (config.dump_field) {
        std::ostringstream& field = reports.stage("field.csv");
        field << "# columns: ix,iy,t1,t2,field\n";
        const std::vector<double> samples = field_samples(signal, grid);
        for (int iy = 0; iy < grid.n_per_axis; ++iy)
            for (int ix = 0; ix < grid.n_per_axis; ++ix) {
                const Vec2 t = grid.center(ix, iy);
                field << ix << ',' << iy << ',' << num(t.x) << ',' << num(t.y) << ','
                      << num(samples[static_cast<std::size_t>(iy) * grid.n_per_axis + ix])
                      << '\n';
            }
    }

    Summary summary;
    summary.add("cells", std::to_string(grid.cells()));
    summary.add("epsilon", config.epsilon);
    return summary;
}

Summary cmd_estimate(const RunConfig& config, Reports& reports) {
    const SingleIndexSignal signal = config.make_signal();
    const GridSpec grid{1.25, config.n_grid};
    const Observation obs = simulate(signal, config.epsilon, grid, config.seed, 0);
    const Vec2 x{0.0, 0.0};
    const SelectorEngine engine(build_pyramid(obs), x, config.selector());
    const SelectionTrace trace = engine.run(0);

    std::ostringstream& body = reports.stage("estimate.csv");
    trace.write_csv(body);

    const double truth = signal(x);
    Summary summary;
    summary.ok = std::isfinite(trace.estimate);
    summary.add("theta1", trace.theta_hat.x);
    summary.add("theta2", trace.theta_hat.y);
    summary.add("h_hat", trace.h_hat);
    summary.add("estimate", trace.estimate);
    summary.add("truth", truth);
    summary.add("abs_error", std::fabs(trace.estimate - truth));
    summary.add("fallback", flag_text(trace.fallback_used));
    return summary;
}

Summary cmd_oracle(const RunConfig& config, Reports& reports) {
    const SingleIndexSignal signal = config.make_signal();
    const BiasProfile profile{config.make_kernel().axis, signal.link};
    const double y_span = 0.4;
    const OracleTable table(profile, -y_span, y_span, config.epsilon * config.epsilon);

    std::ostringstream& body = reports.stage("oracle.csv");
    body << "# columns: y,h_star,risk_bound\n";
    for (int k = 0; k <= 40; ++k) {
        const double y = -y_span + 2.0 * y_span * k / 40.0;
        const double h_star = table.bandwidth(config.epsilon, y);
        body << num(y) << ',' << num(h_star) << ','
             << num(oracle_risk_bound(h_star, config.epsilon, config.r, profile.kernel))
             << '\n';
    }

    Summary summary;
    summary.add("h_star_at_0", table.bandwidth(config.epsilon, 0.0));
    summary.add("c_r", c_r_constant(config.r));
    return summary;
}

Summary cmd_risk_sweep(const RunConfig& config, Reports& reports) {
    const SingleIndexSignal signal = config.make_signal();
    const Vec2 x{0.0, 0.0};
    const OracleRatioStudy study =
        oracle_ratio_study(signal, config.sweep_epsilons(), x, config.selector(),
                           config.mc(), config.threshold_scale == 0.0);

    std::ostringstream& body = reports.stage("risk_sweep.csv");
    body << "# C_r1 = " << num(study.c_r1) << "\n# C_r2 = " << num(study.c_r2) << "\n";
    body << "# columns: epsilon,x1,x2,estimator,risk,stderr,h_star,oracle_bound,"
            "certified_bound,ratio,threshold_scale,false_rejection\n";
    bool certified_ok = true;
    std::vector<double> eps, adaptive, log_eps, log_ratio;
    for (const SweepRow& row : study.rows) {
        const std::string shared = num(row.epsilon) + ",0,0,";
        const std::string tail = ',' + num(row.h_star) + ',' + num(row.oracle_bound) + ',' +
                                 num(row.certified_bound) + ',' + num(row.ratio) + ',' +
                                 num(row.threshold_scale) + ',' + num(row.false_rejection) +
                                 '\n';
        body << shared << "adaptive," << num(row.adaptive_risk) << ',' << num(row.adaptive_se)
             << tail;
        body << shared << "oracle," << num(row.oracle_risk) << ',' << num(row.oracle_se)
             << tail;
        certified_ok = certified_ok && row.adaptive_risk <= row.certified_bound;
        eps.push_back(row.epsilon);
        adaptive.push_back(row.adaptive_risk);
        log_eps.push_back(std::log(row.epsilon));
        log_ratio.push_back(std::log(row.ratio));
    }

    const RateFit fit = rate_fit(eps, adaptive, pointwise_exponent(config.beta));
    const LineFit drift = fit_line(log_eps, log_ratio);

    std::ostringstream& summary_csv = reports.stage("risk_sweep_summary.csv");
    summary_csv << "# columns: kind,slope,intercept,residual_rms,theoretical_exponent\n";
    summary_csv << "risk_vs_abscissa," << num(fit.slope) << ',' << num(fit.intercept) << ','
                << num(fit.residual_rms) << ',' << num(fit.theoretical_exponent) << '\n';
    summary_csv << "ratio_vs_eps," << num(drift.slope) << ',' << num(drift.intercept) << ','
                << num(drift.residual_rms) << ",0\n";

    Summary summary;
    summary.ok = certified_ok && std::isfinite(fit.slope) && std::isfinite(drift.slope);
    summary.add("slope", fit.slope);
    summary.add("theoretical_exponent", fit.theoretical_exponent);
    summary.add("ratio_slope", drift.slope);
    summary.add("certified_bound", certified_ok ? "pass" : "fail");
    return summary;
}

Summary cmd_rate_fit(const RunConfig& config, Reports& reports) {
    const SingleIndexSignal signal = config.make_signal();
    const GlobalRateStudy study = global_rate_study(
        signal, config.sweep_epsilons(), probe_grid(5), config.selector(), config.mc(),
        config.beta, config.p, config.threshold_scale == 0.0);

    std::ostringstream& body = reports.stage("rate_fit.csv");
    body << "# columns: epsilon,risk,stderr,threshold_scale,false_rejection\n";
    for (const GlobalSweepRow& row : study.rows)
        body << num(row.epsilon) << ',' << num(row.risk) << ',' << num(row.std_error) << ','
             << num(row.threshold_scale) << ',' << num(row.false_rejection) << '\n';

    std::ostringstream& summary_csv = reports.stage("rate_fit_summary.csv");
    summary_csv << "# columns: slope,intercept,residual_rms,theoretical_exponent,regime\n";
    summary_csv << num(study.fit.slope) << ',' << num(study.fit.intercept) << ','
                << num(study.fit.residual_rms) << ',' << num(study.fit.theoretical_exponent)
                << ',' << study.regime << '\n';

    Summary summary;
    summary.ok = std::isfinite(study.fit.slope);
    summary.add("slope", study.fit.slope);
    summary.add("theoretical_exponent", study.fit.theoretical_exponent);
    summary.add("regime", study.regime);
    return summary;
}

Summary cmd_lb_check(const RunConfig& config, Reports& reports) {
    const double b = 0.5;
    const HypothesisFamily family =
        hypothesis_family(config.beta, config.L, config.epsilon, b, Vec2{0.0, 0.0});
    const LBReport report = check_family(family, config.epsilon);

    std::ostringstream& body = reports.stage("lb_check.csv");
    body << "# b = " << num(b) << "\n# N = " << family.N << "\n";
    body << "# columns: lambda_eps,lambda_spread,max_cross_inner,max_cross_i,max_cross_j,"
            "max_sq_norm,max_norm_i,c_used,rho_used,smallest_passing_c,bound_value,"
            "equal_separation_ok,cross_ok,norm_ok\n";
    body << num(report.lambda_eps) << ',' << num(report.lambda_spread) << ','
         << num(report.max_cross_inner) << ',' << report.max_cross_i << ','
         << report.max_cross_j << ',' << num(report.max_sq_norm) << ',' << report.max_norm_i
         << ',' << num(report.c_used) << ',' << num(report.rho_used) << ','
         << num(report.smallest_passing_c) << ',' << num(report.bound_value) << ','
         << (report.equal_separation_ok ? 1 : 0) << ',' << (report.cross_ok ? 1 : 0) << ','
         << (report.norm_ok ? 1 : 0) << '\n';

    Summary summary;
    summary.ok = report.all_ok();
    summary.add("n_hypotheses", std::to_string(family.N));
    summary.add("lambda", report.lambda_eps);
    summary.add("smallest_c", report.smallest_passing_c);
    summary.add("bound", report.bound_value);
    summary.add("separation", flag_text(report.equal_separation_ok));
    summary.add("cross", flag_text(report.cross_ok));
    summary.add("norm", flag_text(report.norm_ok));
    return summary;
}

Summary cmd_calibrate(const RunConfig& config, Reports& reports) {
    const double target = 0.05;
    const Calibration cal = calibrate_threshold(config.selector(), config.mc(), target);

    std::ostringstream& body = reports.stage("calibrate.csv");
    body << "# columns: epsilon,threshold_scale,false_rejection,replicates,target\n";
    body << num(config.epsilon) << ',' << num(cal.threshold_scale) << ','
         << num(cal.false_rejection) << ',' << cal.replicates << ',' << num(target) << '\n';

    Summary summary;
    summary.add("threshold_scale", cal.threshold_scale);
    summary.add("false_rejection", cal.false_rejection);
    return summary;
}

// quick deterministic battery over the library's cross-module invariants
Summary cmd_selftest(const RunConfig& config, Reports& reports, std::ostream& out) {
    std::vector<std::pair<std::string, bool>> checks;
    const auto check = [&](const std::string& name, bool pass) {
        checks.emplace_back(name, pass);
        out << (pass ? "[ok]   " : "[FAIL] ") << name << '\n';
    };

    {
        const Kernel1D k = make_default_kernel();
        const int n = 4096;
        double mass = 0.0, moment = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = -0.5 + (i + 0.5) / n;
            mass += k(u) / n;
            moment += u * k(u) / n;
        }
        check("kernel mass 1 and first moment 0",
              std::fabs(mass - 1.0) <= 1e-6 && std::fabs(moment) <= 1e-12 &&
                  k.sup_norm > 0.0);
    }
    {
        std::mt19937_64 rng(42);
        const auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
        bool pass = true;
        for (int i = 0; i < 200 && pass; ++i) {
            const double a1 = 2.0 * std::numbers::pi * uniform();
            const double a2 = 2.0 * std::numbers::pi * uniform();
            const double h = 0.01 + 0.99 * uniform();
            const Vec2 theta{std::cos(a1), std::sin(a1)};
            Vec2 nu{std::cos(a2), std::sin(a2)};
            if (theta.dot(nu) < 0.0) nu = Vec2{-nu.x, -nu.y};
            const double single = window_single(theta, h).det();
            const double pair = window_pair(theta, nu, h).det();
            pass = std::fabs(single * h - 1.0) <= 1e-12 &&
                   pair >= 1.0 / (4.0 * h) * (1.0 - 1e-12) &&
                   pair <= 1.0 / (2.0 * h) * (1.0 + 1e-12);
        }
        check("window determinants stay on the advertised laws", pass);
    }
    {
        const std::vector<Vec2> net = selection_net(16);
        bool pass = net.size() == 16;
        for (int i = 0; i < 8 && pass; ++i)
            pass = net[i + 8].x == -net[i].x && net[i + 8].y == -net[i].y;
        check("direction net is exactly antipodal", pass);
    }
    {
        const std::vector<double> grid = bandwidth_grid(0.05);
        bool pass = !grid.empty() && grid.front() == 1.0;
        for (std::size_t i = 0; i + 1 < grid.size() && pass; ++i)
            pass = grid[i + 1] == grid[i] / 2.0;
        pass = pass && grid.back() >= 0.05 * 0.05;
        check("bandwidth grid is dyadic inside [eps^2, 1]", pass);
    }
    {
        const double c = 1.2;
        const GridSpec grid{1.25, 64};
        const Observation obs =
            simulate([c](Vec2) { return c; }, 0.05, grid, config.seed, 0, NoiseMode::off);
        SelectorConfig cfg;
        cfg.epsilon = 0.05;
        cfg.n_directions = 16;
        const SelectorEngine engine(build_pyramid(obs), Vec2{0.0, 0.0}, cfg);
        const SelectionTrace trace = engine.run(0);
        bool all_negative = true;
        for (double v : trace.R_values) all_negative = all_negative && v < 0.0;
        check("constant field keeps the full bandwidth without noise",
              trace.h_hat == 1.0 && std::fabs(trace.estimate - c) <= 1e-8 && all_negative);
    }
    {
        const BiasProfile profile{make_default_kernel(), [](double) { return 0.0; }, 8, 512};
        RiskConfig mc;
        mc.replicates = 2000;
        mc.grid.n_per_axis = 48;
        mc.master_seed = config.seed;
        const RiskResult res = pointwise_risk(oracle_procedure(profile, Vec2{1.0, 0.0}, 0.1),
                                              [](Vec2) { return 0.0; }, 0.1, Vec2{0.0, 0.0},
                                              mc);
        check("pure-noise risk matches the variance law",
              std::fabs(res.risk / 0.12 - 1.0) <= 0.12);
    }
    {
        const std::vector<double> eps{0.0625, 0.03125, 0.015625, 0.0078125};
        std::vector<double> risks;
        for (double e : eps) risks.push_back(1.7 * std::pow(rate_abscissa(e), 0.5));
        const RateFit fit = rate_fit(eps, risks, 0.5);
        check("rate fit recovers an exact power law",
              std::fabs(fit.slope - 0.5) <= 1e-10 && fit.residual_rms <= 1e-10);
    }
    {
        const HypothesisFamily family =
            hypothesis_family(1.0, 1.0, std::exp2(-6), 0.5, Vec2{0.0, 0.0});
        const LBReport report = check_family(family, std::exp2(-6), 1.0, 1.0 / 3.0, 512);
        check("lower-bound family satisfies all three conditions", report.all_ok());
    }
    {
        double sx = 0.0, sy = 0.0;
        for (const Vec2& q : probe_grid(4)) {
            sx += q.x;
            sy += q.y;
        }
        bool guard = false;
        try {
            check_epsilon(0.5, NoiseMode::on);
        } catch (const guard_error&) {
            guard = true;
        }
        check("probe grid centres and the noise guard hold",
              std::fabs(sx) <= 1e-12 && std::fabs(sy) <= 1e-12 && guard);
    }

    std::ostringstream& body = reports.stage("selftest.csv");
    body << "# columns: check,pass\n";
    Summary summary;
    int passed = 0;
    for (const auto& [name, pass] : checks) {
        body << '"' << name << "\"," << (pass ? 1 : 0) << '\n';
        summary.ok = summary.ok && pass;
        passed += pass ? 1 : 0;
    }
    summary.add("checks", std::to_string(checks.size()));
    summary.add("passed", std::to_string(passed));
    return summary;
}

}  // namespace

// ==== configuration =======================================================

std::string RunConfig::signal_preset() const {
    if (!signal.empty()) return signal;
    return "cusp:beta=" + num(beta) + ",L=" + num(L) + ",theta=" + num(theta_deg) + "deg";
}

SingleIndexSignal RunConfig::make_signal() const { return parse_signal_preset(signal_preset()); }

ProductKernel RunConfig::make_kernel() const {
    if (kernel == "default") return ProductKernel{make_default_kernel()};
    if (kernel.rfind("order", 0) == 0) {
        int order = 0;
        try {
            order = std::stoi(kernel.substr(5));
        } catch (...) {
            throw guard_error("kernel preset must be 'default' or 'order<n>'");
        }
        return ProductKernel{make_order_kernel(order)};
    }
    throw guard_error("unknown kernel preset: " + kernel);
}

SelectorConfig RunConfig::selector() const {
    SelectorConfig cfg;
    cfg.r = r;
    cfg.epsilon = epsilon;
    cfg.n_directions = n_directions;
    cfg.kernel = make_kernel();
    cfg.threshold_scale = threshold_scale > 0.0 ? threshold_scale : 1.0;
    cfg.bound_M = make_signal().bound_M;
    return cfg;
}

RiskConfig RunConfig::mc() const {
    RiskConfig out;
    out.r = r;
    out.replicates = heavy ? std::max(replicates, 400) : replicates;
    out.master_seed = seed;
    out.grid = GridSpec{1.25, n_grid};
    return out;
}

std::vector<double> RunConfig::sweep_epsilons() const {
    std::vector<double> out;
    for (int k = 4; k <= (heavy ? 11 : 9); ++k) out.push_back(std::exp2(-k));
    return out;
}

void RunConfig::validate() const {
    static const std::vector<std::string> known{"simulate",  "estimate", "oracle",
                                                "risk-sweep", "rate-fit", "lb-check",
                                                "calibrate", "selftest", "help"};
    bool found = false;
    for (const std::string& name : known) found = found || name == command;
    require(found, "unknown command: " + command);
    if (command == "help") return;

    check_epsilon(epsilon, NoiseMode::on);
    require(r >= 1.0, "risk order r must be >= 1");
    require(beta > 0.0, "beta must be positive");
    require(L > 0.0, "L must be positive");
    require(p >= 1.0, "p must be >= 1");
    require(n_grid >= 16, "n-grid must be >= 16");
    require(replicates >= 1, "replicates must be >= 1");
    require(threshold_scale >= 0.0, "threshold-scale must be >= 0 (0 = calibrate)");
    require(jobs >= 0, "jobs must be >= 0 (0 = hardware default)");
    make_kernel();
}

RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig config;
    CLI::App app{"simulation lab for adaptive single-index kernel estimation"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "line-based key=value configuration file");

    app.add_option("--command", config.command,
                   "simulate | estimate | oracle | risk-sweep | rate-fit | lb-check | "
                   "calibrate | selftest");
    app.add_option("--signal", config.signal,
                   "signal preset, e.g. cusp:beta=0.5,L=1,theta=30deg (empty: composed "
                   "from --beta/--L/--theta-deg)");
    app.add_option("--kernel", config.kernel, "kernel preset: default | order<n>");
    app.add_option("--epsilon", config.epsilon, "noise level in (0, exp(-1)]");
    app.add_option("--r", config.r, "risk order (>= 1)");
    app.add_option("--beta", config.beta, "smoothness order");
    app.add_option("--L", config.L, "smoothness constant");
    app.add_option("--p", config.p, "integrability index for global rates");
    app.add_option("--theta-deg", config.theta_deg, "index direction in degrees");
    app.add_option("--n-grid", config.n_grid, "observation cells per axis");
    app.add_option("--n-directions", config.n_directions, "direction net size (even, >= 16)");
    app.add_option("--replicates", config.replicates, "Monte Carlo replicates");
    app.add_option("--seed", config.seed, "master seed");
    app.add_option("--threshold-scale", config.threshold_scale,
                   "fixed threshold scale; 0 calibrates on pure noise");
    app.add_option("--jobs", config.jobs, "worker threads (0 = hardware)");
    app.add_option("--out-dir", config.out_dir, "report directory");
    app.add_flag("--heavy", config.heavy, "extend sweeps to eps = 2^-11, >= 400 replicates");
    app.add_flag("--dump-field", config.dump_field, "simulate also writes the noiseless field");

    std::vector<const char*> argv;
    argv.push_back("silab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help() << std::flush;
        config.command = "help";
        return config;
    } catch (const CLI::Error& e) {
        throw guard_error(std::string("argument error: ") + e.what());
    }

    config.validate();
    return config;
}

// ==== dispatch ============================================================

int run(const RunConfig& config, std::ostream& out) {
    if (config.command == "help") return 0;
    config.validate();
    if (config.jobs > 0) set_worker_count(config.jobs);

    Reports reports(config);
    Summary summary;
    if (config.command == "simulate")
        summary = cmd_simulate(config, reports);
    else if (config.command == "estimate")
        summary = cmd_estimate(config, reports);
    else if (config.command == "oracle")
        summary = cmd_oracle(config, reports);
    else if (config.command == "risk-sweep")
        summary = cmd_risk_sweep(config, reports);
    else if (config.command == "rate-fit")
        summary = cmd_rate_fit(config, reports);
    else if (config.command == "lb-check")
        summary = cmd_lb_check(config, reports);
    else if (config.command == "calibrate")
        summary = cmd_calibrate(config, reports);
    else
        summary = cmd_selftest(config, reports, out);

    const std::string files = reports.commit();
    out << "RESULT command=" << config.command << " status=" << (summary.ok ? "ok" : "fail");
    for (const auto& [key, value] : summary.kv) out << ' ' << key << '=' << value;
    if (!files.empty()) out << " files=" << files;
    out << std::endl;
    return summary.ok ? 0 : 1;
}

}  // namespace silab
