#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "silab/estimator.hpp"
#include "silab/kernels.hpp"
#include "silab/noise_field.hpp"
#include "silab/selector.hpp"
#include "silab/signals.hpp"

using namespace silab;

namespace {

// frozen constants, computed independently at high precision:
//   Lambda = 8 sqrt(ln(1 + 2*6*1.5)) + 50 = 8 sqrt(ln 19) + 50
//   TH(1)  at r = 2, eps = 0.05, scale 1:
//          2 * 1.5^2 * (Lambda + sqrt(10) + 1) * 0.05 * sqrt(ln 20)
//   TH(1)  at r = 1, eps = e^-1: 2 * 2.25 * (Lambda + sqrt 6 + 1) * e^-1 * 1
constexpr double kLambdaDefault = 63.727494114609996;
constexpr double kThresholdExample = 26.438594620153548;
constexpr double kThresholdAtCap = 111.20864076468362;

SelectorConfig small_config(double epsilon, double scale = 1.0) {
    SelectorConfig config;
    config.r = 2.0;
    config.epsilon = epsilon;
    config.n_directions = 16;
    config.threshold_scale = scale;
    return config;
}

Observation constant_observation(double value, double epsilon, int n, std::uint64_t seed,
                                 NoiseMode mode) {
    const auto F = [value](Vec2) { return value; };
    return simulate(F, epsilon, GridSpec{1.25, n}, seed, 0, mode);
}

}  // namespace

// ==== threshold constants ===================================================

TEST_CASE("lambda and threshold match closed forms") {
    const Kernel1D axis = make_default_kernel();
    CHECK(lambda_const(axis) == doctest::Approx(kLambdaDefault).epsilon(1e-14));
    CHECK(lambda_const(ProductKernel{axis}) == lambda_const(axis));

    // zero Lipschitz constant wipes the log term
    Kernel1D flat;
    flat.coeffs = {1.0};
    flat.sup_norm = 1.0;
    flat.l1_norm = 1.0;
    flat.lipschitz = 0.0;
    CHECK(lambda_const(flat) == 50.0);

    // monotone in Q ||K||_inf
    double prev = 0.0;
    for (double q : {0.5, 1.0, 2.0, 6.0, 12.0}) {
        Kernel1D k = flat;
        k.lipschitz = q;
        const double lam = lambda_const(k);
        CHECK(lam > prev);
        prev = lam;
    }

    const SelectorConfig config = small_config(0.05);
    CHECK(threshold(1.0, config) == doctest::Approx(kThresholdExample).epsilon(1e-13));
    // eta^{-1/2} scaling is exact on dyadic eta
    CHECK(threshold(0.25, config) == doctest::Approx(2.0 * threshold(1.0, config)).epsilon(1e-15));
    CHECK(threshold(0.5, config) > threshold(1.0, config));

    SelectorConfig half = config;
    half.threshold_scale = 0.5;
    CHECK(threshold(1.0, half) == doctest::Approx(0.5 * threshold(1.0, config)).epsilon(1e-15));

    SelectorConfig cap = small_config(std::exp(-1.0));
    cap.r = 1.0;
    CHECK(threshold(1.0, cap) == doctest::Approx(kThresholdAtCap).epsilon(1e-13));

    SelectorConfig off = small_config(0.0);
    CHECK(threshold(1.0, off) == 0.0);
    CHECK(threshold(0.125, off) == 0.0);

    CHECK_THROWS_AS(threshold(0.0, config), guard_error);
    CHECK_THROWS_AS(threshold(1.5, config), guard_error);
}

TEST_CASE("epsilon guard bound matches the displayed formula") {
    const ProductKernel kernel{make_default_kernel()};
    // M = 1: (2 * 1 * 1 / 1.5)^2 = 16/9 > 1
    CHECK(epsilon_guard_bound(1.0, kernel) == doctest::Approx(std::exp(-16.0 / 9.0)).epsilon(1e-15));
    // small M: the max saturates at 1
    CHECK(epsilon_guard_bound(0.1, kernel) == std::exp(-1.0));
    CHECK_THROWS_AS(epsilon_guard_bound(0.0, kernel), guard_error);
}

TEST_CASE("config validation enforces the documented invariants") {
    CHECK_NOTHROW(small_config(0.05).validate());
    CHECK_NOTHROW(small_config(0.0).validate());

    SelectorConfig bad = small_config(0.05);
    bad.r = 0.5;
    CHECK_THROWS_AS(bad.validate(), guard_error);

    bad = small_config(-0.1);
    CHECK_THROWS_AS(bad.validate(), guard_error);
    bad = small_config(0.4);  // above e^-1
    CHECK_THROWS_AS(bad.validate(), guard_error);

    bad = small_config(0.05);
    bad.n_directions = 15;
    CHECK_THROWS_AS(bad.validate(), guard_error);
    bad.n_directions = 14;
    CHECK_THROWS_AS(bad.validate(), guard_error);

    bad = small_config(0.05, 0.0);
    CHECK_THROWS_AS(bad.validate(), guard_error);

    bad = small_config(0.05);
    bad.h_min_cells = 1;
    CHECK_THROWS_AS(bad.validate(), guard_error);
    bad = small_config(0.05);
    bad.quadrature_cells_per_bandwidth = 1;
    CHECK_THROWS_AS(bad.validate(), guard_error);

    bad = small_config(0.05);
    bad.bound_M = -1.0;
    CHECK_THROWS_AS(bad.validate(), guard_error);

    // the epsilon guard kicks in only when M is supplied
    SelectorConfig guarded = small_config(0.2);
    CHECK_NOTHROW(guarded.validate());
    guarded.bound_M = 1.0;  // admissible level exp(-16/9) ~ 0.169 < 0.2
    CHECK_THROWS_AS(guarded.validate(), guard_error);
    guarded.epsilon = 0.15;
    CHECK_NOTHROW(guarded.validate());
}

// ==== grids =================================================================

TEST_CASE("bandwidth grids are dyadic and clipped") {
    const auto grid = bandwidth_grid(0.05);
    REQUIRE(grid.size() == 9);  // eps^2 = 0.0025, 2^-8 ~ 0.0039
    CHECK(grid.front() == 1.0);
    CHECK(grid.back() == 0.00390625);
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] == 0.5 * grid[k - 1]);

    // boundary level is included: eps = 0.25 puts eps^2 = 2^-4 on the grid
    const auto boundary = bandwidth_grid(0.25);
    CHECK(boundary.size() == 5);
    CHECK(boundary.back() == 0.0625);

    const auto cap = bandwidth_grid(std::exp(-1.0));
    CHECK(cap.size() == 3);  // {1, 1/2, 1/4}

    CHECK_THROWS_AS(bandwidth_grid(0.0), guard_error);
    CHECK_THROWS_AS(bandwidth_grid(0.4), guard_error);
}

TEST_CASE("scan levels honor the resolution floor") {
    const GridSpec fine{1.25, 256};  // step 2.5/256, 4 steps = 0.0390625
    const auto scanned = scan_levels(0.05, fine, 4);
    const std::vector<double> expect{1.0, 0.5, 0.25, 0.125, 0.0625};
    CHECK(scanned == expect);

    // eps = 0 keeps every resolved level
    CHECK(scan_levels(0.0, fine, 4) == expect);

    // scanned levels are a prefix of the full grid
    const auto full = bandwidth_grid(0.05);
    for (std::size_t k = 0; k < scanned.size(); ++k) CHECK(scanned[k] == full[k]);

    // a coarse observation collapses the scan to h = 1
    const auto coarse = scan_levels(0.05, GridSpec{1.25, 16}, 4);
    REQUIRE(coarse.size() == 1);
    CHECK(coarse[0] == 1.0);

    CHECK_THROWS_AS(scan_levels(0.05, GridSpec{1.25, 4}, 4), guard_error);
    CHECK_THROWS_AS(scan_levels(-0.01, fine, 4), guard_error);
    CHECK_THROWS_AS(scan_levels(0.05, fine, 1), guard_error);
}

TEST_CASE("selection net spans the full circle with exact antipodes") {
    const auto net = selection_net(16);
    REQUIRE(net.size() == 16);
    CHECK(net[0].x == 1.0);
    CHECK(net[0].y == 0.0);
    const auto half = direction_grid(8);
    for (int i = 0; i < 8; ++i) {
        CHECK(net[i].x == half[i].x);
        CHECK(net[i].y == half[i].y);
        CHECK(net[i + 8].x == -net[i].x);
        CHECK(net[i + 8].y == -net[i].y);
        CHECK(net[i].norm() == doctest::Approx(1.0).epsilon(1e-15));
    }
    CHECK(net[8].x == -1.0);

    CHECK_THROWS_AS(selection_net(15), guard_error);
    CHECK_THROWS_AS(selection_net(8), guard_error);
}

// ==== noise-off closed forms ================================================

TEST_CASE("constant signal with noise off selects the full bandwidth") {
    const Observation obs = constant_observation(2.5, 0.05, 128, 11, NoiseMode::off);
    const SelectorConfig config = small_config(0.05);
    const Vec2 x{0.1, -0.15};

    const SelectionTrace trace = select_estimate(obs, x, config);
    const int n_levels = static_cast<int>(trace.bandwidth_grid.size());
    REQUIRE(n_levels == 4);  // 128 cells resolve {1, 1/2, 1/4, 1/8}

    CHECK(trace.estimate == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(trace.h_hat == 1.0);
    CHECK(trace.p_nonempty);
    CHECK(trace.h_tilde == 1.0);
    CHECK_FALSE(trace.fallback_used);

    // every R sits at the exact closed form -TH(h): the pair/single gaps
    // vanish, so the supremum is attained at the largest eta scanned
    for (int d = 0; d < 16; ++d)
        for (int l = 0; l < n_levels; ++l) {
            const double want = -threshold(trace.bandwidth_grid[l], config);
            CHECK(trace.r_value(d, l) == doctest::Approx(want).epsilon(1e-12));
            CHECK(trace.r_value(d, l) < 0.0);
        }

    // tie-break: every direction qualifies, so the smallest first coordinate
    // wins; the net holds (-1, -0) exactly
    CHECK(trace.theta_hat.x == -1.0);
    CHECK(trace.theta_hat.y == 0.0);

    const FirstStageResult stage = first_stage(obs, x, config);
    CHECK(stage.p_nonempty);
    CHECK(stage.h_tilde == 1.0);
    CHECK_FALSE(stage.fallback_used);
    for (char member : stage.p_membership) CHECK(member == 1);

    CHECK(second_stage(obs, Vec2{1.0, 0.0}, x, config) == 1.0);

    // determinism: a rerun reproduces the trace bit for bit
    const SelectionTrace again = select_estimate(obs, x, config);
    CHECK(again.estimate == trace.estimate);
    CHECK(again.R_values == trace.R_values);
    CHECK(again.h_hat == trace.h_hat);
}

TEST_CASE("compute_R reproduces the minus-threshold closed form off the net") {
    const Observation obs = constant_observation(-0.7, 0.05, 128, 5, NoiseMode::off);
    const SelectorConfig config = small_config(0.05);
    const Vec2 x{0.0, 0.2};

    // theta need not belong to the net
    const Vec2 theta{0.6, 0.8};
    CHECK(compute_R(obs, theta, 1.0, x, config) ==
          doctest::Approx(-threshold(1.0, config)).epsilon(1e-12));
    CHECK(compute_R(obs, theta, 0.25, x, config) ==
          doctest::Approx(-threshold(0.25, config)).epsilon(1e-12));

    CHECK_THROWS_AS(compute_R(obs, theta, 0.3, x, config), guard_error);
    CHECK_THROWS_AS(compute_R(obs, theta, 1.0, Vec2{0.6, 0.0}, config), guard_error);
}

// ==== cached engine vs direct evaluation ====================================

TEST_CASE("engine tables reproduce the uncached statistic exactly") {
    const auto F = [](Vec2 t) { return 0.4 * t.x - 0.3 * t.y * t.y; };
    const Observation obs = simulate(F, 0.2, GridSpec{1.25, 64}, 29, 0, NoiseMode::on);
    const SelectorConfig config = small_config(0.2);
    const Vec2 x{0.15, -0.1};

    const SelectorEngine engine(build_pyramid(obs), x, config);
    REQUIRE(engine.levels().size() == 3);  // 64 cells resolve {1, 1/2, 1/4}
    REQUIRE(engine.net().size() == 16);

    const SelectionTrace trace = engine.run(0);
    REQUIRE(trace.R_values.size() == 16 * 3);
    for (double r : trace.R_values) CHECK(std::isfinite(r));

    // cached values equal fresh evaluations, and antipodal directions agree
    for (int d : {0, 3, 7, 8, 11, 15})
        for (int l = 0; l < 3; ++l) {
            const double direct =
                compute_R(obs, engine.net()[d], engine.levels()[l], x, config);
            CHECK(trace.r_value(d, l) == direct);
        }
    for (int d = 0; d < 8; ++d)
        for (int l = 0; l < 3; ++l) CHECK(trace.r_value(d, l) == trace.r_value(d + 8, l));
}

TEST_CASE("engine columns match single-replicate pyramids") {
    const GridSpec grid{1.25, 64};
    const auto F = [](Vec2 t) { return 1.0 + 0.5 * t.y; };
    const auto samples = field_samples(F, grid);
    const FieldPyramid batch = simulate_pyramid(samples, 0.15, grid, 77, 0, 5, NoiseMode::on);

    const SelectorConfig config = small_config(0.15);
    const Vec2 x{0.2, 0.1};
    const SelectorEngine batched(batch, x, config);
    REQUIRE(batched.columns() == 5);

    for (int b : {0, 2, 4}) {
        const Observation obs = simulate(F, 0.15, grid, 77, b, NoiseMode::on);
        const SelectorEngine solo(build_pyramid(obs), x, config);
        const SelectionTrace want = solo.run(0);
        const SelectionTrace got = batched.run(b);
        CHECK(got.R_values == want.R_values);
        CHECK(got.estimate == want.estimate);
        CHECK(got.h_hat == want.h_hat);
        CHECK(got.theta_hat.x == want.theta_hat.x);
        CHECK(got.theta_hat.y == want.theta_hat.y);
    }
    CHECK_THROWS_AS(batched.run(5), guard_error);
    CHECK_THROWS_AS(batched.run(-1), guard_error);
}

// ==== threshold scale properties ============================================

TEST_CASE("membership grows and selection coarsens with the threshold scale") {
    const auto F = [](Vec2 t) { return std::sin(3.0 * t.x) * 0.8; };
    const Observation obs = simulate(F, 0.25, GridSpec{1.25, 64}, 101, 0, NoiseMode::on);
    const Vec2 x{-0.2, 0.05};

    const SelectionTrace narrow = select_estimate(obs, x, small_config(0.25, 1.0));
    const SelectionTrace wide = select_estimate(obs, x, small_config(0.25, 3.0));
    REQUIRE(narrow.R_values.size() == wide.R_values.size());
    for (std::size_t k = 0; k < narrow.R_values.size(); ++k) {
        CHECK(wide.R_values[k] <= narrow.R_values[k]);
        if (narrow.R_values[k] <= 0.0) CHECK(wide.R_values[k] <= 0.0);
    }

    // stage two is monotone in the scale as well
    const double h_small = second_stage(obs, Vec2{1.0, 0.0}, x, small_config(0.25, 1e-9));
    const double h_mid = second_stage(obs, Vec2{1.0, 0.0}, x, small_config(0.25, 0.05));
    const double h_large = second_stage(obs, Vec2{1.0, 0.0}, x, small_config(0.25, 5.0));
    CHECK(h_small <= h_mid);
    CHECK(h_mid <= h_large);
    CHECK(h_small == 0.25);  // vanishing threshold pins the smallest level
    CHECK(h_large == 1.0);
}

TEST_CASE("first stage tie break follows the lexicographic rule") {
    const auto F = [](Vec2 t) { return 0.6 * std::cos(2.0 * t.x + t.y); };
    const Observation obs = simulate(F, 0.2, GridSpec{1.25, 64}, 55, 0, NoiseMode::on);
    const Vec2 x{0.0, 0.0};

    for (double scale : {0.02, 0.2, 2.0}) {
        const SelectionTrace trace = select_estimate(obs, x, small_config(0.2, scale));
        const int n_levels = static_cast<int>(trace.bandwidth_grid.size());
        // refold expected h_tilde and theta_hat from the reported R table
        int level = -1;
        for (int l = 0; l < n_levels && level < 0; ++l)
            for (int d = 0; d < 16; ++d)
                if (trace.r_value(d, l) <= 0.0) {
                    level = l;
                    break;
                }
        if (level < 0) {
            CHECK(trace.fallback_used);
            CHECK(trace.theta_hat.x == 1.0);
            CHECK(trace.theta_hat.y == 0.0);
            continue;
        }
        CHECK(trace.p_nonempty);
        CHECK(trace.h_tilde == trace.bandwidth_grid[level]);
        int best = -1;
        for (int d = 0; d < 16; ++d) {
            if (trace.r_value(d, level) > 0.0) continue;
            if (best < 0 || trace.directions[d].x < trace.directions[best].x ||
                (trace.directions[d].x == trace.directions[best].x &&
                 trace.directions[d].y < trace.directions[best].y))
                best = d;
        }
        CHECK(trace.theta_hat.x == trace.directions[best].x);
        CHECK(trace.theta_hat.y == trace.directions[best].y);
    }
}

// ==== anisotropy and fallback ===============================================

TEST_CASE("steep single-index signal rejects the wrong direction") {
    const SingleIndexSignal F = single_index_field(
        make_hoelder(HoelderSpec{0.5, 4.0, LinkShape::cusp, 0.0}), Vec2{1.0, 0.0});
    const Observation obs =
        simulate([&F](Vec2 t) { return F(t); }, 0.05, GridSpec{1.25, 128}, 1, 0, NoiseMode::off);
    const SelectorConfig config = small_config(0.05, 0.004);
    const Vec2 x{0.0, 0.0};

    // noiseless data: the pair/single gap across the index direction is pure
    // bias and beats the shrunken threshold at the top bandwidth
    CHECK(compute_R(obs, Vec2{0.0, 1.0}, 1.0, x, config) > 0.0);

    const SelectionTrace trace = select_estimate(obs, x, config);
    CHECK(trace.p_nonempty);
    // the selected direction lines up with the index axis (either sign)
    CHECK(std::fabs(trace.theta_hat.x) > 0.9);
    // the cusp at the probe point forces a bandwidth below the maximum
    CHECK(trace.h_hat < 1.0);
}

TEST_CASE("empty membership falls back to the first axis") {
    const auto F = [](Vec2 t) { return 0.3 * t.x * t.y; };
    const Observation obs = simulate(F, 0.2, GridSpec{1.25, 64}, 13, 0, NoiseMode::on);
    const SelectionTrace trace = select_estimate(obs, Vec2{0.1, 0.1}, small_config(0.2, 1e-9));

    CHECK_FALSE(trace.p_nonempty);
    CHECK(trace.fallback_used);
    CHECK(trace.theta_hat.x == 1.0);
    CHECK(trace.theta_hat.y == 0.0);
    CHECK(trace.h_hat == trace.bandwidth_grid.back());
    CHECK(std::isfinite(trace.estimate));

    const FirstStageResult stage = first_stage(obs, Vec2{0.1, 0.1}, small_config(0.2, 1e-9));
    CHECK(stage.fallback_used);
    for (char member : stage.p_membership) CHECK(member == 0);
}

TEST_CASE("bandwidth shrinks near a peak and stays full on flat ground") {
    const Link link = make_inhomogeneous(0.3, HoelderSpec{1.0, 2.0, LinkShape::cusp, 0.45}, 0.2);
    const SingleIndexSignal F = single_index_field(link, Vec2{1.0, 0.0});
    const Observation obs =
        simulate([&F](Vec2 t) { return F(t); }, 0.05, GridSpec{1.25, 128}, 2, 0, NoiseMode::off);
    const SelectorConfig config = small_config(0.05, 0.0005);

    const double h_flat = second_stage(obs, Vec2{1.0, 0.0}, Vec2{-0.4, 0.0}, config);
    const double h_peak = second_stage(obs, Vec2{1.0, 0.0}, Vec2{0.45, 0.0}, config);
    CHECK(h_flat == 1.0);  // the window never touches the peak: all diffs vanish
    CHECK(h_peak < h_flat);
}

// ==== composition and serialization =========================================

TEST_CASE("selected estimate equals the single estimator at the selection") {
    const auto F = [](Vec2 t) { return 0.5 + 0.4 * std::sin(2.0 * t.x - t.y); };
    const Observation obs = simulate(F, 0.2, GridSpec{1.25, 64}, 3, 0, NoiseMode::on);
    const SelectorConfig config = small_config(0.2);
    const Vec2 x{0.25, -0.25};

    const SelectionTrace trace = select_estimate(obs, x, config);
    bool on_grid = false;
    for (double h : trace.bandwidth_grid) on_grid = on_grid || h == trace.h_hat;
    CHECK(on_grid);

    // recompute the single estimator through the same quadrature policy
    const FieldPyramid pyramid = build_pyramid(obs);
    const int lvl = pyramid.finest_level_with_step_at_most(
        trace.h_hat / config.quadrature_cells_per_bandwidth);
    const double direct = estimate_batch(pyramid, lvl, config.kernel,
                                         window_single(trace.theta_hat, trace.h_hat), x)[0];
    CHECK(trace.estimate == direct);

    // the standalone second stage agrees with the trace
    CHECK(second_stage(obs, trace.theta_hat, x, config) == trace.h_hat);
}

TEST_CASE("trace serializes one row per pair plus a summary") {
    const Observation obs = constant_observation(1.0, 0.05, 128, 7, NoiseMode::off);
    const SelectionTrace trace = select_estimate(obs, Vec2{0.0, 0.0}, small_config(0.05));

    std::ostringstream out;
    trace.write_csv(out);
    const std::string text = out.str();

    std::istringstream lines(text);
    std::string line;
    int count = 0;
    std::string first, last;
    while (std::getline(lines, line)) {
        if (count == 0) first = line;
        last = line;
        ++count;
    }
    CHECK(count == 1 + 16 * static_cast<int>(trace.bandwidth_grid.size()) + 1);
    CHECK(first == "theta_index,theta_x,theta_y,h,R,in_p");
    CHECK(last.rfind("# summary", 0) == 0);
    CHECK(last.find("fallback=0") != std::string::npos);
    CHECK(last.find("h_tilde=1") != std::string::npos);

    // the first data row round-trips the R value at full precision
    std::istringstream again(text);
    std::getline(again, line);  // header
    std::getline(again, line);
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 6);
    CHECK(std::stod(fields[4]) == trace.r_value(0, 0));
    CHECK(fields[5] == "1");

    // fallback traces advertise the missing h_tilde
    const auto noisy = simulate([](Vec2) { return 0.0; }, 0.2, GridSpec{1.25, 64}, 9, 0,
                                NoiseMode::on);
    std::ostringstream out2;
    select_estimate(noisy, Vec2{0.0, 0.0}, small_config(0.2, 1e-9)).write_csv(out2);
    CHECK(out2.str().find("h_tilde=none") != std::string::npos);
    CHECK(out2.str().find("fallback=1") != std::string::npos);
}
