#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "silab/estimator.hpp"
#include "silab/kernels.hpp"
#include "silab/noise_field.hpp"
#include "silab/oracle.hpp"

using namespace silab;

namespace {

const double pi = std::acos(-1.0);

BiasProfile make_profile(std::function<double(double)> link, int per_unit) {
    BiasProfile p;
    p.kernel = make_default_kernel();
    p.link = std::move(link);
    p.quadrature_per_unit = per_unit;
    return p;
}

// certified Hoelder(beta, L) cusp: increments bounded by (L/2)|u-v|^beta
std::function<double(double)> cusp_link(double beta, double L, double u0) {
    return [beta, L, u0](double z) { return 0.5 * L * std::pow(std::fabs(z - u0), beta); };
}

}  // namespace

TEST_CASE("gaussian moment constants match their closed forms") {
    const double e_abs = std::sqrt(2.0 / pi);  // E|xi|
    CHECK(c_r_constant(1.0) == doctest::Approx(1.0 + e_abs).epsilon(1e-10));
    CHECK(c_r_constant(1.0) == doctest::Approx(1.7978845608).epsilon(1e-9));
    CHECK(c_r_constant(2.0) == doctest::Approx(std::sqrt(2.0 + 2.0 * e_abs)).epsilon(1e-10));
    CHECK(c_r_constant(2.0) == doctest::Approx(1.8962513).epsilon(1e-6));
    // E(1+|xi|)^4 = 1 + 4 E|xi| + 6 + 4 E|xi|^3 + 3 with E|xi|^3 = 2 E|xi|.
    CHECK(c_r_constant(4.0) ==
          doctest::Approx(std::pow(10.0 + 12.0 * e_abs, 0.25)).epsilon(1e-10));

    double prev = 0.0;
    for (double r : {1.0, 1.5, 2.0, 3.0, 4.0, 8.0}) {
        const double c = c_r_constant(r);
        CHECK(c >= prev);
        prev = c;
    }
    CHECK_THROWS_AS((void)c_r_constant(0.5), guard_error);
}

TEST_CASE("benchmark risk bound: frozen value and scalings") {
    const Kernel1D K = make_default_kernel();
    const double e1 = std::exp(-1.0);
    CHECK(oracle_risk_bound(1.0, e1, 1.0, K) == doctest::Approx(1.4881607).epsilon(1e-6));

    CHECK(oracle_risk_bound(0.5, 0.1, 2.0, K) / oracle_risk_bound(1.0, 0.1, 2.0, K) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // eps sqrt(ln(1/eps)) increases on (0, e^{-1/2}), so the bound does too.
    double prev = 0.0;
    for (double eps : {0.05, 0.1, 0.2, 0.3, e1}) {
        const double b = oracle_risk_bound(0.25, eps, 2.0, K);
        CHECK(b > prev);
        prev = b;
    }
    CHECK_THROWS_AS((void)oracle_risk_bound(1.5, 0.1, 2.0, K), guard_error);
    CHECK_THROWS_AS((void)oracle_risk_bound(0.5, 0.6, 2.0, K), guard_error);
}

TEST_CASE("bias functional vanishes for constant and linear links") {
    const BiasProfile pc = make_profile([](double) { return 4.2; }, 256);
    const BiasProfile pl = make_profile([](double z) { return 3.0 * z - 1.0; }, 256);
    for (double h : {1.0, 0.25, 0.03125}) {
        for (double z : {-0.7, 0.0, 0.55}) {
            CHECK(delta(pc, h, z) == 0.0);
            CHECK(delta(pl, h, z) <= 1e-12);
        }
        CHECK(maximal_delta(pc, h, 0.1) == 0.0);
    }
}

TEST_CASE("quadratic link: bias is z-free and equals its running average") {
    const BiasProfile p = make_profile([](double z) { return 0.8 * z * z; }, 512);
    const double h = 0.5;
    const double d0 = delta(p, h, 0.0);
    CHECK(delta(p, h, -0.4) == doctest::Approx(d0).epsilon(1e-12));
    CHECK(delta(p, h, 0.7) == doctest::Approx(d0).epsilon(1e-12));
    // largest ladder width dominates: 0.8 h^2 Int v^2 K(v) dv with m2 = 0.05
    CHECK(d0 == doctest::Approx(0.8 * h * h * 0.05).epsilon(0.01));
    CHECK(maximal_delta(p, h, 0.2) == doctest::Approx(d0).epsilon(1e-10));
    CHECK(delta_star(p, h, 0.2) == doctest::Approx(d0).epsilon(1e-10));
}

TEST_CASE("cusp link: sup-norm bias bound and monotonicity in h") {
    const double beta = 0.7, L = 1.0;
    const BiasProfile p = make_profile(cusp_link(beta, L, 0.0), 256);
    const double sup = p.kernel.sup_norm;
    for (double z : {0.0, 0.1, -0.35}) {
        double prev = -1.0;
        for (int k : {24, 16, 8, 4, 0}) {  // ascending h on the ladder
            const double h = std::exp2(-k / 8.0);
            const double d = delta(p, h, z);
            CHECK(d >= 0.0);
            CHECK(d <= sup * L * std::pow(h, beta) * (1.0 + 1e-9));
            CHECK(d >= prev - 1e-15);  // ladder-aligned pairs nest exactly
            prev = d;
        }
    }
}

TEST_CASE("running average dominates outside a bump's support") {
    const auto bump = [](double z) {
        const double q = z / 0.1;
        return std::fabs(q) < 1.0 ? (1.0 - q * q) * (1.0 - q * q) : 0.0;
    };
    const BiasProfile p = make_profile(bump, 256);
    const double h = 0.2, y = 0.3;
    // Every smoothing window at y sits right of the bump, so the local bias
    // vanishes; the running average still sees the bump.
    CHECK(delta(p, h, y) == 0.0);
    const double md = maximal_delta(p, h, y);
    CHECK(md > 1e-3);
    CHECK(delta_star(p, h, y) == doctest::Approx(md).epsilon(1e-12));

    for (double yy : {0.0, 0.08, 0.3, -0.5}) {
        const double st = delta_star(p, h, yy);
        CHECK(st >= delta(p, h, yy) - 1e-15);
        CHECK(st >= maximal_delta(p, h, yy) - 1e-15);
    }
}

TEST_CASE("table reproduces the reference functions on ladder nodes") {
    const BiasProfile p = make_profile(cusp_link(0.6, 2.0, 0.05), 256);
    const OracleTable table(p, -0.25, 0.25, std::exp2(-6.0));

    for (int k : {0, 3, 8, 19, 30}) {
        const double h = std::exp2(-k / 8.0);
        for (double z : {-0.25, 0.0, 0.25, -1.0, 1.25 - 1.0 / 256}) {
            // z nodes of the table grid: z0 = -1.25 plus integer steps of 1/256
            const double snapped = -1.25 + std::round((z + 1.25) * 256.0) / 256.0;
            CHECK(table.delta_at(h, snapped) ==
                  doctest::Approx(delta(p, h, snapped)).epsilon(1e-9));
        }
        for (double y : {-0.25, 0.0, 0.25}) {
            CHECK(table.maximal_at(h, y) ==
                  doctest::Approx(maximal_delta(p, h, y)).epsilon(1e-9));
            CHECK(table.star_at(h, y) ==
                  doctest::Approx(delta_star(p, h, y)).epsilon(1e-9));
        }
    }

    // Bandwidth scan equals a hand-rolled top-down scan of the references.
    const double eps = 0.3, y = 0.0;
    const double thresh = p.kernel.sup_norm * eps * std::sqrt(std::log(1.0 / eps));
    double hand = -1.0;
    for (int k = 0;; ++k) {
        const double h = std::exp2(-k / 8.0);
        if (h < eps * eps * (1.0 - 1e-12)) break;
        if (std::sqrt(h) * delta_star(p, h, y) <= thresh) {
            hand = h;
            break;
        }
    }
    REQUIRE(hand > 0.0);
    CHECK(table.bandwidth(eps, y) == hand);
}

TEST_CASE("constant link caps the benchmark bandwidth at one") {
    const BiasProfile p = make_profile([](double) { return 5.0; }, 256);
    CHECK(oracle_bandwidth(p, 0.1, 0.0) == 1.0);
    const OracleResult res = oracle_summary(p, 0.1, 2.0, 0.0);
    CHECK(res.h_star == 1.0);
    CHECK(res.c_r == doctest::Approx(1.8962513).epsilon(1e-6));
    CHECK(res.risk_bound ==
          doctest::Approx(oracle_risk_bound(1.0, 0.1, 2.0, p.kernel)).epsilon(1e-12));
}

TEST_CASE("cusp benchmark bandwidth respects the smoothness lower bound") {
    const double beta = 0.7, L = 1.0, eps = 0.05;
    const BiasProfile p = make_profile(cusp_link(beta, L, 0.0), 1024);
    const double hs = oracle_bandwidth(p, eps, 0.0);
    CHECK(hs >= eps * eps);
    CHECK(hs <= 1.0);

    // Within the class, sqrt(h) Delta* <= |K|_inf L h^{beta+1/2}, so every h
    // below (L^{-1} eps sqrt(ln(1/eps)))^{2/(2beta+1)} passes; the scan can
    // sit at most one ladder notch under that.
    const double h_low =
        std::pow(eps * std::sqrt(std::log(1.0 / eps)) / L, 2.0 / (2.0 * beta + 1.0));
    CHECK(hs >= h_low * std::exp2(-1.0 / 8.0) * 0.999);

    const double hs_half = oracle_bandwidth(p, 0.025, 0.0);
    CHECK(hs_half <= hs * (1.0 + 1e-12));
}

TEST_CASE("a large jump empties the admissible bandwidth set") {
    const BiasProfile p = make_profile([](double z) { return z > 0.0 ? 8.0 : 0.0; }, 1024);
    bool threw = false;
    try {
        (void)oracle_bandwidth(p, 0.05, 0.0);
    } catch (const guard_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("exp(-(2*M*|K|_1/|K|_inf)^2)") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("window responses match closed forms") {
    const Kernel1D K = make_default_kernel();
    const Vec2 theta0 = direction_from_angle(pi / 6.0);
    const KernelWindow w = window_pair(direction_from_angle(0.2), direction_from_angle(1.4), 0.37);
    const Vec2 x{0.15, -0.2};
    const double z0 = x.dot(theta0);

    CHECK(window_response(K, [](double) { return 2.2; }, theta0, w, x) ==
          doctest::Approx(2.2).epsilon(1e-13));
    const auto lin = [](double z) { return 1.3 * z - 0.4; };
    CHECK(window_response(K, lin, theta0, w, x) == doctest::Approx(lin(z0)).epsilon(1e-10));

    // quadratic: z0^2 + (alpha^2 + gamma^2) m2 with m2 = 0.05
    const double alpha = w.len_par * w.omega.dot(theta0);
    const double gamma = w.len_perp * w.omega.perp().dot(theta0);
    const auto quad = [](double z) { return z * z; };
    CHECK(window_response(K, quad, theta0, w, x) ==
          doctest::Approx(z0 * z0 + (alpha * alpha + gamma * gamma) * 0.05).epsilon(1e-4));
}

TEST_CASE("oracle estimator risk stays below the certified bound") {
    const double beta = 0.7, L = 1.0, eps = 0.05, r = 2.0;
    const Vec2 theta0 = direction_from_angle(pi / 6.0);
    const auto link = cusp_link(beta, L, 0.0);
    const BiasProfile p = make_profile(link, 1024);
    const Vec2 x{0.0, 0.0};
    const double y = x.dot(theta0);

    const OracleResult res = oracle_summary(p, eps, r, y);
    REQUIRE(res.h_star > eps * eps);

    GridSpec grid;
    grid.n_per_axis = 192;
    const auto F = [&](Vec2 t) { return link(t.dot(theta0)); };
    const ProductKernel pk{p.kernel};

    const int reps = 200;
    double acc = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        const Observation obs = simulate(F, eps, grid, 777u, rep);
        const double err = oracle_estimate(obs, pk, theta0, res.h_star, x) - link(y);
        acc += err * err;
    }
    const double risk = std::sqrt(acc / reps);
    CHECK(risk <= res.risk_bound);
}

TEST_CASE("smoothed responses obey the pairwise bias inequalities") {
    const double eps = 0.05;
    const Vec2 theta0 = direction_from_angle(pi / 6.0);
    const auto link = cusp_link(0.7, 1.0, 0.0);
    const BiasProfile p = make_profile(link, 1024);
    const Vec2 x{0.0, 0.0};
    const double y = x.dot(theta0);
    const double hs = oracle_bandwidth(p, eps, y);

    const double noise_scale = eps * std::sqrt(std::log(1.0 / eps));
    const double sup = p.kernel.sup_norm;
    const double rhs_pair = 2.0 / std::sqrt(hs) * sup * sup * noise_scale;
    const double rhs_point = 1.0 / std::sqrt(hs) * sup * noise_scale;
    const double slack = 5e-4;  // 2-D midpoint quadrature of the responses

    const int nq = 512;
    for (double ang : {0.0, 0.7, pi / 2.0, pi / 6.0}) {
        const Vec2 nu = direction_from_angle(ang);
        for (double h : {hs / 2.0, hs / 4.0}) {
            const double s_pair =
                window_response(p.kernel, link, theta0, window_pair(theta0, nu, h), x, nq);
            const double s_single =
                window_response(p.kernel, link, theta0, window_single(nu, h), x, nq);
            CHECK(std::fabs(s_pair - s_single) <= rhs_pair + slack);
            for (double eta : {h / 2.0, h / 4.0}) {
                const double s_eta =
                    window_response(p.kernel, link, theta0, window_single(nu, eta), x, nq);
                CHECK(std::fabs(s_single - s_eta) <= rhs_pair + slack);
            }
        }
    }
    for (double h : {hs / 2.0, hs / 4.0, hs / 8.0}) {
        const double s0 =
            window_response(p.kernel, link, theta0, window_single(theta0, h), x, nq);
        CHECK(std::fabs(s0 - link(y)) <= rhs_point + slack);
    }
}
