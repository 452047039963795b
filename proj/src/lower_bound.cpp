#include "silab/lower_bound.hpp"

#include <algorithm>
#include <cmath>

namespace silab {

namespace {

// ==== helpers =============================================================

// |g| over [-1/2, 1/2] by Simpson; family bumps are polynomial inside their
// support, so the rule is exact up to roundoff
double bump_l1_norm(const Link& f) {
    const int n = 4096;
    const double step = 1.0 / n;
    double s = std::fabs(f(-0.5)) + std::fabs(f(0.5));
    for (int k = 1; k < n; ++k)
        s += (k % 2 ? 4.0 : 2.0) * std::fabs(f(-0.5 + k * step));
    return s * step / 3.0;
}

void require_family(const HypothesisFamily& family) {
    require(family.N >= 1, "family holds no hypotheses");
    require(int(family.directions.size()) == family.N,
            "family direction count does not match N");
    require(family.h > 0.0, "family bandwidth must be positive");
    require(family.dim >= 2, "family dimension must be at least 2");
    require(static_cast<bool>(family.g.f), "family bump is empty");
}

}  // namespace

// ==== risk bound ==========================================================

double bound_value(double lambda_eps, double c) {
    require(lambda_eps >= 0.0, "bound_value needs lambda_eps >= 0");
    require(c > 0.0, "bound_value needs c > 0");
    const double e = std::exp(c);
    return 0.5 * (1.0 - std::sqrt((e - 1.0) / (e + 3.0))) * lambda_eps;
}

// ==== inner products ======================================================

double pair_inner(const HypothesisFamily& family, int i, int j, int grid_n) {
    require_family(family);
    require(grid_n >= 64, "pair_inner needs grid_n >= 64");
    require(i >= 0 && i <= family.N && j >= 0 && j <= family.N,
            "hypothesis index out of range");
    if (i == 0 || j == 0) return 0.0;

    const Vec2 ti = family.directions[size_t(i - 1)];
    const Vec2 tj = family.directions[size_t(j - 1)];
    const double inv_h = 1.0 / family.h;
    const double step = 2.0 / grid_n;

    // midpoint rule on [-1,1]^2; the bump vanishes outside (-1/2, 1/2), so
    // cells outside either ridge strip are skipped before evaluating it
    double sum = 0.0;
    for (int iy = 0; iy < grid_n; ++iy) {
        const double d2 = -1.0 + (iy + 0.5) * step - family.x.y;
        const double bi = ti.y * d2;
        const double bj = tj.y * d2;
        for (int ix = 0; ix < grid_n; ++ix) {
            const double d1 = -1.0 + (ix + 0.5) * step - family.x.x;
            const double u = (ti.x * d1 + bi) * inv_h;
            if (std::fabs(u) >= 0.5) continue;
            const double v = (tj.x * d1 + bj) * inv_h;
            if (std::fabs(v) >= 0.5) continue;
            sum += family.g.f(u) * family.g.f(v);
        }
    }
    const double amp = family.L * std::pow(family.h, family.beta);
    const double planar = amp * amp * sum * step * step;
    // the fields are constant in coordinates 3..dim, each contributing a
    // factor |[-1,1]| = 2 to the integral
    return planar * std::pow(2.0, double(family.dim - 2));
}

double cross_inner_bound_check(const HypothesisFamily& family, int grid_n) {
    require_family(family);
    require(family.N >= 2, "cross check needs at least two hypotheses");
    const double l1 = bump_l1_norm(family.g.f);
    require(l1 > 0.0, "family bump has zero mass");
    const double front = std::pow(3.0, double(family.dim - 2)) * family.L * family.L *
                         std::pow(family.h, 2.0 * family.beta + 2.0) * l1 * l1;
    double worst = 0.0;
    for (int i = 1; i <= family.N; ++i)
        for (int j = i + 1; j <= family.N; ++j) {
            const double bound = front / std::sin(double(j - i) / family.N);
            worst = std::max(worst, pair_inner(family, i, j, grid_n) / bound);
        }
    return worst;
}

// ==== condition checker ===================================================

LBReport check_family(const HypothesisFamily& family, double epsilon, double c,
                      double rho, int grid_n) {
    require_family(family);
    require(epsilon > 0.0, "check_family needs epsilon > 0");
    require(std::fabs(epsilon - family.epsilon) <= 1e-12 * family.epsilon,
            "epsilon must match the family's construction");
    require(c > 0.0, "check_family needs c > 0");
    require(rho > 0.0, "check_family needs rho > 0");

    LBReport rep;
    rep.c_used = c;
    rep.rho_used = rho;
    rep.lambda_eps = family.lambda;

    // (1) equal separation at the probe; F_0 = 0 so |F_i(x)| itself is the gap
    double spread = 0.0;
    for (int i = 1; i <= family.N; ++i)
        spread = std::max(
            spread, std::fabs(std::fabs(family.field(i, family.x)) - family.lambda));
    rep.lambda_spread = family.lambda > 0.0 ? spread / family.lambda : spread;
    rep.equal_separation_ok = rep.lambda_spread <= 1e-10;

    // (2) pairwise inner products against c eps^2
    const double eps_sq = epsilon * epsilon;
    for (int i = 1; i <= family.N; ++i)
        for (int j = i + 1; j <= family.N; ++j) {
            const double q = pair_inner(family, i, j, grid_n);
            if (q > rep.max_cross_inner) {
                rep.max_cross_inner = q;
                rep.max_cross_i = i;
                rep.max_cross_j = j;
            }
        }
    rep.cross_ok = rep.max_cross_inner <= c * eps_sq;
    rep.smallest_passing_c = rep.max_cross_inner / eps_sq;

    // (3) squared norms against rho eps^2 ln N, with 2% quadrature slack
    for (int i = 1; i <= family.N; ++i) {
        const double q = pair_inner(family, i, i, grid_n);
        if (q > rep.max_sq_norm) {
            rep.max_sq_norm = q;
            rep.max_norm_i = i;
        }
    }
    rep.norm_ok = rep.max_sq_norm <= rho * eps_sq * std::log(double(family.N)) * 1.02;

    rep.bound_value = bound_value(rep.lambda_eps, c);
    return rep;
}

}  // namespace silab
