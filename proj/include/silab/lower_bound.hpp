#pragma once

// ==========================================================================
// Hypothesis-family checker for the minimax lower bound
// ==========================================================================
// The reduction behind the lower bound needs three facts about the family
// F_0 = 0, F_1 .. F_N on D = [-1,1]^dim (inner products in L_2(D)):
//
//   (1) |F_i(x) - F_0(x)| = lambda            for every i,
//   (2) <F_i - F_0, F_j - F_0>  <= c eps^2    for every i != j,
//   (3) ||F_i - F_0||_2^2 <= rho eps^2 ln N   for every i,
//
// and then yields, for any estimator and any r >= 1,
//
//   inf sup (E|F~(x) - F(x)|^r)^(1/r) >= (1/2)(1 - sqrt((e^c-1)/(e^c+3))) lambda.
//
// check_family verifies (1)-(3) for a HypothesisFamily by midpoint quadrature
// and reports the margins; bound_value evaluates the resulting risk bound.
// The ridge fields vary only in the first two coordinates, so a dim-
// dimensional integral over D equals the planar one times 2^(dim-2).
//
// Closed forms the quadrature is checked against (g the family bump):
//   <F_i, F_j>    <= 3^(dim-2) L^2 h^(2 beta + 2) ||g||_1^2 / sin(|i-j|/N),
//   ||F_i||_2^2   <= 3^(dim-1) ||g||_2^2 L^2 h^(2 beta + 1),
// and the second right side collapses to (b/3) eps^2 ln(1/eps), which is why
// rho = 1/3 is the natural default.

#include "silab/common.hpp"
#include "silab/signals.hpp"

namespace silab {

// ==== report ==============================================================

struct LBReport {
    double lambda_eps = 0.0;        // common separation |F_i(x)| at the probe
    double lambda_spread = 0.0;     // worst relative deviation from lambda_eps
    double max_cross_inner = 0.0;   // max over i < j of <F_i, F_j>
    int max_cross_i = 0;            // argmax pair (0 when N < 2)
    int max_cross_j = 0;
    double max_sq_norm = 0.0;       // max over i of ||F_i||_2^2
    int max_norm_i = 0;
    double c_used = 0.0;
    double rho_used = 0.0;
    double smallest_passing_c = 0.0;  // max_cross_inner / eps^2
    double bound_value = 0.0;         // risk bound at c_used
    bool equal_separation_ok = false;  // condition (1)
    bool cross_ok = false;             // condition (2)
    bool norm_ok = false;              // condition (3), 2% quadrature slack

    bool all_ok() const { return equal_separation_ok && cross_ok && norm_ok; }
};

// ==== operations ==========================================================

// (1/2)(1 - sqrt((e^c - 1)/(e^c + 3))) * lambda_eps for c > 0; the factor
// rises to 1/2 as c -> 0+ and falls monotonically in c.
double bound_value(double lambda_eps, double c);

// <F_i, F_j> over [-1,1]^dim by midpoint quadrature on the first two
// coordinates; index 0 is the zero hypothesis, so i == 0 or j == 0 gives 0.
double pair_inner(const HypothesisFamily& family, int i, int j, int grid_n = 1024);

// Max over i < j of quadrature <F_i, F_j> divided by its closed-form bound
// above.  Exact arithmetic keeps every ratio <= 1; quadrature can exceed 1
// only by its own discretization error.  Requires N >= 2.
double cross_inner_bound_check(const HypothesisFamily& family, int grid_n = 1024);

// Verify conditions (1)-(3) at level c, rho and fill in the margins.
// epsilon must match the family's construction noise level; it is the eps
// appearing on the right sides of (2) and (3).
LBReport check_family(const HypothesisFamily& family, double epsilon, double c = 1.0,
                      double rho = 1.0 / 3.0, int grid_n = 1024);

}  // namespace silab
