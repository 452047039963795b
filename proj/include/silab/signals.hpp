#pragma once

// ==========================================================================
// Certified test-function generators
// ==========================================================================
// Univariate links with numerically certified smoothness-class membership,
// single-index field builders on top of them, and the perturbation family
// used by the lower-bound checker.  Generators are pure; the returned
// std::functions are immutable and safe to share across threads.

#include <functional>
#include <string>
#include <vector>

#include "silab/common.hpp"

namespace silab {

using Link = std::function<double(double)>;

// ==== smoothness classes ==================================================

enum class LinkShape { cusp, bump, sine };

// Hoelder class H(beta, L): with m = ceil(beta) - 1, the function has m
// continuous derivatives, sup |f^(j)| <= L for j = 0..m, and
// |f^(m)(t+h) - f^(m)(t)| <= L h^(beta-m) for all t, h.
struct HoelderSpec {
    double beta = 1.0;
    double L = 1.0;
    LinkShape shape = LinkShape::cusp;
    double center = 0.0;  // cusp apex / bump midpoint
};

// Nikolskii class N_p(beta, L): same derivative ladder with the L_p norm in
// place of the sup norm; |f^(m)|_p <= L for m = 1..ceil(beta)-1 and
// |f^(m)(.+h) - f^(m)(.)|_p <= L h^(beta-m).
struct NikolskiiSpec {
    double beta = 1.0;
    double L = 1.0;
    double p = 2.0;

    // p > 1 and beta*p > 1 (the range the global risk theory covers)
    void validate() const;
};

// m = ceil(beta) - 1, the number of whole derivatives below beta
int hoelder_order(double beta);

// ==== finite-difference certification =====================================
// Membership is checked on a dense grid instead of symbolically.  The
// certificate measures the largest rescaled finite-difference ratio
//   |D^(m+1)_h f(t)| / h^beta      (order-(m+1) forward difference at lag h)
// together with the derivative-size conditions of the class, and accepts
// when measured <= 1.02 * L.
//
// Contract used by both verifiers (tests rely on it):
//   * t runs over grid_n cell midpoints of [lo, hi] for L_p integrals and
//     over grid_n + 1 cell edges for sup norms;
//   * lags form the ladder h = (hi - lo)/8, halved while h >= 8 steps;
//   * derivative values use central differences with step (hi - lo) * 1e-4;
//   * f is evaluated up to (m+1) * (hi - lo)/8 beyond [lo, hi], so links
//     must be total functions (all generators here return total functions).

struct CertificationReport {
    double measured = 0.0;  // certified constant
    double bound = 0.0;     // 1.02 * L
    bool ok = false;
};

CertificationReport verify_hoelder(const Link& f, double beta, double L,
                                   double lo = -2.0, double hi = 2.0,
                                   int grid_n = 4096);
CertificationReport verify_nikolskii(const Link& f, double beta, double L, double p,
                                     double lo = -2.0, double hi = 2.0,
                                     int grid_n = 4096);
CertificationReport verify_nikolskii(const Link& f, const NikolskiiSpec& spec,
                                     double lo = -2.0, double hi = 2.0,
                                     int grid_n = 4096);

// ==== link generators =====================================================

// cusp  (beta <= 1):  f(u) = (L/2) |u-c|^beta exp(-(u-c)^2)
// sine  (any beta):   f(u) = (L/2) w^(-beta) sin(w (u-c)),  w = 3
// bump  (any beta):   scaled (1 - 4(u-c)^2)^k, k = hoelder_order(beta) + 2
// Every generated link is certified at (beta, L) before it is returned;
// certification failure throws.
Link make_hoelder(const HoelderSpec& spec);

// Flat level carrying one localized peak of width w at bump.center:
//   f(u) = flat_scale + (L/2) w^beta phi(|u - c| / w),
//   phi(t) = (1 - t^beta)(1 - t^2)^2 on [0, 1), 0 beyond.
// Exactly constant outside the peak, an exact |u-c|^beta power law at the
// apex, C^1 at the support edge.  Certified in H(beta, L); beta <= 1.
Link make_inhomogeneous(double flat_scale, const HoelderSpec& bump, double width);

// ==== single-index fields =================================================

struct SingleIndexSignal {
    Link link;
    Vec2 theta0{1.0, 0.0};
    double bound_M = 0.0;  // dense-grid sup of |link| over the projection range

    double operator()(Vec2 t) const { return link(theta0.dot(t)); }
};

SingleIndexSignal single_index_field(Link link, Vec2 theta0);

// Named presets for CLI use, e.g. "cusp:beta=0.5,L=1,theta=30deg".
// Shapes: cusp | bump | sine | inhomog | const | zero.
// Keys: beta, L, center, theta (radians, or "30deg"), w + flat (inhomog),
// value (const).  Unknown keys are rejected.
SingleIndexSignal parse_signal_preset(const std::string& text);

// ==== lower-bound hypothesis family =======================================

// Perturbation profile: supported in (-1/2, 1/2), member of H(beta, 1),
// nonzero at the origin.  Norms travel with the link so the family and the
// lower-bound checker can use closed forms where they exist.
struct FamilyBump {
    Link f;
    double at_zero = 0.0;
    double l2_sq = 0.0;  // integral of f^2
};

// (1 - 4v^2)^2 rescaled into H(beta, 1); closed-form scale and norms.
FamilyBump default_family_bump(double beta);

// The two-point-like family: F_0 = 0 and, for i = 1..N,
//   F_i(t) = L h^beta g(theta_i . (t - x) / h),
//   theta_i = (cos(i/N), sin(i/N)),
//   h = (a L^(-1) eps sqrt(ln(1/eps)))^(2/(2 beta + 1)),
//   N = ceil(eps^(-b)),  a^2 = 3^(-d) b / |g|_2^2.
// All F_i agree at x: |F_i(x)| = lambda = |g(0)| L h^beta.
struct HypothesisFamily {
    double beta = 1.0;
    double L = 1.0;
    double epsilon = 0.1;
    double b = 0.5;
    int dim = 2;  // ambient dimension entering a_frak; fields vary in t1, t2 only
    double a_frak = 0.0;
    double h = 0.0;
    double lambda = 0.0;
    int N = 0;
    Vec2 x{0.0, 0.0};
    FamilyBump g;
    std::vector<Vec2> directions;  // theta_1 .. theta_N

    // i = 0 is the zero hypothesis, i = 1..N the perturbations
    double field(int i, Vec2 t) const;
};

HypothesisFamily hypothesis_family(double beta, double L, double epsilon, double b,
                                   Vec2 x, const FamilyBump& g, int d = 2);
// same with the default bump for this beta
HypothesisFamily hypothesis_family(double beta, double L, double epsilon, double b,
                                   Vec2 x, int d = 2);

}  // namespace silab
