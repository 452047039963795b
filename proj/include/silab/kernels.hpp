#pragma once

#include <vector>

#include "silab/common.hpp"

namespace silab {

// ============================================================================
// Univariate smoothing kernels on [-1/2, 1/2] and their certified constants.
//
// Every kernel built here is an even polynomial restricted to |u| <= 1/2 and
// zero outside, so norms have closed forms and the bivariate product kernel
// evaluates with two short Horner chains.  Kernels are immutable after
// construction and safe to share across threads.
// ============================================================================

struct Kernel1D {
    // value(u) = sum_k coeffs[k] * u^(2k) for |u| <= 1/2, else 0
    std::vector<double> coeffs;

    double sup_norm = 0.0;    // ||K||_inf
    double l1_norm = 0.0;     // integral of |K|
    double l2_norm = 0.0;     // sqrt(integral of K^2)
    double lipschitz = 0.0;   // certified global Lipschitz constant Q
    int moment_order = 0;     // largest m with integral of u^j K(u) du = 0 for 1 <= j <= m

    static constexpr double support_halfwidth = 0.5;

    double operator()(double u) const {
        if (!(u > -support_halfwidth && u < support_halfwidth)) return 0.0;
        const double q = u * u;
        double acc = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * q + coeffs[k];
        return acc;
    }
};

// K(u, v) = K1(u) * K1(v)
struct ProductKernel {
    Kernel1D axis;

    double operator()(double u, double v) const { return axis(u) * axis(v); }
    double sup_norm() const { return axis.sup_norm * axis.sup_norm; }
};

// Parabolic kernel (3/2)(1 - 4u^2) on [-1/2, 1/2]: normalized, order 1,
// sup-norm 3/2, Lipschitz constant 6.
Kernel1D make_default_kernel();

// Smallest even-polynomial correction p(u)(1 - 4u^2)+ whose moments vanish
// through the requested order.  Symmetric kernels get odd orders for free,
// so requesting 2 returns the same kernel as requesting 3.
Kernel1D make_order_kernel(int moment_order);

// ----------------------------------------------------------------------------
// Certification: recompute every stored constant by grid quadrature and
// compare.  Used by tests and by `selftest`; grid_n is the number of
// quadrature cells across the support.
// ----------------------------------------------------------------------------

struct KernelCertification {
    double integral = 0.0;          // should be 1
    double sup_norm = 0.0;
    double l1_norm = 0.0;
    double l2_norm = 0.0;
    double lipschitz = 0.0;         // max finite-difference slope found
    std::vector<double> moments;    // moments[j] = integral of u^(j+1) K(u) du, j+1 = 1..moment_order+1
    bool normalized_ok = false;     // |integral - 1| small
    bool moments_ok = false;        // stated vanishing moments vanish
    bool constants_ok = false;      // stored norms match recomputation
    bool lipschitz_ok = false;      // no grid slope exceeds the stored constant
    bool norm_chain_ok = false;     // 1 <= l1 <= l2 <= sup for normalized kernels

    bool all_ok() const {
        return normalized_ok && moments_ok && constants_ok && lipschitz_ok && norm_chain_ok;
    }
};

// Evaluates `value` on the certification grid; accepts any callable so test
// doubles (e.g. a discontinuous pseudo-kernel) can be pushed through the same
// checks.  The grid extends past the support so boundary jumps are caught.
KernelCertification certify(const Kernel1D& kernel, int grid_n = 4096);
KernelCertification certify_callable(const std::function<double(double)>& value,
                                     const Kernel1D& claims, int grid_n = 4096);

}  // namespace silab
