#include "silab/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace silab {

namespace {

// integral of u^(2j) * (1 - 4u^2) over [-1/2, 1/2]:
//   2 * [ (1/2)^(2j+1)/(2j+1) - 4 (1/2)^(2j+3)/(2j+3) ]
double base_moment(int j) {
    const double p = std::pow(0.5, 2 * j + 1);
    return 2.0 * (p / (2 * j + 1) - 4.0 * p * 0.25 / (2 * j + 3));
}

// Exact moments/norms for an even-coefficient polynomial on [-1/2, 1/2].
double poly_integral_u2j(const std::vector<double>& coeffs, int j) {
    // integral of u^(2j) * sum_k c_k u^(2k) du = sum_k c_k * 2 * (1/2)^(2j+2k+1) / (2j+2k+1)
    double acc = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const int pw = 2 * j + 2 * static_cast<int>(k) + 1;
        acc += coeffs[k] * 2.0 * std::pow(0.5, pw) / pw;
    }
    return acc;
}

std::vector<double> poly_square(const std::vector<double>& c) {
    std::vector<double> sq(2 * c.size() - 1, 0.0);
    for (std::size_t a = 0; a < c.size(); ++a)
        for (std::size_t b = 0; b < c.size(); ++b) sq[a + b] += c[a] * c[b];
    return sq;
}

double eval_even_poly(const std::vector<double>& c, double u) {
    const double q = u * u;
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * q + c[k];
    return acc;
}

// Fine-grid scan for sup |K|, integral |K|, and max |K'|-slope.  The evaluated
// polynomial may dip negative (higher-order kernels), so l1 needs quadrature.
void scan_constants(const std::vector<double>& coeffs, double& sup, double& l1, double& lip) {
    const int n = 1 << 16;
    const double step = 1.0 / n;
    sup = 0.0;
    l1 = 0.0;
    double prev = 0.0;
    lip = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = -0.5 + (i + 0.5) * step;
        const double v = eval_even_poly(coeffs, u);
        sup = std::max(sup, std::abs(v));
        l1 += std::abs(v) * step;
        if (i > 0) lip = std::max(lip, std::abs(v - prev) / step);
        prev = v;
    }
    // continuity at the support edge means no extra boundary slope, but take
    // the half-cell into account anyway
    lip = std::max(lip, std::abs(eval_even_poly(coeffs, -0.5 + 0.5 * step)) / (0.5 * step) * 0.5);
}

Kernel1D finalize(std::vector<double> coeffs, int moment_order) {
    Kernel1D k;
    k.coeffs = std::move(coeffs);
    const auto sq = poly_square(k.coeffs);
    k.l2_norm = std::sqrt(poly_integral_u2j(sq, 0));
    double sup, l1, lip;
    scan_constants(k.coeffs, sup, l1, lip);
    k.sup_norm = sup;
    k.l1_norm = l1;
    k.lipschitz = lip;
    k.moment_order = moment_order;
    return k;
}

}  // namespace

Kernel1D make_default_kernel() {
    // (3/2)(1 - 4u^2) = 1.5 - 6u^2
    Kernel1D k = finalize({1.5, -6.0}, 1);
    // closed forms, more precise than the scan
    k.sup_norm = 1.5;
    k.l1_norm = 1.0;
    k.l2_norm = std::sqrt(1.2);
    k.lipschitz = 6.0;
    return k;
}

Kernel1D make_order_kernel(int moment_order) {
    require(moment_order >= 1, "kernel moment order must be >= 1");
    // K(u) = p(u^2) * (1 - 4u^2) with p chosen so that even moments
    // 2, 4, ..., 2*floor(m/2) vanish and the integral is 1.  Odd moments
    // vanish by symmetry.
    const int n_even = moment_order / 2;
    const int dim = n_even + 1;

    // Solve M c = e1 where M[r][k] = integral u^(2r) u^(2k) (1-4u^2) du.
    std::vector<std::vector<double>> M(dim, std::vector<double>(dim + 1, 0.0));
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) M[r][c] = base_moment(r + c);
        M[r][dim] = (r == 0) ? 1.0 : 0.0;
    }
    for (int col = 0; col < dim; ++col) {  // Gaussian elimination, partial pivot
        int piv = col;
        for (int r = col + 1; r < dim; ++r)
            if (std::abs(M[r][col]) > std::abs(M[piv][col])) piv = r;
        std::swap(M[col], M[piv]);
        for (int r = 0; r < dim; ++r) {
            if (r == col) continue;
            const double f = M[r][col] / M[col][col];
            for (int c = col; c <= dim; ++c) M[r][c] -= f * M[col][c];
        }
    }
    std::vector<double> p(dim);
    for (int i = 0; i < dim; ++i) p[i] = M[i][dim] / M[i][i];

    // expand p(u^2) * (1 - 4u^2)
    std::vector<double> coeffs(dim + 1, 0.0);
    for (int i = 0; i < dim; ++i) {
        coeffs[i] += p[i];
        coeffs[i + 1] -= 4.0 * p[i];
    }
    // achieved order: evens vanish through 2*n_even, odds always vanish
    return finalize(std::move(coeffs), 2 * n_even + 1);
}

KernelCertification certify_callable(const std::function<double(double)>& value,
                                     const Kernel1D& claims, int grid_n) {
    require(grid_n >= 64, "certification grid must have at least 64 cells");
    KernelCertification out;

    // grid extends past the support so jumps at the edge show up in the
    // Lipschitz scan
    const double lo = -0.75, hi = 0.75;
    const int n = grid_n + grid_n / 2;
    const double step = (hi - lo) / n;

    std::vector<double> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = value(lo + (i + 0.5) * step);

    double integral = 0.0, l1 = 0.0, l2sq = 0.0, sup = 0.0, lip = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = vals[i];
        integral += v * step;
        l1 += std::abs(v) * step;
        l2sq += v * v * step;
        sup = std::max(sup, std::abs(v));
        if (i > 0) lip = std::max(lip, std::abs(v - vals[i - 1]) / step);
    }

    // Normalization and moments on a finer grid restricted to the support:
    // the 1e-8 gates sit below the midpoint error of the display grid.
    const int jmax = std::max(claims.moment_order + 1, 1);
    std::vector<double> moments(jmax, 0.0);
    {
        const int nm = 4 * grid_n;
        const double mstep = 1.0 / nm;
        integral = 0.0;
        for (int i = 0; i < nm; ++i) {
            const double u = -0.5 + (i + 0.5) * mstep;
            const double v = value(u);
            integral += v * mstep;
            double upow = u;
            for (int j = 0; j < jmax; ++j) {
                moments[j] += upow * v * mstep;
                upow *= u;
            }
        }
    }

    out.integral = integral;
    out.sup_norm = sup;
    out.l1_norm = l1;
    out.l2_norm = std::sqrt(l2sq);
    out.lipschitz = lip;
    out.moments = moments;

    out.normalized_ok = std::abs(integral - 1.0) <= 1e-8;
    out.moments_ok = true;
    for (int j = 0; j < claims.moment_order; ++j)
        if (std::abs(moments[j]) > 1e-8) out.moments_ok = false;
    // Grid extrema miss a smooth peak by at most |K''| (step/2)^2 / 2; bound
    // the curvature from the coefficients so steep kernels still certify.
    double curv = 0.0;
    for (std::size_t k = 1; k < claims.coeffs.size(); ++k)
        curv += std::abs(claims.coeffs[k]) * (2.0 * k) * (2.0 * k - 1.0) *
                std::pow(0.5, 2.0 * k - 2.0);
    const double tol = 1e-6;
    const double tol_sup = std::max(tol, curv * step * step);
    out.constants_ok = std::abs(sup - claims.sup_norm) <= tol_sup &&
                       std::abs(l1 - claims.l1_norm) <= tol &&
                       std::abs(out.l2_norm - claims.l2_norm) <= tol;
    // grid slopes underestimate the true constant; anything past it by more
    // than the one-cell curvature allowance is a violation
    out.lipschitz_ok = lip <= claims.lipschitz * (1.0 + 1e-3) + 1e-9;
    out.norm_chain_ok = l1 >= 1.0 - 1e-6 && l1 <= out.l2_norm + 1e-9 && out.l2_norm <= sup + 1e-9;
    return out;
}

KernelCertification certify(const Kernel1D& kernel, int grid_n) {
    return certify_callable([&kernel](double u) { return kernel(u); }, kernel, grid_n);
}

}  // namespace silab
