#pragma once

#include <vector>

#include "silab/common.hpp"
#include "silab/kernels.hpp"
#include "silab/noise_field.hpp"

namespace silab {

// ============================================================================
// Windowed kernel estimators.
//
// Every estimator in the family has the form
//
//     Fhat(x) = det(E) * Int K(E (t - x)) Y(dt)
//
// with K the product kernel and E one of two transform shapes: a single
// direction at bandwidth h, or a direction pair at bandwidth h.  Both map the
// kernel support onto a rectangle centred at x, so evaluation is shared.
// ============================================================================

struct TransformMatrix {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a21; }
    Vec2 apply(Vec2 p) const { return {a11 * p.x + a12 * p.y, a21 * p.x + a22 * p.y}; }
};

// Single-direction transform for unit theta:
//   rows [theta/h ; perp(theta)],  det = 1/h.
TransformMatrix matrix_single(Vec2 theta, double h);

// Direction-pair transform for unit theta, nu.  theta is replaced by -theta
// when nu . theta < 0, and with s = |nu . theta|:
//   rows [(theta+nu)/(2h(1+s)) ; perp(theta+nu)/(2(1+s))],  det = 1/(2h(1+s)).
TransformMatrix matrix_pair(Vec2 theta, Vec2 nu, double h);

// ----------------------------------------------------------------------------
// Rectangle form of a transform.  The kernel support |u|,|v| <= 1/2 pulls
// back to |omega . (t-x)| <= len_par/2, |perp(omega) . (t-x)| <= len_perp/2,
// and det(E) = 1/(len_par * len_perp).  Singles become (theta, h, 1); pairs
// become (unit(theta+nu), h*g, g) with g = sqrt(2(1+s)).
// ----------------------------------------------------------------------------

struct KernelWindow {
    Vec2 omega;              // unit axis of the window
    double len_par = 0.0;    // support length along omega
    double len_perp = 0.0;   // support length across omega

    double det() const { return 1.0 / (len_par * len_perp); }
};

KernelWindow window_single(Vec2 theta, double h);
KernelWindow window_pair(Vec2 theta, Vec2 nu, double h);

// Kernel weight of the window at offset delta = t - x.
double window_weight(const ProductKernel& kernel, const KernelWindow& window, Vec2 delta);

// ----------------------------------------------------------------------------
// Directions.  Singles are even in theta and pairs canonicalise the sign of
// theta against nu, so a net over the half circle [0, pi) loses nothing.
// ----------------------------------------------------------------------------

Vec2 direction_from_angle(double radians);
std::vector<Vec2> direction_grid(int n_directions);

// ----------------------------------------------------------------------------
// Evaluation.  Discrete estimates are weight-normalised,
//
//     Fhat(x) = sum_cells kappa * increment / sum_cells kappa * cell_area,
//
// which reproduces constants exactly and stays well defined when the window
// clips the observation boundary.
// ----------------------------------------------------------------------------

// Accumulate kernel-weighted sums over one window from batched cell data laid
// out as data[(iy*n + ix)*batch + b].  acc[0..batch) gains
// sum_cells kappa * data[cell,b]; the return value is sum_cells kappa *
// cell_area (the discrete kernel mass the normalisation divides by).
double accumulate_window(const GridSpec& grid, const double* data, int batch,
                         const ProductKernel& kernel, const KernelWindow& window,
                         Vec2 x, double* acc);

// Normalised estimate from one observation.  Throws when the window catches
// no kernel mass on the grid.
double estimate(const Observation& obs, const ProductKernel& kernel,
                const KernelWindow& window, Vec2 x);

double estimate_single(const Observation& obs, const ProductKernel& kernel,
                       Vec2 theta, double h, Vec2 x);
double estimate_pair(const Observation& obs, const ProductKernel& kernel,
                     Vec2 theta, Vec2 nu, double h, Vec2 x);

// One estimate per pyramid column, evaluated on the given level.
std::vector<double> estimate_batch(const FieldPyramid& pyramid, int level,
                                   const ProductKernel& kernel,
                                   const KernelWindow& window, Vec2 x);

}  // namespace silab
