#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "silab/common.hpp"

namespace silab {

// ============================================================================
// Discretized white-noise observations.
//
// The observation of a signal F at noise level eps on a uniform grid over
// [-w, w]^2 stores one increment per cell:
//
//     increment(i, j) = F(t_ij) * cell_area + eps * sqrt(cell_area) * xi_ij
//
// with t_ij the cell center and xi_ij iid standard normal.  Integrals of a
// weight function against the observation are plain sums, so block-summed
// copies of the increments (see FieldPyramid) are again observations of the
// same field on a coarser grid: noise variance scales exactly with cell area.
// ============================================================================

struct GridSpec {
    double half_width = 1.25;  // default covers every transformed kernel support
    int n_per_axis = 256;

    double step() const { return 2.0 * half_width / n_per_axis; }
    double cell_area() const { return step() * step(); }
    Vec2 center(int ix, int iy) const {
        return {-half_width + (ix + 0.5) * step(), -half_width + (iy + 0.5) * step()};
    }
    std::size_t cells() const {
        return static_cast<std::size_t>(n_per_axis) * static_cast<std::size_t>(n_per_axis);
    }
};

enum class NoiseMode { on, off };

struct Observation {
    GridSpec grid;
    double epsilon = 0.0;
    std::uint64_t master_seed = 0;
    std::uint64_t replicate = 0;
    NoiseMode noise = NoiseMode::on;
    std::vector<double> increments;  // row-major: index = iy * n + ix

    double increment(int ix, int iy) const {
        return increments[static_cast<std::size_t>(iy) * grid.n_per_axis + ix];
    }
};

// Noise level guard shared by every entry point: eps must lie in (0, e^-1];
// eps = 0 is allowed only with noise explicitly off (deterministic testing).
void check_epsilon(double epsilon, NoiseMode mode);

// F evaluated at all cell centers, row-major.  Sampled once and shared across
// replicates.
std::vector<double> field_samples(const std::function<double(Vec2)>& F, const GridSpec& grid);

Observation simulate(const std::function<double(Vec2)>& F, double epsilon, const GridSpec& grid,
                     std::uint64_t master_seed, std::uint64_t replicate = 0,
                     NoiseMode mode = NoiseMode::on);

// sum of weight(t_ij) * increment(i, j) over all cells
double integrate_against(const Observation& obs, const std::function<double(Vec2)>& weight);

// Text round trip: header lines with the grid metadata, then one increment
// per line, row-major.
void dump_field(const Observation& obs, std::ostream& out);
Observation load_field(std::istream& in);

// ----------------------------------------------------------------------------
// Batched multi-resolution storage.
//
// levels[l] holds, for a batch of B observations, the 2^l x 2^l block sums of
// their increments, interleaved cell-major:
//
//     levels[l][(iy * n_l + ix) * B + b]
//
// Block sums keep the white-noise law exact on the coarser grid, so an
// estimator may integrate against whichever level resolves its bandwidth,
// and batch evaluation turns into contiguous fused multiply-adds over b.
// ----------------------------------------------------------------------------

struct FieldPyramid {
    GridSpec grid;
    int batch = 0;
    double epsilon = 0.0;
    std::vector<int> level_n;                 // cells per axis at each level
    std::vector<std::vector<double>> levels;  // see layout above

    int finest_level_with_step_at_most(double target_step) const;
    double level_step(int l) const { return 2.0 * grid.half_width / level_n[l]; }
};

// Simulates `batch` replicates (indices first_replicate .. first_replicate+B-1)
// and reduces them.  f_samples comes from field_samples(); pass an empty
// vector for the zero signal.
FieldPyramid simulate_pyramid(const std::vector<double>& f_samples, double epsilon,
                              const GridSpec& grid, std::uint64_t master_seed,
                              std::uint64_t first_replicate, int batch,
                              NoiseMode mode = NoiseMode::on);

// Single-observation wrapper (batch = 1) used by the one-shot estimator API.
FieldPyramid build_pyramid(const Observation& obs);

}  // namespace silab
