#include "silab/noise_field.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "silab/rng.hpp"

namespace silab {

namespace {
void check_grid(const GridSpec& g) {
    require(g.half_width > 0.0, "grid half_width must be positive");
    require(g.n_per_axis >= 8, "grid needs at least 8 cells per axis");
}
}  // namespace

void check_epsilon(double epsilon, NoiseMode mode) {
    const double eps_max = std::exp(-1.0);
    if (epsilon == 0.0) {
        require(mode == NoiseMode::off,
                "epsilon = 0 requires deterministic mode (noise off); statistical runs need "
                "epsilon > 0");
        return;
    }
    require(epsilon > 0.0, "noise level must satisfy epsilon > 0");
    require(epsilon <= eps_max + 1e-15, "noise level must satisfy epsilon <= e^-1");
}

std::vector<double> field_samples(const std::function<double(Vec2)>& F, const GridSpec& grid) {
    check_grid(grid);
    const int n = grid.n_per_axis;
    std::vector<double> out(grid.cells());
    parallel_for(n, [&](std::size_t iy) {
        for (int ix = 0; ix < n; ++ix)
            out[iy * n + ix] = F(grid.center(ix, static_cast<int>(iy)));
    });
    return out;
}

Observation simulate(const std::function<double(Vec2)>& F, double epsilon, const GridSpec& grid,
                     std::uint64_t master_seed, std::uint64_t replicate, NoiseMode mode) {
    check_grid(grid);
    check_epsilon(epsilon, mode);

    Observation obs;
    obs.grid = grid;
    obs.epsilon = epsilon;
    obs.master_seed = master_seed;
    obs.replicate = replicate;
    obs.noise = mode;
    obs.increments.resize(grid.cells());

    const int n = grid.n_per_axis;
    const double area = grid.cell_area();
    const double noise_scale = (mode == NoiseMode::on) ? epsilon * std::sqrt(area) : 0.0;

    GaussianStream gauss(derive_stream_seed(master_seed, replicate));
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            double v = F(grid.center(ix, iy)) * area;
            if (noise_scale != 0.0) v += noise_scale * gauss.next();
            obs.increments[static_cast<std::size_t>(iy) * n + ix] = v;
        }
    }
    return obs;
}

double integrate_against(const Observation& obs, const std::function<double(Vec2)>& weight) {
    const int n = obs.grid.n_per_axis;
    double acc = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            acc += weight(obs.grid.center(ix, iy)) * obs.increments[static_cast<std::size_t>(iy) * n + ix];
    return acc;
}

// ----------------------------------------------------------------------------
// Text round trip
// ----------------------------------------------------------------------------

void dump_field(const Observation& obs, std::ostream& out) {
    char buf[64];
    out << "# field dump v1\n";
    out << "# half_width " << obs.grid.half_width << "\n";
    out << "# n_per_axis " << obs.grid.n_per_axis << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", obs.epsilon);
    out << "# epsilon " << buf << "\n";
    out << "# master_seed " << obs.master_seed << "\n";
    out << "# replicate " << obs.replicate << "\n";
    out << "# noise " << (obs.noise == NoiseMode::on ? "on" : "off") << "\n";
    for (double v : obs.increments) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << "\n";
    }
}

Observation load_field(std::istream& in) {
    Observation obs;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line == "# field dump v1",
            "field dump: missing or unknown header");
    bool have_noise = false;
    while (in.peek() == '#') {
        std::getline(in, line);
        std::istringstream ls(line);
        std::string hash, key;
        ls >> hash >> key;
        if (key == "half_width") ls >> obs.grid.half_width;
        else if (key == "n_per_axis") ls >> obs.grid.n_per_axis;
        else if (key == "epsilon") ls >> obs.epsilon;
        else if (key == "master_seed") ls >> obs.master_seed;
        else if (key == "replicate") ls >> obs.replicate;
        else if (key == "noise") {
            std::string v;
            ls >> v;
            obs.noise = (v == "on") ? NoiseMode::on : NoiseMode::off;
            have_noise = true;
        } else {
            throw guard_error("field dump: unknown header key '" + key + "'");
        }
    }
    require(have_noise, "field dump: incomplete header");
    check_grid(obs.grid);
    obs.increments.reserve(obs.grid.cells());
    double v;
    while (in >> v) obs.increments.push_back(v);
    require(obs.increments.size() == obs.grid.cells(),
            "field dump: increment count does not match the grid");
    return obs;
}

// ----------------------------------------------------------------------------
// Pyramid
// ----------------------------------------------------------------------------

int FieldPyramid::finest_level_with_step_at_most(double target_step) const {
    // levels run fine -> coarse; pick the coarsest that still meets the
    // target so the integrand touches the fewest cells
    for (int l = static_cast<int>(level_n.size()) - 1; l >= 0; --l)
        if (level_step(l) <= target_step) return l;
    return 0;  // nothing coarse enough: use the finest grid available
}

namespace {

void reduce_levels(FieldPyramid& pyr) {
    const int batch = pyr.batch;
    int n = pyr.level_n.back();
    while (n % 2 == 0 && n / 2 >= 4) {
        const int m = n / 2;
        const auto& fine = pyr.levels.back();
        std::vector<double> coarse(static_cast<std::size_t>(m) * m * batch);
        parallel_for(m, [&](std::size_t iy) {
            for (int ix = 0; ix < m; ++ix) {
                double* dst = &coarse[(iy * m + ix) * batch];
                const std::size_t r0 = (2 * iy) * static_cast<std::size_t>(n), r1 = r0 + n;
                const double* s00 = &fine[(r0 + 2 * ix) * batch];
                const double* s01 = s00 + batch;
                const double* s10 = &fine[(r1 + 2 * ix) * batch];
                const double* s11 = s10 + batch;
                for (int b = 0; b < batch; ++b) dst[b] = s00[b] + s01[b] + s10[b] + s11[b];
            }
        });
        pyr.levels.push_back(std::move(coarse));
        pyr.level_n.push_back(m);
        n = m;
    }
}

}  // namespace

FieldPyramid simulate_pyramid(const std::vector<double>& f_samples, double epsilon,
                              const GridSpec& grid, std::uint64_t master_seed,
                              std::uint64_t first_replicate, int batch, NoiseMode mode) {
    check_grid(grid);
    check_epsilon(epsilon, mode);
    require(batch >= 1, "pyramid batch must be >= 1");
    require(f_samples.empty() || f_samples.size() == grid.cells(),
            "field sample table does not match the grid");

    FieldPyramid pyr;
    pyr.grid = grid;
    pyr.batch = batch;
    pyr.epsilon = epsilon;
    pyr.level_n.push_back(grid.n_per_axis);
    pyr.levels.emplace_back(grid.cells() * batch);

    const int n = grid.n_per_axis;
    const double area = grid.cell_area();
    const double noise_scale = (mode == NoiseMode::on) ? epsilon * std::sqrt(area) : 0.0;
    auto& base = pyr.levels[0];

    parallel_for(batch, [&](std::size_t b) {
        GaussianStream gauss(derive_stream_seed(master_seed, first_replicate + b));
        for (std::size_t idx = 0; idx < static_cast<std::size_t>(n) * n; ++idx) {
            double v = f_samples.empty() ? 0.0 : f_samples[idx] * area;
            if (noise_scale != 0.0) v += noise_scale * gauss.next();
            base[idx * batch + b] = v;
        }
    });

    reduce_levels(pyr);
    return pyr;
}

FieldPyramid build_pyramid(const Observation& obs) {
    FieldPyramid pyr;
    pyr.grid = obs.grid;
    pyr.batch = 1;
    pyr.epsilon = obs.epsilon;
    pyr.level_n.push_back(obs.grid.n_per_axis);
    pyr.levels.push_back(obs.increments);
    reduce_levels(pyr);
    return pyr;
}

}  // namespace silab
