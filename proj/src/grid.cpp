#include "densflow/grid.hpp"

#include "densflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace densflow {

namespace {

std::vector<double> uniform_edges(double r_max, int n) {
    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    const double dr = r_max / n;
    for (int i = 0; i <= n; ++i) {
        e[static_cast<std::size_t>(i)] = i * dr;
    }
    e.back() = r_max;
    return e;
}

std::vector<double> stretched_edges(const GridSpec& spec) {
    const int n = spec.n_cells;
    const int core = spec.core_cells;
    if (core < 1 || core >= n || !(spec.core_radius > 0.0) || !(spec.core_radius < spec.r_max)) {
        throw ConfigError("stretched grid needs 0 < core_radius < R_max and 1 <= core_cells < n_cells");
    }
    const double dr = spec.core_radius / core;
    const int outer = n - core;
    const double span = spec.r_max - spec.core_radius;
    if (span <= outer * dr) {
        throw ConfigError("stretched grid: outer cells would be narrower than the core spacing");
    }
    // Solve sum_{k=1..outer} dr g^k = span for the growth ratio g > 1.
    const auto total = [&](double g) {
        return dr * g * (std::pow(g, outer) - 1.0) / (g - 1.0);
    };
    double lo = 1.0 + 1e-14;
    double hi = 2.0;
    while (total(hi) < span) {
        hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) < span ? lo : hi) = mid;
    }
    const double g = 0.5 * (lo + hi);

    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= core; ++i) {
        e[static_cast<std::size_t>(i)] = i * dr;
    }
    e[static_cast<std::size_t>(core)] = spec.core_radius;
    double width = dr;
    for (int i = core + 1; i <= n; ++i) {
        width *= g;
        e[static_cast<std::size_t>(i)] = e[static_cast<std::size_t>(i - 1)] + width;
    }
    e.back() = spec.r_max;
    return e;
}

} // namespace

RadialGrid::RadialGrid(ManifoldHandle geometry, const GridSpec& spec)
    : geometry_(std::move(geometry)), layout_(spec.layout) {
    if (!geometry_) {
        throw ConfigError("grid needs a geometry");
    }
    if (!(spec.r_max > 0.0)) {
        throw ConfigError("grid needs R_max > 0");
    }
    if (spec.n_cells < 2) {
        throw ConfigError("grid needs at least two cells");
    }
    if (spec.r_max > geometry_->max_radius()) {
        throw RangeError("R_max beyond the geometry's tabulated range");
    }
    edges_ = spec.layout == GridLayout::Uniform ? uniform_edges(spec.r_max, spec.n_cells)
                                                : stretched_edges(spec);
    const std::size_t n = edges_.size() - 1;
    centers_.resize(n);
    weights_.resize(n);
    face_areas_.resize(n + 1);
    face_spacing_.assign(n + 1, 0.0);

    std::vector<double> vol(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        vol[i] = geometry_->volume(edges_[i]);
        face_areas_[i] = edges_[i] == 0.0 ? 0.0 : geometry_->area(edges_[i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        centers_[i] = 0.5 * (edges_[i] + edges_[i + 1]);
        weights_[i] = vol[i + 1] - vol[i];
        if (!(weights_[i] > 0.0)) {
            throw ConfigError("grid cell with non-positive volume");
        }
    }
    for (std::size_t f = 1; f < n; ++f) {
        face_spacing_[f] = centers_[f] - centers_[f - 1];
    }
}

double RadialGrid::cell_width_at(double r) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), r);
    std::size_t k = it == edges_.begin() ? 0 : static_cast<std::size_t>(it - edges_.begin()) - 1;
    k = std::min(k, n_cells() - 1);
    return edges_[k + 1] - edges_[k];
}

RadialGrid build_grid(ManifoldHandle geometry, double r_max, int n_cells) {
    GridSpec spec;
    spec.r_max = r_max;
    spec.n_cells = n_cells;
    return RadialGrid(std::move(geometry), spec);
}

} // namespace densflow
