#pragma once

#include "densflow/geometry.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace densflow {

enum class GridLayout { Uniform, Stretched };

struct GridSpec {
    double r_max = 1.0;
    int n_cells = 2000;
    GridLayout layout = GridLayout::Uniform;
    /// Stretched only: [0, core_radius] is covered by `core_cells` equal cells,
    /// the remaining cells grow geometrically out to r_max.
    double core_radius = 0.0;
    int core_cells = 0;
};

/// Finite-volume discretisation of a ball B_{R_max} of a radial manifold.
///
/// Cell i spans [edge_i, edge_{i+1}]; its weight is the exact shell volume
/// V(edge_{i+1}) - V(edge_i). Face f sits at edge_f with area sigma(edge_f);
/// faces 0 and n are the symmetry centre and the outer wall.
class RadialGrid {
public:
    RadialGrid(ManifoldHandle geometry, const GridSpec& spec);

    std::size_t n_cells() const noexcept { return centers_.size(); }
    /// Width of the innermost cell (the uniform spacing for Uniform grids).
    double dr() const noexcept { return edges_[1] - edges_[0]; }
    double r_max() const noexcept { return edges_.back(); }
    GridLayout layout() const noexcept { return layout_; }

    std::span<const double> edges() const noexcept { return edges_; }
    std::span<const double> centers() const noexcept { return centers_; }
    std::span<const double> cell_weights() const noexcept { return weights_; }
    /// sigma at every edge, size n_cells + 1.
    std::span<const double> face_areas() const noexcept { return face_areas_; }
    /// Distance between the centres adjacent to face f (f = 1..n-1); zero at 0 and n.
    std::span<const double> face_spacing() const noexcept { return face_spacing_; }
    /// Width of the cell containing r (the local resolution).
    double cell_width_at(double r) const;

    const ManifoldProfile& geometry() const noexcept { return *geometry_; }
    const ManifoldHandle& geometry_handle() const noexcept { return geometry_; }

private:
    ManifoldHandle geometry_;
    GridLayout layout_;
    std::vector<double> edges_;
    std::vector<double> centers_;
    std::vector<double> weights_;
    std::vector<double> face_areas_;
    std::vector<double> face_spacing_;
};

/// Uniform grid with `n_cells` cells on [0, R_max]. Requires n_cells >= 2.
RadialGrid build_grid(ManifoldHandle geometry, double r_max, int n_cells);

} // namespace densflow
