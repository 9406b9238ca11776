#pragma once

#include "densflow/density.hpp"
#include "densflow/exponents.hpp"
#include "densflow/geometry.hpp"
#include "densflow/grid.hpp"
#include "densflow/harness.hpp"
#include "densflow/regime.hpp"
#include "densflow/solver.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace densflow {

enum class ExperimentKind { Subcritical, Universal, BlowupProbe };

struct EmbeddingSettings {
    int n_cells = 4000;
    double r_max = 2.0;
    std::size_t random_count = 1000;
    double s_max = 1e3;
    /// R in the weighted embeddings.
    double radius = 0.5;
    /// Exponent of the Euclidean decay embedding; 0 skips it.
    double p1 = 0.0;
};

/// A fully validated experiment description.
///
/// INI layout (`;` starts a comment):
///   seed, output_dir                      top level
///   [exponents]  N p m
///   [geometry]   kind = euclidean | tabulated, table
///   [density]    kind = power_law | tabulated, alpha, table
///   [solver]     n_cells r_max(number | auto) gamma layout core_radius
///                core_cells cfl eps_supp eps_reg t_final t0 dt_max
///                amplitude bump_radius backend
///   [experiment] kind tolerances mass_factor domain_doublings
///                scaling_lambda scaling_tolerance
///   [classify]   r_max decades tail_decades per_decade margin psi_cap
///   [embeddings] n_cells r_max random_count s_max radius p1
struct Config {
    Exponents exps{3, 2.0, 2.0};
    ManifoldHandle geometry;
    DensityHandle density;
    GridSpec grid;
    bool auto_r_max = true;
    double gamma = 1.0;
    SolverSettings solver;
    RunSpec run;
    ExperimentKind experiment = ExperimentKind::Subcritical;
    ExperimentConfig tolerances;
    ClassifyOptions classify;
    EmbeddingSettings embeddings;
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    /// Resolved key=value pairs in sorted order; the digest is computed from them.
    std::map<std::string, std::string> echo;

    ExperimentConfig experiment_config() const;
    /// 16 hex digits of FNV-1a over the echo.
    std::string digest() const;
    /// Re-resolves r_max and the echo after a seed or output override.
    void set_seed(std::uint64_t s);
};

/// Reads and validates an INI file; table paths are relative to its directory.
Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& base_dir = ".");

/// Weighted mass of the default initial bump, by quadrature.
double initial_mass(const ManifoldProfile& geom, const DensityProfile& dens, double amplitude,
                    double radius);

} // namespace densflow
