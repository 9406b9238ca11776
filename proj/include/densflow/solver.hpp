#pragma once

#include "densflow/density.hpp"
#include "densflow/exponents.hpp"
#include "densflow/grid.hpp"
#include "densflow/kernels.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace densflow {

enum class Backend { Reference, Parallel };

struct SolverSettings {
    double cfl = 0.45;
    double eps_reg = 0.0;
    double eps_supp = 1e-6;
    double dt_max = std::numeric_limits<double>::infinity();
    int max_halvings = 40;
    Backend backend = Backend::Parallel;
};

struct SolverState {
    std::vector<double> field;
    double time = 0.0;
    double dt = 0.0;
    long steps = 0;
    /// sup(u0); the support threshold is eps_supp times this.
    double reference_amplitude = 0.0;
    bool interface_near_boundary = false;
    /// One past the last positive cell; lets the parallel kernel skip the
    /// empty tail. Always an upper bound.
    std::size_t support_end = 0;
};

struct Observables {
    double sup_norm = 0.0;
    double weighted_mass = 0.0;
    double interface_radius = 0.0;
    bool near_boundary = false;
};

/// sup u, sum rho(r_i) w_i u_i and the outermost centre with
/// u_i > eps_supp * reference_amplitude. `near_boundary` is set when some
/// cell beyond 0.9 R_max exceeds eps_supp times the current sup.
Observables observables(std::span<const double> field, const RadialGrid& grid,
                        const DensityProfile& dens, double eps_supp, double reference_amplitude);

/// Explicit conservative finite-volume integrator for
/// rho u_t = sigma^{-1} (sigma u^{m-1} |u_r|^{p-2} u_r)_r with zero flux at
/// r = 0 and r = R_max.
class Solver {
public:
    Solver(RadialGrid grid, DensityHandle density, Exponents exps, SolverSettings settings);

    SolverState initial_state(std::vector<double> u0) const;

    /// cfl / (max_i sum_faces sigma_f k_f / h_f / (rho_i w_i) + 1e-300), capped at
    /// dt_max. k_f = max(1, p-1) ubar^{m-1} (|D|^2 + eps^2)^{(p-2)/2}.
    double stable_dt(const SolverState& state) const;

    /// Advances by state.dt, halving on a negative value (StabilityError after
    /// max_halvings).
    SolverState step(SolverState state) const;

    /// Steps at the stable rate until exactly t_target.
    void advance_to(SolverState& state, double t_target) const;

    Observables observe(const SolverState& state) const;

    const RadialGrid& grid() const noexcept { return grid_; }
    const DensityProfile& density() const noexcept { return *density_; }
    const Exponents& exponents() const noexcept { return exps_; }
    const SolverSettings& settings() const noexcept { return settings_; }

private:
    double compute_fluxes(const SolverState& state) const;
    bool try_update(const SolverState& state, double dt) const;
    void commit(SolverState& state, double dt) const;

    RadialGrid grid_;
    DensityHandle density_;
    Exponents exps_;
    SolverSettings settings_;
    FluxLaw law_;
    kernels::StepCoefficients coeffs_;

    // Scratch reused across steps; a Solver drives one run at a time.
    mutable std::vector<double> flux_;
    mutable std::vector<double> rate_;
    mutable std::vector<double> next_;
};

/// Free-function forms of the solver operations.
double stable_dt(const SolverState& state, const RadialGrid& grid, const DensityHandle& dens,
                 const Exponents& exps, const SolverSettings& settings);
SolverState step(const SolverState& state, const RadialGrid& grid, const DensityHandle& dens,
                 const Exponents& exps, const SolverSettings& settings);

/// A*max(1-(r/R0)^2, 0)^2 sampled at cell centres.
std::vector<double> bump_profile(const RadialGrid& grid, double amplitude, double radius);

// ---------------------------------------------------------------------------
// Runs

struct RunSample {
    double t = 0.0;
    double sup = 0.0;
    double mass = 0.0;
    double interface = 0.0;

    friend bool operator==(const RunSample&, const RunSample&) = default;
};

struct RunRecord {
    std::string config_digest;
    std::vector<RunSample> samples;
    /// Index of the first sample taken with the interface near the wall;
    /// samples from there on are excluded from fits.
    std::size_t first_flagged = npos;
    std::string final_state_path;

    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    bool flagged() const noexcept { return first_flagged != npos; }
    /// Samples before the first flagged one.
    std::vector<RunSample> unflagged() const;
};

struct RunSpec {
    double amplitude = 1.0;
    double bump_radius = 1.0;
    double t_final = 0.0;
    /// First positive sample time; samples follow t0 2^{k/4}.
    double t0 = 1e-3;
    std::string config_digest;
};

/// Called after each sample with the state, its observables and the sample index.
using SampleObserver =
    std::function<void(const SolverState&, const Observables&, std::size_t)>;

struct RunResult {
    RunRecord record;
    SolverState final_state;
};

/// Sample times 0, t0 2^{k/4} < t_final, t_final.
std::vector<double> sample_times(double t0, double t_final);

RunResult run(const Solver& solver, const RunSpec& spec, const SampleObserver& observer = {});

} // namespace densflow
