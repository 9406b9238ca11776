#include "densflow/solver.hpp"

#include "densflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace densflow {

Observables observables(std::span<const double> field, const RadialGrid& grid,
                        const DensityProfile& dens, double eps_supp, double reference_amplitude) {
    Observables obs;
    const auto centers = grid.centers();
    const auto weights = grid.cell_weights();
    const double threshold = eps_supp * reference_amplitude;
    for (std::size_t i = 0; i < field.size(); ++i) {
        const double u = field[i];
        obs.sup_norm = std::max(obs.sup_norm, u);
        if (u != 0.0) {
            obs.weighted_mass += dens.rho(centers[i]) * weights[i] * u;
        }
        if (u > threshold && u > 0.0) {
            obs.interface_radius = centers[i];
        }
    }
    const double wall = 0.9 * grid.r_max();
    if (obs.interface_radius >= wall) {
        obs.near_boundary = true;
    }
    const double tail_threshold = eps_supp * obs.sup_norm;
    for (std::size_t i = field.size(); i-- > 0 && centers[i] >= wall;) {
        if (field[i] > tail_threshold && field[i] > 0.0) {
            obs.near_boundary = true;
            break;
        }
    }
    return obs;
}

Solver::Solver(RadialGrid grid, DensityHandle density, Exponents exps, SolverSettings settings)
    : grid_(std::move(grid)), density_(std::move(density)), exps_(exps), settings_(settings),
      law_(exps, settings.eps_reg) {
    if (!density_) {
        throw ConfigError("solver needs a density");
    }
    if (!(settings_.cfl > 0.0 && settings_.cfl <= 1.0)) {
        throw ConfigError("cfl must lie in (0, 1]");
    }
    if (exps_.p() < 2.0 && !(settings_.eps_reg > 0.0)) {
        throw ConfigError("p < 2 needs a positive gradient regularisation eps_reg");
    }
    coeffs_ = kernels::make_coefficients(grid_, *density_);
    const std::size_t n = grid_.n_cells();
    flux_.assign(n + 1, 0.0);
    rate_.assign(n + 1, 0.0);
    next_.assign(n, 0.0);
}

SolverState Solver::initial_state(std::vector<double> u0) const {
    if (u0.size() != grid_.n_cells()) {
        throw ConfigError("initial field size does not match the grid");
    }
    for (double v : u0) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError("initial field must be finite and nonnegative");
        }
    }
    SolverState s;
    s.reference_amplitude = *std::max_element(u0.begin(), u0.end());
    s.support_end = kernels::support_end(u0, u0.size());
    s.field = std::move(u0);
    return s;
}

double Solver::compute_fluxes(const SolverState& state) const {
    if (settings_.backend == Backend::Reference) {
        return kernels::fluxes_reference(state.field, coeffs_, law_, flux_, rate_);
    }
    return kernels::fluxes_parallel(state.field, coeffs_, law_, flux_, rate_, state.support_end);
}

bool Solver::try_update(const SolverState& state, double dt) const {
    if (settings_.backend == Backend::Reference) {
        return kernels::update_reference(state.field, flux_, coeffs_, dt, next_);
    }
    return kernels::update_parallel(state.field, flux_, coeffs_, dt, next_, state.support_end);
}

void Solver::commit(SolverState& state, double dt) const {
    const std::size_t n = grid_.n_cells();
    if (settings_.backend == Backend::Reference) {
        state.field.swap(next_);
        state.support_end = kernels::support_end(state.field, n);
    } else {
        const std::size_t hint = std::min(state.support_end + 1, n);
        state.field.swap(next_);
        // next_ now holds the previous field, zero beyond the previous support.
        state.support_end = kernels::support_end(state.field, hint);
    }
    state.dt = dt;
    state.time += dt;
    ++state.steps;
}

double Solver::stable_dt(const SolverState& state) const {
    const double worst = compute_fluxes(state);
    return std::min(settings_.cfl / (worst + 1e-300), settings_.dt_max);
}

SolverState Solver::step(SolverState state) const {
    if (!(state.dt > 0.0)) {
        throw ConfigError("step needs dt > 0");
    }
    if (next_.size() != state.field.size()) {
        throw ConfigError("state does not match the grid");
    }
    std::fill(next_.begin(), next_.end(), 0.0);
    compute_fluxes(state);
    double dt = state.dt;
    for (int k = 0; k <= settings_.max_halvings; ++k) {
        if (try_update(state, dt)) {
            commit(state, dt);
            return state;
        }
        dt *= 0.5;
    }
    throw StabilityError("negative values persist after " +
                         std::to_string(settings_.max_halvings) + " dt halvings");
}

void Solver::advance_to(SolverState& state, double t_target) const {
    if (next_.size() != state.field.size()) {
        throw ConfigError("state does not match the grid");
    }
    std::fill(next_.begin(), next_.end(), 0.0);
    while (state.time < t_target) {
        const double worst = compute_fluxes(state);
        const double remaining = t_target - state.time;
        double dt = std::min(settings_.cfl / (worst + 1e-300), settings_.dt_max);
        const bool last = dt >= remaining;
        if (last) {
            dt = remaining;
        }
        int k = 0;
        while (!try_update(state, dt)) {
            if (++k > settings_.max_halvings) {
                throw StabilityError("negative values persist after " +
                                     std::to_string(settings_.max_halvings) + " dt halvings");
            }
            dt *= 0.5;
        }
        commit(state, dt);
        if (last && k == 0) {
            state.time = t_target;
        }
    }
}

Observables Solver::observe(const SolverState& state) const {
    return observables(state.field, grid_, *density_, settings_.eps_supp,
                       state.reference_amplitude);
}

double stable_dt(const SolverState& state, const RadialGrid& grid, const DensityHandle& dens,
                 const Exponents& exps, const SolverSettings& settings) {
    const Solver solver(grid, dens, exps, settings);
    SolverState s = state;
    if (settings.backend == Backend::Parallel) {
        s.support_end = kernels::support_end(s.field, s.field.size());
    }
    return solver.stable_dt(s);
}

SolverState step(const SolverState& state, const RadialGrid& grid, const DensityHandle& dens,
                 const Exponents& exps, const SolverSettings& settings) {
    const Solver solver(grid, dens, exps, settings);
    SolverState s = state;
    s.support_end = kernels::support_end(s.field, s.field.size());
    return solver.step(std::move(s));
}

std::vector<double> bump_profile(const RadialGrid& grid, double amplitude, double radius) {
    if (!(amplitude > 0.0) || !(radius > 0.0)) {
        throw ConfigError("initial bump needs positive amplitude and radius");
    }
    std::vector<double> u(grid.n_cells(), 0.0);
    const auto centers = grid.centers();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = centers[i] / radius;
        const double b = std::max(1.0 - x * x, 0.0);
        u[i] = amplitude * b * b;
    }
    return u;
}

std::vector<RunSample> RunRecord::unflagged() const {
    const std::size_t end = std::min(first_flagged, samples.size());
    return {samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(end)};
}

std::vector<double> sample_times(double t0, double t_final) {
    if (!(t_final >= 0.0) || !(t0 > 0.0)) {
        throw ConfigError("sampling needs t_final >= 0 and t0 > 0");
    }
    std::vector<double> times{0.0};
    if (t_final == 0.0) {
        return times;
    }
    for (int k = 0;; ++k) {
        const double t = t0 * std::pow(2.0, k / 4.0);
        if (t >= t_final * (1.0 - 1e-12)) {
            break;
        }
        times.push_back(t);
    }
    times.push_back(t_final);
    return times;
}

RunResult run(const Solver& solver, const RunSpec& spec, const SampleObserver& observer) {
    RunResult result;
    result.record.config_digest = spec.config_digest;
    SolverState state =
        solver.initial_state(bump_profile(solver.grid(), spec.amplitude, spec.bump_radius));
    const auto times = sample_times(spec.t0, spec.t_final);
    for (std::size_t k = 0; k < times.size(); ++k) {
        solver.advance_to(state, times[k]);
        const Observables obs = solver.observe(state);
        if (obs.near_boundary && !state.interface_near_boundary) {
            state.interface_near_boundary = true;
            result.record.first_flagged = k;
        }
        result.record.samples.push_back(
            {state.time, obs.sup_norm, obs.weighted_mass, obs.interface_radius});
        if (observer) {
            observer(state, obs, k);
        }
    }
    result.final_state = std::move(state);
    return result;
}

} // namespace densflow
