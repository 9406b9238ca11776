#include "densflow/errors.hpp"
#include "densflow/grid.hpp"
#include "densflow/kernels.hpp"
#include "densflow/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

using namespace densflow;
using std::numbers::pi;

namespace {

ManifoldHandle euclid(int n) {
    return std::make_shared<const ManifoldProfile>(ManifoldProfile::euclidean(n));
}

DensityHandle power(double alpha) {
    return std::make_shared<const DensityProfile>(DensityProfile::power_law(alpha));
}

SolverSettings settings_for(Backend b, double eps_reg = 0.0) {
    SolverSettings s;
    s.backend = b;
    s.eps_reg = eps_reg;
    return s;
}

} // namespace

TEST_SUITE("solver") {

TEST_CASE("two-cell shell volumes") {
    const auto g = build_grid(euclid(3), 1.0, 2);
    const auto w = g.cell_weights();
    CHECK(w[0] == doctest::Approx(4.0 * pi / 3.0 / 8.0).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(4.0 * pi / 3.0 * 7.0 / 8.0).epsilon(1e-15));
    CHECK(g.face_areas()[1] == doctest::Approx(pi).epsilon(1e-15));
    CHECK_THROWS_AS(build_grid(euclid(3), 1.0, 1), ConfigError);
}

TEST_CASE("cell weights telescope to the ball volume") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> radius(0.5, 200.0);
    std::uniform_int_distribution<int> cells(16, 3000);
    std::uniform_int_distribution<int> dim(2, 5);
    for (int k = 0; k < 40; ++k) {
        const auto geom = euclid(dim(gen));
        GridSpec spec;
        spec.r_max = radius(gen);
        spec.n_cells = cells(gen);
        if (k % 2 == 1) {
            spec.layout = GridLayout::Stretched;
            spec.core_radius = 0.1 * spec.r_max;
            spec.core_cells = spec.n_cells / 4;
        }
        const RadialGrid g(geom, spec);
        double total = 0.0;
        for (double w : g.cell_weights()) {
            CHECK(w > 0.0);
            total += w;
        }
        CHECK(total == doctest::Approx(geom->volume(spec.r_max)).epsilon(1e-12));
        CHECK(g.edges().back() == doctest::Approx(spec.r_max).epsilon(1e-14));
    }
}

TEST_CASE("face flux by hand") {
    CHECK(numerical_flux(1.0, 0.0, 0.5, Exponents(4, 3.0, 2.0), 0.0) == doctest::Approx(-2.0));
    CHECK(numerical_flux(0.7, 0.7, 0.1, Exponents(3, 2.0, 2.0), 0.0) == 0.0);
    CHECK(numerical_flux(0.0, 0.0, 0.1, Exponents(4, 3.0, 2.5), 0.0) == 0.0);
    CHECK(numerical_flux(0.0, 0.0, 0.1, Exponents(3, 1.5, 2.0), 1e-3) == 0.0);
}

TEST_CASE("stable step of the zero field is the cap") {
    const auto g = build_grid(euclid(3), 1.0, 64);
    SolverSettings s;
    s.dt_max = 0.25;
    SolverState state;
    state.field.assign(64, 0.0);
    CHECK(stable_dt(state, g, power(0.0), Exponents(3, 2.0, 2.0), s) == 0.25);
}

TEST_CASE("stable step scales with resolution and amplitude") {
    const Exponents e(3, 2.0, 2.0);
    const auto dens = power(0.0);
    SolverSettings s;
    const auto coarse = build_grid(euclid(3), 2.0, 100);
    const auto fine = build_grid(euclid(3), 2.0, 200);
    SolverState a, b;
    a.field.assign(100, 1.0);
    b.field.assign(200, 1.0);
    CHECK(stable_dt(b, fine, dens, e, s) / stable_dt(a, coarse, dens, e, s) ==
          doctest::Approx(0.25).epsilon(1e-12));

    SolverState c = a;
    for (double& v : c.field) {
        v *= 2.0;
    }
    CHECK(stable_dt(c, coarse, dens, e, s) / stable_dt(a, coarse, dens, e, s) ==
          doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("a constant field is a steady state") {
    const auto g = build_grid(euclid(3), 3.0, 50);
    const Solver solver(g, power(1.0), Exponents(3, 2.0, 2.0), settings_for(Backend::Parallel));
    auto state = solver.initial_state(std::vector<double>(50, 0.3));
    state.dt = 0.01;
    const auto next = solver.step(state);
    CHECK(next.field == state.field);
    CHECK(next.time == doctest::Approx(0.01));
}

TEST_CASE("one step conserves weighted mass") {
    struct Case {
        int n;
        double p, m, alpha, eps;
    };
    for (const Case c : {Case{3, 2.0, 2.0, 0.0, 0.0}, Case{3, 2.0, 2.0, 1.5, 0.0},
                         Case{4, 3.0, 1.5, 1.0, 0.0}, Case{3, 1.5, 2.0, 0.5, 1e-3},
                         Case{2, 1.8, 1.7, 0.0, 1e-4}}) {
        const auto g = build_grid(euclid(c.n), 2.0, 40);
        const auto dens = power(c.alpha);
        const Solver solver(g, dens, Exponents(c.n, c.p, c.m), settings_for(Backend::Reference, c.eps));
        std::vector<double> u(40, 0.0);
        u[0] = 1.0;
        auto state = solver.initial_state(u);
        state.dt = solver.stable_dt(state);
        const double before = solver.observe(state).weighted_mass;
        const auto next = solver.step(state);
        CHECK(std::abs(solver.observe(next).weighted_mass / before - 1.0) < 1e-14);
    }
}

TEST_CASE("porous-medium step matches an independent eight-cell update") {
    const int n = 8;
    const double r_max = 1.0;
    const double dr = r_max / n;
    const auto g = build_grid(euclid(3), r_max, n);
    const Solver solver(g, power(0.0), Exponents(3, 2.0, 2.0), settings_for(Backend::Reference));
    const std::vector<double> u{1.0, 0.9, 0.75, 0.5, 0.3, 0.1, 0.0, 0.0};
    auto state = solver.initial_state(u);
    state.dt = 1e-3;
    const auto next = solver.step(state);

    // u_t = r^-2 (r^2 u u_r)_r in flux form on shells [i dr, (i+1) dr].
    for (int i = 0; i < n; ++i) {
        const double lo = i * dr;
        const double hi = (i + 1) * dr;
        const double vol = 4.0 * pi / 3.0 * (hi * hi * hi - lo * lo * lo);
        double in = 0.0;
        if (i + 1 < n) {
            in += 4.0 * pi * hi * hi * 0.5 * (u[i] + u[i + 1]) * (u[i + 1] - u[i]) / dr;
        }
        if (i > 0) {
            in -= 4.0 * pi * lo * lo * 0.5 * (u[i] + u[i - 1]) * (u[i] - u[i - 1]) / dr;
        }
        const double expect = u[i] + 1e-3 * in / vol;
        CHECK(next.field[i] == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("parallel and reference kernels agree bitwise") {
    struct Case {
        int n;
        double p, m, alpha, eps;
        GridLayout layout;
    };
    for (const Case c : {Case{3, 2.0, 2.0, 1.0, 0.0, GridLayout::Uniform},
                         Case{3, 2.5, 1.5, 2.4, 0.0, GridLayout::Stretched},
                         Case{3, 1.6, 2.0, 0.0, 1e-6, GridLayout::Uniform}}) {
        GridSpec spec;
        spec.r_max = 50.0;
        spec.n_cells = 3000;
        spec.layout = c.layout;
        if (c.layout == GridLayout::Stretched) {
            spec.core_radius = 2.0;
            spec.core_cells = 200;
        }
        const RadialGrid g(euclid(c.n), spec);
        const Exponents e(c.n, c.p, c.m);
        const auto dens = power(c.alpha);
        const Solver ref(g, dens, e, settings_for(Backend::Reference, c.eps));
        const Solver par(g, dens, e, settings_for(Backend::Parallel, c.eps));
        const auto u0 = bump_profile(g, 1.0, 1.0);
        auto a = ref.initial_state(u0);
        auto b = par.initial_state(u0);
        ref.advance_to(a, 0.5);
        par.advance_to(b, 0.5);
        CHECK(a.steps == b.steps);
        CHECK(a.time == b.time);
        CHECK(a.field == b.field);

        // Kernels directly, on the final field.
        const auto coeffs = kernels::make_coefficients(g, *dens);
        const FluxLaw law(e, c.eps);
        std::vector<double> f1(g.n_cells() + 1), f2(g.n_cells() + 1), r1(f1.size()), r2(f1.size());
        const double w1 = kernels::fluxes_reference(a.field, coeffs, law, f1, r1);
        const double w2 = kernels::fluxes_parallel(a.field, coeffs, law, f2, r2,
                                                   kernels::support_end(a.field, a.field.size()));
        CHECK(w1 == w2);
        CHECK(f1 == f2);
    }
}

TEST_CASE("negative updates are halved away or reported") {
    const auto g = build_grid(euclid(3), 1.0, 32);
    SolverSettings s;
    s.max_halvings = 0;
    const Solver solver(g, power(0.0), Exponents(3, 2.0, 2.0), s);
    std::vector<double> u(32, 0.0);
    u[0] = 1.0;
    auto state = solver.initial_state(u);
    state.dt = 1e3 * solver.stable_dt(state);
    CHECK_THROWS_AS(solver.step(state), StabilityError);

    SolverSettings patient;
    const Solver halving(g, power(0.0), Exponents(3, 2.0, 2.0), patient);
    const auto next = halving.step(state);
    CHECK(next.dt < state.dt);
    for (double v : next.field) {
        CHECK(v >= 0.0);
    }
}

TEST_CASE("observables") {
    const auto g = std::make_shared<RadialGrid>(build_grid(euclid(3), 2.0, 4000));
    const auto dens = power(0.0);
    const std::vector<double> zero(4000, 0.0);
    const auto o = observables(zero, *g, *dens, 1e-6, 1.0);
    CHECK(o.sup_norm == 0.0);
    CHECK(o.weighted_mass == 0.0);
    CHECK(o.interface_radius == 0.0);

    const auto bump = bump_profile(*g, 1.0, 1.0);
    const auto ob = observables(bump, *g, *dens, 1e-6, 1.0);
    CHECK(ob.weighted_mass == doctest::Approx(32.0 * pi / 105.0).epsilon(1e-6));

    std::vector<double> step(4000, 0.0);
    for (std::size_t i = 0; i < step.size(); ++i) {
        if (g->centers()[i] < 0.5) {
            step[i] = 1.0;
        }
    }
    const auto os = observables(step, *g, *dens, 1e-6, 1.0);
    CHECK(std::abs(os.interface_radius - 0.5) <= g->dr());
}

TEST_CASE("a zero-length run records the initial state only") {
    const auto g = build_grid(euclid(3), 10.0, 1000);
    const Solver solver(g, power(0.0), Exponents(3, 2.0, 2.0), SolverSettings{});
    RunSpec spec;
    spec.t_final = 0.0;
    const auto res = run(solver, spec);
    REQUIRE(res.record.samples.size() == 1);
    CHECK(res.record.samples[0].sup == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(res.record.samples[0].interface - 1.0) <= g.dr());
}

TEST_CASE("constant-density run: sup nonincreasing, mass conserved, scaling covariant") {
    const auto g = build_grid(euclid(3), 6.0, 600);
    const Solver solver(g, power(0.0), Exponents(3, 2.0, 2.0), SolverSettings{});
    RunSpec spec;
    spec.t_final = 20.0;
    const auto res = run(solver, spec);
    const auto& s = res.record.samples;
    REQUIRE(s.size() > 20);
    for (std::size_t k = 1; k < s.size(); ++k) {
        CHECK(s[k].sup <= s[k - 1].sup);
        CHECK(s[k].mass == doctest::Approx(s[0].mass).epsilon(1e-12));
    }

    RunSpec scaled = spec;
    scaled.amplitude = 2.0;
    scaled.t_final = spec.t_final / 2.0;
    scaled.t0 = spec.t0 / 2.0;
    const auto other = run(solver, scaled);
    REQUIRE(other.record.samples.size() == s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(other.record.samples[k].t == doctest::Approx(s[k].t / 2.0).epsilon(1e-14));
        CHECK(other.record.samples[k].sup == doctest::Approx(2.0 * s[k].sup).epsilon(0.01));
    }
}

TEST_CASE("sample times follow quarter-octaves") {
    const auto t = sample_times(1e-3, 1.0);
    CHECK(t.front() == 0.0);
    CHECK(t.back() == 1.0);
    CHECK(t[2] / t[1] == doctest::Approx(std::pow(2.0, 0.25)));
    CHECK(sample_times(1e-3, 0.0).size() == 1);
}

}
