#include "densflow/embeddings.hpp"
#include "densflow/errors.hpp"
#include "densflow/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace densflow;
using std::numbers::pi;

namespace {

GridHandle grid3(double r_max, int n) {
    return std::make_shared<const RadialGrid>(
        build_grid(std::make_shared<const ManifoldProfile>(ManifoldProfile::euclidean(3)), r_max, n));
}

RadialTestFunction hat(const GridHandle& g, double radius = 1.0) {
    return RadialTestFunction::sample(g, [radius](double r) {
        return std::max(1.0 - r / radius, 0.0);
    });
}

const Exponents pme(3, 2.0, 2.0);

} // namespace

TEST_SUITE("embeddings") {

TEST_CASE("test functions must vanish at the wall and be nonnegative") {
    const auto g = grid3(1.0, 16);
    CHECK_THROWS_AS(RadialTestFunction(g, std::vector<double>(16, 1.0)), DomainError);
    std::vector<double> v(16, 0.0);
    v[3] = -1.0;
    CHECK_THROWS_AS(RadialTestFunction(g, v), DomainError);
}

TEST_CASE("rearrangement of a radially decreasing function") {
    const auto g = grid3(2.0, 200);
    const auto f = hat(g);
    const auto u = decreasing_rearrangement(f);
    const auto edges = g->edges();
    const auto& geom = g->geometry();
    for (std::size_t i = 0; i < f.support_cells(); ++i) {
        CHECK(u(geom.volume(edges[i + 1]) * (1.0 - 1e-12)) == f.values()[i]);
    }
}

TEST_CASE("rearrangement of a plateau is an indicator") {
    const auto g = grid3(2.0, 200);
    const auto f = RadialTestFunction::sample(g, [](double r) { return r < 0.5 ? 3.0 : 0.0; });
    const double v = f.support_measure();
    CHECK(v == doctest::Approx(4.0 * pi / 3.0 * 0.125).epsilon(1e-12));
    const auto u = decreasing_rearrangement(f);
    CHECK(u(0.0) == 3.0);
    CHECK(u(0.999 * v) == 3.0);
    CHECK(u(1.001 * v) == 0.0);
}

TEST_CASE("rearrangement preserves the moments of a two-bump profile") {
    const auto g = grid3(3.0, 900);
    const auto f = RadialTestFunction::sample(g, [](double r) {
        return std::max(0.0, 0.4 - std::abs(r - 0.5)) + 2.0 * std::max(0.0, 0.3 - std::abs(r - 1.7));
    });
    const auto u = decreasing_rearrangement(f);
    // Direct quadrature over cells against the step function in measure.
    for (double q : {1.0, 2.0}) {
        double direct = 0.0;
        for (std::size_t i = 0; i < f.values().size(); ++i) {
            direct += g->cell_weights()[i] * std::pow(f.values()[i], q);
        }
        CHECK(u.moment(q) == doctest::Approx(direct).epsilon(1e-8));
        CHECK(f.moment(q) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("Hardy ratio of the hat function") {
    const auto g = grid3(2.0, 4000);
    const double r = hardy_ratio(hat(g), 2.0);
    CHECK(r == doctest::Approx(1.0).epsilon(0.01));
    CHECK(hardy_ratio(hat(g).scaled(7.0), 2.0) == doctest::Approx(r).epsilon(1e-14));
    for (double radius : {0.5, 2.0}) {
        const auto wide = grid3(2.0 * radius, 4000);
        CHECK(hardy_ratio(hat(wide, radius), 2.0) == doctest::Approx(r).epsilon(0.01));
    }
    CHECK_THROWS_AS(hardy_ratio(RadialTestFunction(g, std::vector<double>(4000, 0.0)), 2.0),
                    DegenerateInputError);
}

TEST_CASE("moment interpolation for the hat function") {
    // int u = pi/3 and int u^2 = 2 pi/15 on the unit ball.
    const auto coarse = grid3(2.0, 2000);
    const auto fine = grid3(2.0, 4000);
    CHECK(hat(fine).moment(1.0) == doctest::Approx(pi / 3.0).epsilon(1e-6));
    CHECK(hat(fine).moment(2.0) == doctest::Approx(2.0 * pi / 15.0).epsilon(1e-6));
    const double e = std::pow(pi / 3.0, 2) / (2.0 * pi / 15.0);
    CHECK(e == doctest::Approx(5.0 * pi / 6.0).epsilon(1e-14));

    const auto dens = DensityProfile::power_law(0.0);
    const EmbeddingKind kind = embedding::Moments{2.0, 1.0};
    const double a = embedding_ratio(hat(coarse), kind, pme, dens);
    const double b = embedding_ratio(hat(fine), kind, pme, dens);
    CHECK(std::isfinite(a));
    CHECK(a == doctest::Approx(b).epsilon(0.02));
    CHECK(kind_name(kind) == "EmbOld");
}

TEST_CASE("moment embeddings are homogeneous") {
    const auto g = grid3(2.0, 1000);
    const auto dens = DensityProfile::power_law(0.0);
    for (const EmbeddingKind& k : {EmbeddingKind{embedding::Moments{6.0, 1.0}},
                                   EmbeddingKind{embedding::MomentsAtP{1.0}}}) {
        const double a = embedding_ratio(hat(g), k, pme, dens);
        const double b = embedding_ratio(hat(g).scaled(13.0), k, pme, dens);
        CHECK(b == doctest::Approx(a).epsilon(1e-13));
    }
    CHECK_THROWS_AS(embedding_ratio(hat(g), embedding::Moments{7.0, 1.0}, pme, dens), DomainError);
    CHECK_THROWS_AS(embedding_ratio(hat(g), embedding::MomentsAtP{2.5}, pme, dens), DomainError);
}

TEST_CASE("Euclidean decay embedding") {
    const auto g = grid3(4.0, 2000);
    const auto steep = DensityProfile::power_law(2.8);
    for (std::size_t i = 0; i < 100; ++i) {
        const double r = embedding_ratio(random_test_function(g, 42, i), embedding::EuclideanDecay{3.0},
                                         pme, steep);
        CHECK(std::isfinite(r));
        CHECK(r > 0.0);
    }
    CHECK_THROWS_AS(embedding_ratio(hat(g), embedding::EuclideanDecay{3.0}, pme,
                                    DensityProfile::power_law(1.0)),
                    HypothesisError);
    CHECK_THROWS_AS(embedding_ratio(hat(g), embedding::EuclideanDecay{6.5}, pme, steep), DomainError);
}

TEST_CASE("profile ODE for the Euclidean isoperimetric G") {
    const auto prof = solve_profile_ode(euclidean_isoperimetric_g_inverse(3), 2.0, 1e3);
    CHECK(prof.fitted_a_exponent() == doctest::Approx(4.0).epsilon(5e-3 / 4.0));
    CHECK(prof.fitted_b_exponent() == doctest::Approx(3.0).epsilon(5e-3 / 3.0));
    CHECK(prof.derivative_sandwich_holds());
    CHECK(prof.composition_sandwich_holds());
    CHECK(prof.b_convexity_violations() == 0);
    double lo = INFINITY, hi = 0.0;
    for (double s : numerics::log_grid(1e-4, 1e2, 8)) {
        const double v = prof.s_fn(prof.b(s)) / s;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi / lo - 1.0 < 1e-3);
    // A(s) is a pure power here, so s A'/A is its exponent.
    CHECK(prof.c_ap() == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("profile ODE for another power law") {
    // G(s) = s^{4/3} (N = 4): A ~ s^{p(N-1)/(N-p)} = s^{3} for p = 2.
    ConvexFunction g{[](double s) { return std::pow(s, 4.0 / 3.0); },
                     [](double v) { return std::pow(v, 0.75); }};
    const auto prof = solve_profile_ode(g, 2.0, 1e3);
    CHECK(prof.fitted_a_exponent() == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(prof.fitted_b_exponent() == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("profile ODE refuses the trivial branch") {
    ConvexFunction fast{[](double s) { return s * s; }, {}};
    CHECK_THROWS_AS(solve_profile_ode(fast, 2.0, 1e3), BranchError);
    ConvexFunction zero{[](double) { return 0.0; }, {}};
    CHECK_THROWS_AS(solve_profile_ode(zero, 2.0, 1e3), BranchError);
}

TEST_CASE("general embedding ratios with the sharp isoperimetric G") {
    const auto g = grid3(2.0, 2000);
    const auto prof = solve_profile_ode(euclidean_isoperimetric_g_inverse(3), 2.0, 1e3);
    const auto flat = DensityProfile::power_law(0.0);
    const auto r = general_embedding_check(hat(g), prof, flat, 0.5);
    CHECK(r.energy <= 1.0);
    CHECK(r.faber_krahn <= 1.0);
    CHECK(r.weighted <= 1.0);
    const auto s = general_embedding_check(hat(g).scaled(5.0), prof, flat, 0.5);
    CHECK((s.energy <= 1.0) == (r.energy <= 1.0));
    CHECK(s.weighted == doctest::Approx(r.weighted).epsilon(1e-12));

    // Steep and wide bumps of equal mass.
    const auto steep = RadialTestFunction::sample(g, [](double x) {
        return x < 0.3 ? 1.0 : std::max(0.0, 1.0 - (x - 0.3) / 0.01);
    });
    const auto wide0 = RadialTestFunction::sample(g, [](double x) { return x < 0.9 ? 1.0 - x / 0.9 : 0.0; });
    const auto wide = wide0.scaled(steep.moment(1.0) / wide0.moment(1.0));
    const auto rs = general_embedding_check(steep, prof, flat, 0.5);
    const auto rw = general_embedding_check(wide, prof, flat, 0.5);
    CHECK(rw.faber_krahn > rs.faber_krahn);
    CHECK(rs.faber_krahn <= 1.0);
    CHECK(rw.faber_krahn <= 1.0);
}

TEST_CASE("random Hardy suite is seeded and refinement stable") {
    const auto a = random_hardy_suite(grid3(2.0, 2000), 2.0, 42, 1000);
    const auto b = random_hardy_suite(grid3(2.0, 4000), 2.0, 42, 1000);
    const auto c = random_hardy_suite(grid3(2.0, 2000), 2.0, 42, 1000);
    CHECK(a.ratios == c.ratios);
    for (double r : a.ratios) {
        CHECK(std::isfinite(r));
    }
    CHECK(std::abs(a.max_ratio / b.max_ratio - 1.0) < 0.02);
    // Hardy's constant (p/(N-p))^p bounds every ratio.
    CHECK(b.max_ratio <= 4.0);
    CHECK(unit_uniform(~0ULL) < 1.0);
    CHECK(unit_uniform(0) == 0.0);
}

}
