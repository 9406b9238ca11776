#include "densflow/errors.hpp"
#include "densflow/exponents.hpp"
#include "densflow/geometry.hpp"
#include "densflow/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace densflow;
using std::numbers::pi;

namespace {

ManifoldProfile sampled_r2(double r_max, int n) {
    std::vector<double> r, s;
    for (int i = 0; i <= n; ++i) {
        const double x = r_max * i / n;
        r.push_back(x);
        s.push_back(4.0 * pi * x * x);
    }
    return ManifoldProfile::tabulated(3, r, s);
}

} // namespace

TEST_SUITE("geometry") {

TEST_CASE("exponent triple gates the degenerate range") {
    CHECK_THROWS_WITH_AS(Exponents(3, 1.0, 2.0), doctest::Contains("requires N>p>1"), ConfigError);
    CHECK_THROWS_WITH_AS(Exponents(2, 2.0, 2.0), doctest::Contains("requires N>p>1"), ConfigError);
    CHECK_THROWS_WITH_AS(Exponents(3, 2.0, 1.0), doctest::Contains("requires p+m>3"), ConfigError);
    const Exponents e(3, 2.5, 1.25);
    CHECK(e.beta() == 3 * (2.5 + 1.25 - 3.0) + 2.5);
    CHECK(e.degeneracy() == doctest::Approx(0.75));
}

TEST_CASE("euclidean volume and its inverse") {
    const auto g3 = ManifoldProfile::euclidean(3);
    CHECK(g3.volume(1.0) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
    CHECK(g3.volume(0.0) == 0.0);
    CHECK(g3.inverse_volume(4.0 * pi / 3.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g3.inverse_volume(0.0) == 0.0);
    const auto g2 = ManifoldProfile::euclidean(2);
    CHECK(g2.inverse_volume(4.0 * pi) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS(g3.volume(-1.0), DomainError);
}

TEST_CASE("tabulated area integrates to the ball volume") {
    const auto tab = sampled_r2(4.0, 64);
    CHECK(std::abs(tab.volume(2.0) / (32.0 * pi / 3.0) - 1.0) < 1e-10);
    // Independent check: V(R) against quadrature of the interpolated area.
    const double q = numerics::adaptive_simpson([&](double r) { return tab.area(r); }, 0.0, 3.3,
                                                1e-13);
    CHECK(tab.volume(3.3) == doctest::Approx(q).epsilon(1e-10));
    CHECK_THROWS_AS(tab.inverse_volume(tab.volume(4.0) * 1.01), RangeError);
    CHECK_THROWS_AS(tab.volume(5.0), RangeError);
}

TEST_CASE("euclidean omega is constant") {
    const auto g3 = ManifoldProfile::euclidean(3);
    const double expected = 1.0 / (3.0 * std::cbrt(4.0 * pi / 3.0));
    CHECK(expected == doctest::Approx(0.20678).epsilon(1e-4));
    CHECK(g3.omega(1.0) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(g3.omega(100.0) == doctest::Approx(expected).epsilon(1e-13));
    CHECK_THROWS_AS(g3.omega(0.0), DomainError);
}

TEST_CASE("omega doubling bound for a tabulated profile") {
    // sigma(r) = 4 pi r^2 (1 + r): volume grows faster than Euclidean.
    std::vector<double> r, s;
    for (int i = 0; i <= 400; ++i) {
        const double x = 20.0 * i / 400;
        r.push_back(x);
        s.push_back(4.0 * pi * x * x * (1.0 + x));
    }
    const auto tab = ManifoldProfile::tabulated(3, r, s);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-3.0, std::log10(tab.volume(20.0) / 8.0));
    const double gamma = 8.0;
    for (int k = 0; k < 200; ++k) {
        const double v = std::pow(10.0, u(gen));
        CHECK(tab.omega(gamma * v) <= std::pow(gamma, 2.0 / 3.0) * tab.omega(v) * (1 + 1e-9));
    }
}

TEST_CASE("explicit isoperimetric function v^{(N-1)/N} gives omega = 1") {
    const auto base = sampled_r2(3.0, 30);
    std::vector<double> r, s;
    for (int i = 0; i <= 30; ++i) {
        r.push_back(0.1 * i);
        s.push_back(base.area(0.1 * i));
    }
    const auto tab = ManifoldProfile::tabulated(3, r, s, [](double v) {
        return std::pow(v, 2.0 / 3.0);
    });
    for (double v : {0.01, 0.5, 3.0, 50.0}) {
        CHECK(tab.omega(v) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("euclidean assumption constants") {
    const Exponents e(3, 2.0, 2.0);
    const auto rep = verify_geometry_assumptions(ManifoldProfile::euclidean(3), e, 100.0);
    CHECK(rep.at("doubling").constant == doctest::Approx(8.0).epsilon(1e-9));
    CHECK(rep.at("iso_volume").constant == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(rep.at("hardy_volume").constant == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(rep.at("omega_nondecreasing").pass);
    CHECK(rep.all_pass());
}

TEST_CASE("tabulated geometry cannot be audited beyond its range") {
    const auto tab = sampled_r2(4.0, 64);
    CHECK_THROWS_AS(verify_geometry_assumptions(tab, Exponents(3, 2.0, 2.0), 10.0), RangeError);
}

}
