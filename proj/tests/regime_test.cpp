#include "densflow/errors.hpp"
#include "densflow/regime.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace densflow;
using std::numbers::pi;

namespace {

const ManifoldProfile& r3() {
    static const auto g = ManifoldProfile::euclidean(3);
    return g;
}

const Exponents pme(3, 2.0, 2.0);

} // namespace

TEST_SUITE("regime") {

TEST_CASE("critical decay exponent") {
    CHECK(alpha_star(pme) == 2.5);
    CHECK(alpha_star(Exponents(2, 1.5, 2.0)) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    std::mt19937_64 gen(11);
    std::uniform_int_distribution<int> dim(2, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
        const int n = dim(gen);
        const double p = 1.0 + (n - 1.0) * (0.01 + 0.98 * unit(gen));
        const double m = 3.0 - p + 0.01 + 3.0 * unit(gen);
        const Exponents e(n, p, m);
        CHECK(alpha_star(e) > p);
        CHECK(alpha_star(e) < n);
        CHECK(alpha_star_theta(e, 0.5) > alpha_star(e));
    }
}

TEST_CASE("propagation function") {
    const auto flat = DensityProfile::power_law(0.0);
    CHECK(propagation_value(r3(), flat, pme, 1.0) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
    CHECK(propagation_value(r3(), flat, pme, 1e-8) < 1e-38);
    CHECK(propagation_value(r3(), flat, pme, 0.0) == 0.0);
    const auto one = DensityProfile::power_law(1.0);
    CHECK(propagation_value(r3(), one, pme, 10.0) > propagation_value(r3(), one, pme, 5.0));
}

TEST_CASE("z0 inverts the fifth power") {
    const auto flat = DensityProfile::power_law(0.0);
    const double k = 4.0 * pi / 3.0;
    CHECK(z0(r3(), flat, pme, k, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z0(r3(), flat, pme, 32.0 * k, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(z0(r3(), flat, pme, 7.0, 3.0) / z0(r3(), flat, pme, 7.0, 1.0) ==
          doctest::Approx(std::pow(3.0, 0.2)).epsilon(1e-12));
}

TEST_CASE("z0 grows like the cube root of t M for rho = (1+r)^-1") {
    // F(R) = (4 pi/3) R^5 (1+R)^-2; far out the ratio is 2^{1/3} up to O(1/R).
    const auto one = DensityProfile::power_law(1.0);
    const double t = 1e30;
    const double a = z0(r3(), one, pme, t, 1.0);
    const double b = z0(r3(), one, pme, 2.0 * t, 1.0);
    CHECK(a > 1e9);
    CHECK(std::abs(b / a / std::cbrt(2.0) - 1.0) < 1e-8);
    CHECK(z0(r3(), one, pme, t, 2.0) == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("z0 refuses a decreasing propagation function") {
    const auto steep = DensityProfile::power_law(2.8);
    CHECK_THROWS_AS(z0(r3(), steep, pme, 1e6, 1.0), RegimeError);
    CHECK_THROWS_AS(z0(r3(), DensityProfile::power_law(0.0), pme, -1.0, 1.0), DomainError);
}

TEST_CASE("closed-form rates") {
    const auto a0 = predicted_exponents(pme, 0.0);
    CHECK(*a0.sup_decay_exp == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(*a0.interface_exp == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(a0.universal_exp == 1.0);
    CHECK_FALSE(a0.regime.has_value());
    const auto a1 = predicted_exponents(pme, 1.0);
    CHECK(*a1.sup_decay_exp == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(*a1.interface_exp == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const auto a28 = predicted_exponents(pme, 2.8);
    CHECK_FALSE(a28.sup_decay_exp.has_value());
    CHECK_FALSE(a28.interface_exp.has_value());
    CHECK(a28.universal_exp == 1.0);
    CHECK_THROWS_AS(predicted_exponents(pme, 3.5), DomainError);
}

TEST_CASE("classification of power-law densities") {
    const auto sub = classify_regime(r3(), DensityProfile::power_law(1.0), pme);
    CHECK(sub.regime == Regime::Subcritical);
    CHECK(sub.alpha_star == 2.5);
    CHECK(*sub.sup_decay_exp == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    for (double a : {2.2, 2.4}) {
        const auto r = classify_regime(r3(), DensityProfile::power_law(a), pme);
        CHECK(r.regime == Regime::SupercriticalDecay);
        CHECK(r.universal_exp == 1.0);
        CHECK_FALSE(r.sup_decay_exp.has_value());
    }

    const auto ibu = classify_regime(r3(), DensityProfile::power_law(2.8), pme);
    CHECK(ibu.regime == Regime::InterfaceBlowUp);
    REQUIRE(ibu.theta_used.has_value());
    CHECK(*ibu.theta_used > 0.0);
    CHECK(2.8 > alpha_star_theta(pme, *ibu.theta_used));
    CHECK(to_string(*ibu.regime) == std::string("InterfaceBlowUp"));

    // Close to the threshold a small theta is needed.
    const auto near = classify_regime(r3(), DensityProfile::power_law(2.6), pme);
    CHECK(near.regime == Regime::InterfaceBlowUp);
    CHECK(*near.theta_used <= 0.5);
    CHECK(2.6 > alpha_star_theta(pme, *near.theta_used));

    CHECK(classify_regime(r3(), DensityProfile::power_law(2.5), pme).regime == Regime::Boundary);
}

TEST_CASE("classification reads the tail of tabulated densities") {
    std::vector<double> r, rho;
    for (int i = 0; i <= 200; ++i) {
        const double x = std::pow(10.0, -2.0 + 8.0 * i / 200.0);
        r.push_back(x);
        rho.push_back(1.0 / (1.0 + x));
    }
    const auto tab = DensityProfile::tabulated(r, rho);
    const auto rep = classify_regime(r3(), tab, pme);
    CHECK(rep.regime == Regime::Subcritical);
    CHECK(*rep.alpha_tail == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("non-asymptotic tabulated tail is inconclusive") {
    // A plateau across the fitted tail followed by a cliff.
    std::vector<double> r, rho;
    for (int i = 0; i <= 160; ++i) {
        const double x = std::pow(10.0, -2.0 + 8.0 * i / 160.0);
        r.push_back(x);
        const double base = 1.0 / (1.0 + std::min(x, 1e4));
        rho.push_back(x < 3e5 ? base : base * std::pow(3e5 / x, 12.0));
    }
    const auto tab = DensityProfile::tabulated(r, rho);
    CHECK_THROWS_AS(classify_regime(r3(), tab, pme), InconclusiveError);
}

TEST_CASE("subcritical sup bound") {
    const auto flat = DensityProfile::power_law(0.0);
    CHECK(sub_sup_bound(flat, pme, 2.0, 4.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(sub_sup_bound(flat, pme, 0.0, 1.0), DomainError);
}

}
