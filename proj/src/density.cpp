#include "densflow/density.hpp"

#include "densflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace densflow {

DensityProfile DensityProfile::power_law(double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw DomainError("power-law density needs alpha >= 0");
    }
    DensityProfile d;
    d.kind_ = DensityKind::PowerLaw;
    d.alpha_ = alpha;
    return d;
}

DensityProfile DensityProfile::tabulated(std::vector<double> radii, std::vector<double> values) {
    if (radii.size() < 3 || radii.size() != values.size()) {
        throw DomainError("tabulated density needs at least three (r, rho) rows");
    }
    if (radii.front() < 0.0) {
        throw DomainError("density radii must be nonnegative");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
            throw DomainError("density must be positive and finite");
        }
        if (i > 0 && values[i] > values[i - 1] * (1.0 + 1e-12)) {
            throw DomainError("density must be nonincreasing (increase at r = " +
                              std::to_string(radii[i]) + ")");
        }
    }
    // Negative slope of log rho against log(1 + r) over the last decade.
    const double r_last = radii.back();
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] >= 0.1 * r_last) {
            lx.push_back(std::log1p(radii[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    DensityProfile d;
    d.kind_ = DensityKind::Tabulated;
    d.alpha_ = lx.size() >= 2 ? std::max(0.0, -numerics::fit_line(lx, ly).slope) : 0.0;
    d.table_ = numerics::MonotoneCubic(std::move(radii), std::move(values));
    return d;
}

DensityProfile DensityProfile::from_csv(const std::string& path) {
    auto [r, rho] = numerics::read_two_column_csv(path, "r,rho");
    return tabulated(std::move(r), std::move(rho));
}

double DensityProfile::rho(double r) const {
    if (r < 0.0) {
        throw DomainError("radius must be nonnegative");
    }
    if (kind_ == DensityKind::PowerLaw) {
        return std::pow(1.0 + r, -alpha_);
    }
    if (r <= table_.x_front()) {
        return table_.ys().front();
    }
    if (r >= table_.x_back()) {
        const double r_last = table_.x_back();
        return table_.ys().back() * std::pow((1.0 + r) / (1.0 + r_last), -alpha_);
    }
    return table_(r);
}

double DensityProfile::psi(double p, double s) const {
    if (s < 0.0) {
        throw DomainError("radius must be nonnegative");
    }
    if (s == 0.0) {
        return 0.0;
    }
    return std::pow(s, p) * rho(s);
}

double quasi_monotone_constant(const DensityProfile& dens, double power,
                               const std::vector<double>& grid) {
    double running_max = 0.0;
    double worst = 1.0;
    for (double s : grid) {
        const double v = dens.psi(power, s);
        running_max = std::max(running_max, v);
        worst = std::max(worst, running_max / v);
    }
    return worst;
}

AssumptionReport verify_density_assumptions(const DensityProfile& dens,
                                            const ManifoldProfile& geom, const Exponents& exps,
                                            double r_max, const DensityCaps& caps) {
    if (!(r_max > 0.0)) {
        throw DomainError("R_max must be positive");
    }
    if (r_max > geom.max_radius()) {
        throw RangeError("geometry undefined on [0, R_max]");
    }
    const double r_lo = r_max * std::pow(10.0, -caps.decades);
    const auto grid = numerics::log_grid(r_lo, r_max, caps.per_decade);

    auto reverse = open_check("reverse_doubling", 1.0, caps.reverse_doubling);
    auto divergent = open_check("divergent_mass", 0.0, caps.divergent);
    auto psi_mono = open_check("psi_quasi_monotone", 1.0, caps.psi_quasi_monotone);
    auto subcr = open_check("subcritical_alpha", 0.0, exps.p());

    double mass = numerics::adaptive_simpson(
        [&](double r) { return dens.rho(r) * geom.area(r); }, 0.0, r_lo, 1e-11);
    double prev = r_lo;
    for (double r : grid) {
        if (2.0 * r <= r_max * (1.0 + 1e-12)) {
            reverse.constant = std::max(reverse.constant, dens.rho(r) / dens.rho(2.0 * r));
        }
        if (r > prev) {
            mass += numerics::adaptive_simpson(
                [&](double s) {
                    const double rr = std::exp(s);
                    return dens.rho(rr) * geom.area(rr) * rr;
                },
                std::log(prev), std::log(r), 1e-11);
        }
        divergent.constant = std::max(divergent.constant, mass / (geom.volume(r) * dens.rho(r)));
        prev = r;
    }
    psi_mono.constant = quasi_monotone_constant(dens, exps.p(), grid);

    // rho(cs) <= C c^{-a} rho(s) for all c < 1 is quasi-monotonicity of s^a rho(s);
    // the admissible set of a is an upper ray, find its left end.
    double lo = 0.0;
    double hi = static_cast<double>(exps.n_dim());
    if (quasi_monotone_constant(dens, hi, grid) > caps.psi_quasi_monotone) {
        subcr.constant = std::numeric_limits<double>::infinity();
        subcr.note = "no decay exponent up to N satisfies the condition";
    } else if (quasi_monotone_constant(dens, lo, grid) <= caps.psi_quasi_monotone) {
        subcr.constant = 0.0;
    } else {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (quasi_monotone_constant(dens, mid, grid) <= caps.psi_quasi_monotone) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        subcr.constant = hi;
    }
    subcr.note += subcr.note.empty() ? "" : "; ";
    subcr.note += "smallest a with rho decaying no faster than s^-a; passes when a < p";

    for (auto* c : {&reverse, &divergent, &psi_mono, &subcr}) {
        c->range_lo = r_lo;
        c->range_hi = r_max;
    }
    reverse.range_hi = 0.5 * r_max;
    reverse.pass = reverse.constant <= reverse.cap;
    divergent.pass = divergent.constant <= divergent.cap;
    psi_mono.pass = psi_mono.constant <= psi_mono.cap;
    subcr.pass = subcr.constant < exps.p();
    return AssumptionReport{{reverse, divergent, psi_mono, subcr}};
}

} // namespace densflow
