#include "densflow/regime.hpp"

#include "densflow/errors.hpp"
#include "densflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace densflow {

const char* to_string(Regime r) {
    switch (r) {
    case Regime::Subcritical: return "Subcritical";
    case Regime::SupercriticalDecay: return "SupercriticalDecay";
    case Regime::InterfaceBlowUp: return "InterfaceBlowUp";
    case Regime::Boundary: return "Boundary";
    }
    return "Unknown";
}

double alpha_star(const Exponents& exps) {
    return alpha_star_theta(exps, 0.0);
}

double alpha_star_theta(const Exponents& exps, double theta) {
    const double q = exps.degeneracy() + theta;
    return (exps.n_dim() * q + exps.p()) / (q + 1.0);
}

double propagation_value(const ManifoldProfile& geom, const DensityProfile& dens,
                         const Exponents& exps, double r) {
    if (!(r >= 0.0)) {
        throw DomainError("propagation function needs R >= 0");
    }
    if (r == 0.0) {
        return 0.0;
    }
    const double d = exps.degeneracy();
    return std::pow(r, exps.p()) * std::pow(dens.rho(r), d + 1.0) *
           std::pow(geom.volume(r), d);
}

double z0(const ManifoldProfile& geom, const DensityProfile& dens, const Exponents& exps,
          double t, double mass, double gamma) {
    if (!(t > 0.0) || !(mass > 0.0) || !(gamma > 0.0)) {
        throw DomainError("z0 needs t, mass and gamma > 0");
    }
    const double target = gamma * t * std::pow(mass, exps.degeneracy());
    const double ceiling = std::isfinite(geom.max_radius()) ? geom.max_radius() : 1e15;
    auto f = [&](double r) { return propagation_value(geom, dens, exps, r); };

    double lo = std::min(1.0, ceiling);
    while (f(lo) >= target) {
        lo *= 0.5;
        if (lo < 1e-300) {
            throw RangeError("z0: propagation function does not vanish at the centre");
        }
    }
    double hi = lo;
    double f_hi = f(hi);
    while (f_hi < target) {
        if (hi >= ceiling) {
            throw RangeError("z0: root lies beyond the geometry range");
        }
        hi = std::min(2.0 * hi, ceiling);
        const double next = f(hi);
        if (next < f_hi) {
            std::ostringstream msg;
            msg << "z0: propagation function decreases before reaching the target, near R = "
                << hi;
            throw RegimeError(msg.str());
        }
        f_hi = next;
    }

    // The corollary needs F increasing; audit it on the bracket.
    double prev = f(lo);
    for (double r : numerics::log_grid(lo, hi, 64)) {
        const double v = f(r);
        if (v < prev) {
            std::ostringstream msg;
            msg << "z0: propagation function decreases near R = " << r;
            throw RegimeError(msg.str());
        }
        prev = v;
    }

    for (int it = 0; it < 400 && hi / lo - 1.0 > 1e-14; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (f(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return std::sqrt(lo * hi);
}

PropagationCurve propagation_curve(const ManifoldProfile& geom, const DensityProfile& dens,
                                   const Exponents& exps, const std::vector<double>& times,
                                   double mass, double gamma) {
    PropagationCurve curve;
    curve.gamma_used = gamma;
    curve.times = times;
    curve.radii.reserve(times.size());
    for (double t : times) {
        curve.radii.push_back(z0(geom, dens, exps, t, mass, gamma));
    }
    return curve;
}

RegimeReport predicted_exponents(const Exponents& exps, double alpha) {
    const int n = exps.n_dim();
    if (!(alpha >= 0.0) || alpha > n) {
        throw DomainError("predicted exponents need 0 <= alpha <= N");
    }
    RegimeReport rep;
    rep.alpha_star = alpha_star(exps);
    rep.universal_exp = 1.0 / exps.degeneracy();
    rep.alpha_tail = alpha;
    if (alpha < rep.alpha_star) {
        const double denom = (n - alpha) * exps.degeneracy() + exps.p() - alpha;
        rep.sup_decay_exp = (n - alpha) / denom;
        rep.interface_exp = 1.0 / denom;
    } else {
        rep.notes = "subcritical rates not applicable for alpha >= alpha_star";
    }
    return rep;
}

double sub_sup_bound(const DensityProfile& dens, const Exponents& exps, double z, double t) {
    if (!(z > 0.0) || !(t > 0.0)) {
        throw DomainError("sup bound needs Z > 0 and t > 0");
    }
    return std::pow(std::pow(z, exps.p()) * dens.rho(z) / t, 1.0 / exps.degeneracy());
}

namespace {

class TailProbe {
public:
    TailProbe(const ManifoldProfile& geom, const ClassifyOptions& opts) : opts_(opts) {
        hi_ = std::isfinite(geom.max_radius()) ? std::min(opts.r_max, geom.max_radius())
                                               : opts.r_max;
        if (!(hi_ > 0.0)) {
            throw RangeError("classification range is empty");
        }
        grid_ = numerics::log_grid(hi_ * std::pow(10.0, -opts.decades), hi_, opts.per_decade);
        const double tail_lo = hi_ * std::pow(10.0, -opts.tail_decades);
        tail_ = numerics::log_grid(tail_lo, hi_, opts.per_decade);
    }

    const std::vector<double>& grid() const { return grid_; }

    /// Log-log slope of a positive function over the tail.
    template <class F>
    double slope(F&& f, const char* what) const {
        std::vector<double> x;
        std::vector<double> y;
        x.reserve(tail_.size());
        y.reserve(tail_.size());
        for (double r : tail_) {
            const double v = f(r);
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw InconclusiveError(std::string("tail of ") + what +
                                        " is not positive and finite");
            }
            x.push_back(std::log(r));
            y.push_back(std::log(v));
        }
        const auto fit = numerics::fit_line(x, y);
        // A flat tail has no variance to explain; judge it by its residual.
        if (fit.r_squared < opts_.min_r_squared && fit.rms_residual > opts_.flat_residual) {
            std::ostringstream msg;
            msg << "tail of " << what << " is not a power law (r^2 = " << fit.r_squared << ")";
            throw InconclusiveError(msg.str());
        }
        return fit.slope;
    }

private:
    const ClassifyOptions& opts_;
    double hi_ = 0.0;
    std::vector<double> grid_;
    std::vector<double> tail_;
};

} // namespace

RegimeReport classify_regime(const ManifoldProfile& geom, const DensityProfile& dens,
                             const Exponents& exps, const ClassifyOptions& opts) {
    const TailProbe probe(geom, opts);
    const double p = exps.p();
    const double d = exps.degeneracy();
    const double margin = opts.margin;

    const double alpha_tail = dens.kind() == DensityKind::PowerLaw
                                  ? dens.alpha()
                                  : -probe.slope([&](double r) { return dens.rho(r); }, "rho");
    RegimeReport rep = predicted_exponents(exps, std::clamp(alpha_tail, 0.0, 1.0 * exps.n_dim()));
    rep.alpha_tail = alpha_tail;
    rep.notes.clear();
    // The sup rate needs the subcritical hypotheses; the interface rate only
    // needs an increasing propagation function.
    const auto sup_rate = rep.sup_decay_exp;
    rep.sup_decay_exp.reset();

    const double psi_slope = probe.slope([&](double s) { return dens.psi(p, s); }, "psi");
    const double psi_constant = quasi_monotone_constant(dens, p, probe.grid());
    bool propagation_increasing = true;
    {
        double prev = 0.0;
        for (double r : probe.grid()) {
            const double v = propagation_value(geom, dens, exps, r);
            if (v <= prev) {
                propagation_increasing = false;
                break;
            }
            prev = v;
        }
    }
    if (psi_constant <= opts.psi_cap && psi_slope >= -margin && propagation_increasing) {
        rep.regime = Regime::Subcritical;
        rep.sup_decay_exp = sup_rate;
        return rep;
    }

    // Interface blow-up: the two integrals of the theorem, radially.
    const bool psi_bounded = psi_slope <= margin;
    for (int k = 0; k < opts.theta_levels; ++k) {
        const double theta = std::ldexp(1.0, -k);
        const double q = d + theta;
        const double slope_m = probe.slope(
            [&](double r) {
                return std::pow(r, p / q) * std::pow(dens.rho(r), (q + 1.0) / q) * geom.area(r);
            },
            "first blow-up integrand");
        if (slope_m >= -1.0 - margin) {
            continue;
        }
        if (!psi_bounded) {
            const double slope_n = probe.slope(
                [&](double r) {
                    return std::pow(r, p * (1.0 + theta) / d) *
                           std::pow(dens.rho(r), (q + 1.0) / d) * geom.area(r);
                },
                "second blow-up integrand");
            if (slope_n >= -1.0 - margin) {
                continue;
            }
        }
        rep.regime = Regime::InterfaceBlowUp;
        rep.theta_used = theta;
        if (psi_bounded) {
            rep.notes = "psi bounded: the first integral controls the second";
        }
        return rep;
    }

    if (std::abs(alpha_tail - rep.alpha_star) <= margin) {
        rep.regime = Regime::Boundary;
        rep.notes = "critical case alpha = alpha_star";
        return rep;
    }

    // Some a in (p, alpha_star] with s^a rho(s) eventually nonincreasing.
    constexpr int candidates = 64;
    for (int k = 1; k <= candidates; ++k) {
        const double a = p + (rep.alpha_star - p) * k / candidates;
        const double slope =
            probe.slope([&](double s) { return dens.psi_alpha(a, s); }, "psi_alpha");
        if (slope <= -margin) {
            rep.regime = Regime::SupercriticalDecay;
            std::ostringstream note;
            note << "s^a rho(s) eventually nonincreasing for a = " << a;
            rep.notes = note.str();
            return rep;
        }
    }

    rep.regime = Regime::Boundary;
    rep.notes = "no hypothesis certified on the sampled range";
    return rep;
}

} // namespace densflow
