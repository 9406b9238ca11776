#include "densflow/geometry.hpp"

#include "densflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace densflow {

const AssumptionCheck& AssumptionReport::at(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) {
            return c;
        }
    }
    throw std::out_of_range("no assumption check named " + name);
}

double unit_ball_volume(int n_dim) {
    const double half = 0.5 * n_dim;
    return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

ManifoldProfile ManifoldProfile::euclidean(int n_dim) {
    if (n_dim < 1) {
        throw DomainError("dimension must be positive");
    }
    ManifoldProfile p;
    p.kind_ = ManifoldKind::Euclidean;
    p.n_dim_ = n_dim;
    p.max_radius_ = std::numeric_limits<double>::infinity();
    p.ball_ = unit_ball_volume(n_dim);
    return p;
}

ManifoldProfile ManifoldProfile::tabulated(int n_dim, std::vector<double> radii,
                                           std::vector<double> areas,
                                           std::function<double(double)> iso_g) {
    if (n_dim < 1) {
        throw DomainError("dimension must be positive");
    }
    if (radii.size() < 3 || radii.size() != areas.size()) {
        throw DomainError("tabulated geometry needs at least three (r, sigma) rows");
    }
    if (radii.front() < 0.0) {
        throw DomainError("tabulated radii must be nonnegative");
    }
    for (std::size_t i = 0; i < areas.size(); ++i) {
        if (areas[i] < 0.0 || (radii[i] > 0.0 && areas[i] == 0.0)) {
            throw DomainError("sphere areas must be positive away from r = 0");
        }
    }
    ManifoldProfile p;
    p.kind_ = ManifoldKind::Tabulated;
    p.n_dim_ = n_dim;
    p.max_radius_ = radii.back();
    if (radii.front() > 0.0) {
        p.head_exponent_ = std::log(areas[1] / areas[0]) / std::log(radii[1] / radii[0]);
        if (!(p.head_exponent_ > -1.0)) {
            throw DomainError("sphere area is not integrable at r = 0");
        }
        p.head_volume_ = areas[0] * radii[0] / (p.head_exponent_ + 1.0);
    }
    p.sigma_ = numerics::MonotoneCubic(std::move(radii), std::move(areas));
    p.iso_g_ = std::move(iso_g);
    return p;
}

ManifoldProfile ManifoldProfile::from_csv(const std::string& path, int n_dim) {
    auto [r, s] = numerics::read_two_column_csv(path, "r,sigma");
    return tabulated(n_dim, std::move(r), std::move(s));
}

double ManifoldProfile::area(double r) const {
    if (r < 0.0) {
        throw DomainError("radius must be nonnegative");
    }
    if (kind_ == ManifoldKind::Euclidean) {
        return n_dim_ * ball_ * std::pow(r, n_dim_ - 1);
    }
    if (r > max_radius_) {
        throw RangeError("radius beyond tabulated geometry");
    }
    const double r0 = sigma_.x_front();
    if (r < r0) {
        return sigma_.ys().front() * std::pow(r / r0, head_exponent_);
    }
    return sigma_(r);
}

double ManifoldProfile::volume(double r) const {
    if (r < 0.0) {
        throw DomainError("radius must be nonnegative");
    }
    if (kind_ == ManifoldKind::Euclidean) {
        return ball_ * std::pow(r, n_dim_);
    }
    if (r > max_radius_ * (1.0 + 1e-12)) {
        throw RangeError("radius beyond tabulated geometry");
    }
    const double r0 = sigma_.x_front();
    if (r < r0) {
        return head_volume_ * std::pow(r / r0, head_exponent_ + 1.0);
    }
    return head_volume_ + sigma_.integral_from_start(std::min(r, max_radius_));
}

double ManifoldProfile::inverse_volume(double v) const {
    if (v < 0.0) {
        throw DomainError("volume must be nonnegative");
    }
    if (v == 0.0) {
        return 0.0;
    }
    if (kind_ == ManifoldKind::Euclidean) {
        return std::pow(v / ball_, 1.0 / n_dim_);
    }
    const double v_max = volume(max_radius_);
    if (v > v_max * (1.0 + 1e-14)) {
        throw RangeError("volume exceeds V(R_max) of the tabulated geometry");
    }
    double lo = 0.0;
    double hi = max_radius_;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (volume(mid) < v) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double ManifoldProfile::iso_g(double v) const {
    if (!(v > 0.0)) {
        throw DomainError("volume must be positive");
    }
    if (kind_ == ManifoldKind::Euclidean) {
        return n_dim_ * std::pow(ball_, 1.0 / n_dim_) * std::pow(v, (n_dim_ - 1.0) / n_dim_);
    }
    if (iso_g_) {
        return iso_g_(v);
    }
    return area(inverse_volume(v));
}

double ManifoldProfile::omega(double v) const {
    if (!(v > 0.0)) {
        throw DomainError("volume must be positive");
    }
    if (kind_ == ManifoldKind::Euclidean) {
        return 1.0 / (n_dim_ * std::pow(ball_, 1.0 / n_dim_));
    }
    return std::pow(v, (n_dim_ - 1.0) / n_dim_) / iso_g(v);
}

AssumptionReport verify_geometry_assumptions(const ManifoldProfile& profile,
                                             const Exponents& exps, double r_max,
                                             const GeometryCaps& caps) {
    if (!(r_max > 0.0)) {
        throw DomainError("R_max must be positive");
    }
    if (r_max > profile.max_radius()) {
        throw RangeError("geometry undefined on [0, R_max]");
    }
    const double r_lo = r_max * std::pow(10.0, -caps.decades);
    const auto radii = numerics::log_grid(r_lo, 0.5 * r_max, caps.per_decade);
    const double p = exps.p();

    auto doubling = open_check("doubling", 0.0, caps.doubling);
    auto iso = open_check("iso_volume", std::numeric_limits<double>::infinity(), caps.iso_volume_floor);
    auto hardy = open_check("hardy_volume", 0.0, caps.hardy_volume);
    auto omega_mono = open_check("omega_nondecreasing", 0.0, 1e-9);

    // int_0^R sigma(r) r^{-p} dr equals int_0^{V(R)} dtau / V^{-1}(tau)^p.
    const double h_ratio = 1.0 + 1e-4;
    const double head_k =
        std::log(profile.area(r_lo * h_ratio) / profile.area(r_lo)) / std::log(h_ratio);
    double hardy_integral = std::numeric_limits<double>::infinity();
    if (head_k + 1.0 - p > 0.0) {
        hardy_integral = profile.area(r_lo) * std::pow(r_lo, 1.0 - p) / (head_k + 1.0 - p);
    } else {
        hardy.note = "V^{-1}(tau)^{-p} not integrable at 0";
    }
    double prev_r = r_lo;
    double prev_omega = profile.omega(profile.volume(r_lo));

    for (double r : radii) {
        const double v = profile.volume(r);
        doubling.constant = std::max(doubling.constant, profile.volume(2.0 * r) / v);
        iso.constant = std::min(iso.constant, profile.iso_g(v) * r / v);

        if (r > prev_r) {
            // Integrate in log r: sigma(r) r^{1-p} d(ln r).
            const auto f = [&](double s) {
                const double rr = std::exp(s);
                return profile.area(rr) * std::pow(rr, 1.0 - p);
            };
            hardy_integral += numerics::adaptive_simpson(f, std::log(prev_r), std::log(r), 1e-11);
        }
        hardy.constant = std::max(hardy.constant, hardy_integral * std::pow(r, p) / v);

        const double om = profile.omega(v);
        if (om < prev_omega) {
            omega_mono.constant = std::max(omega_mono.constant, (prev_omega - om) / prev_omega);
        }
        prev_omega = om;
        prev_r = r;
    }

    for (auto* c : {&doubling, &iso, &hardy, &omega_mono}) {
        c->range_lo = r_lo;
        c->range_hi = 0.5 * r_max;
    }
    doubling.pass = doubling.constant <= doubling.cap;
    iso.pass = iso.constant >= iso.cap;
    hardy.pass = std::isfinite(hardy.constant) && hardy.constant <= hardy.cap;
    omega_mono.pass = omega_mono.constant <= omega_mono.cap;
    omega_mono.note = "largest relative decrease of omega between neighbouring samples";
    return AssumptionReport{{doubling, iso, hardy, omega_mono}};
}

} // namespace densflow
