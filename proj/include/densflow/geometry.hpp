#pragma once

#include "densflow/assumptions.hpp"
#include "densflow/exponents.hpp"
#include "densflow/numerics.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace densflow {

enum class ManifoldKind { Euclidean, Tabulated };

/// Volume of the unit ball in R^N.
double unit_ball_volume(int n_dim);

/// Radial model manifold: sphere area sigma(R), ball volume V(R), the
/// isoperimetric function g(v) and omega(v) = v^{(N-1)/N} / g(v).
///
/// Immutable once built. Tabulated profiles interpolate sigma monotone-cubically;
/// below the first sample sigma is extended as a power law fitted to the
/// first two samples. Unless an explicit g is supplied, balls are taken as
/// the isoperimetric sets, g(V(R)) = sigma(R).
class ManifoldProfile {
public:
    static ManifoldProfile euclidean(int n_dim);
    static ManifoldProfile tabulated(int n_dim, std::vector<double> radii,
                                     std::vector<double> areas,
                                     std::function<double(double)> iso_g = {});
    /// CSV with header `r,sigma`.
    static ManifoldProfile from_csv(const std::string& path, int n_dim);

    ManifoldKind kind() const noexcept { return kind_; }
    int n_dim() const noexcept { return n_dim_; }
    /// Largest radius where the profile is defined (infinite for Euclidean).
    double max_radius() const noexcept { return max_radius_; }

    double area(double r) const;
    double volume(double r) const;
    double inverse_volume(double v) const;
    double iso_g(double v) const;
    double omega(double v) const;

private:
    ManifoldProfile() = default;

    ManifoldKind kind_ = ManifoldKind::Euclidean;
    int n_dim_ = 0;
    double max_radius_ = 0.0;
    double ball_ = 0.0;

    numerics::MonotoneCubic sigma_;
    double head_exponent_ = 0.0;
    double head_volume_ = 0.0;
    std::function<double(double)> iso_g_;
};

using ManifoldHandle = std::shared_ptr<const ManifoldProfile>;

struct GeometryCaps {
    double doubling = 1e3;
    double iso_volume_floor = 1e-3;
    double hardy_volume = 1e3;
    int per_decade = 256;
    double decades = 4.0;
};

/// Smallest empirical constants of the doubling, iso-volume and volume-Hardy
/// conditions on a logarithmic grid over [R_max 10^-decades, R_max/2], plus a
/// monotonicity audit of omega.
AssumptionReport verify_geometry_assumptions(const ManifoldProfile& profile,
                                             const Exponents& exps, double r_max,
                                             const GeometryCaps& caps = {});

} // namespace densflow
