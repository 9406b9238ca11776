#pragma once

#include "densflow/assumptions.hpp"
#include "densflow/exponents.hpp"
#include "densflow/geometry.hpp"
#include "densflow/numerics.hpp"

#include <memory>
#include <string>
#include <vector>

namespace densflow {

enum class DensityKind { PowerLaw, Tabulated };

/// Radial capacity weight rho(r): positive, bounded, nonincreasing.
///
/// PowerLaw(alpha) is rho(r) = (1 + r)^{-alpha}. Tabulated densities are
/// interpolated monotone-cubically, held constant below the first sample and
/// continued as ((1+r)/(1+r_last))^{-alpha_est} beyond the last.
class DensityProfile {
public:
    static DensityProfile power_law(double alpha);
    /// Rejects any increase beyond 1e-12 relative.
    static DensityProfile tabulated(std::vector<double> radii, std::vector<double> values);
    /// CSV with header `r,rho`.
    static DensityProfile from_csv(const std::string& path);

    DensityKind kind() const noexcept { return kind_; }
    /// alpha for PowerLaw; the fitted tail exponent for tabulated data.
    double alpha() const noexcept { return alpha_; }

    double rho(double r) const;
    /// s^p rho(s).
    double psi(double p, double s) const;
    /// s^a rho(s).
    double psi_alpha(double a, double s) const { return psi(a, s); }

private:
    DensityProfile() = default;

    DensityKind kind_ = DensityKind::PowerLaw;
    double alpha_ = 0.0;
    numerics::MonotoneCubic table_;
};

using DensityHandle = std::shared_ptr<const DensityProfile>;

struct DensityCaps {
    double reverse_doubling = 1e3;
    double divergent = 1e3;
    double psi_quasi_monotone = 10.0;
    int per_decade = 256;
    double decades = 4.0;
};

/// Sup of psi(s)/psi(t) over sampled s < t; the finite-range constant of a
/// quasi-monotonicity condition.
double quasi_monotone_constant(const DensityProfile& dens, double power,
                               const std::vector<double>& grid);

/// Audits reverse doubling of rho, int_{B_R} rho <= C V(R) rho(R), the
/// quasi-monotonicity of psi, and the smallest decay exponent a for which
/// rho(cs) <= C c^{-a} rho(s) holds with C within the psi cap.
AssumptionReport verify_density_assumptions(const DensityProfile& dens,
                                            const ManifoldProfile& geom, const Exponents& exps,
                                            double r_max, const DensityCaps& caps = {});

} // namespace densflow
