#pragma once

#include "densflow/density.hpp"
#include "densflow/exponents.hpp"
#include "densflow/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace densflow {

enum class Regime { Subcritical, SupercriticalDecay, InterfaceBlowUp, Boundary };

const char* to_string(Regime r);

/// Closed-form rates and the classifier verdict for one (geometry, density,
/// exponents) triple. Rates that do not apply are left empty.
struct RegimeReport {
    double alpha_star = 0.0;
    std::optional<Regime> regime;
    std::optional<double> sup_decay_exp;
    std::optional<double> interface_exp;
    double universal_exp = 0.0;
    std::optional<double> theta_used;
    /// Decay exponent of rho read off the tail (alpha for power laws).
    std::optional<double> alpha_tail;
    std::string notes;
};

struct PropagationCurve {
    std::vector<double> times;
    std::vector<double> radii;
    double gamma_used = 1.0;
};

/// (N(p+m-3)+p)/(p+m-2).
double alpha_star(const Exponents& exps);

/// alpha_star with p+m-3 replaced by p+m+theta-3; increases with theta.
double alpha_star_theta(const Exponents& exps, double theta);

/// R^p rho(R)^{p+m-2} V(R)^{p+m-3}.
double propagation_value(const ManifoldProfile& geom, const DensityProfile& dens,
                         const Exponents& exps, double r);

/// Radius where the propagation function reaches gamma t mass^{p+m-3}.
/// Throws RegimeError if the function is not increasing on the bracket and
/// RangeError if the root lies beyond the geometry.
double z0(const ManifoldProfile& geom, const DensityProfile& dens, const Exponents& exps,
          double t, double mass, double gamma = 1.0);

PropagationCurve propagation_curve(const ManifoldProfile& geom, const DensityProfile& dens,
                                   const Exponents& exps, const std::vector<double>& times,
                                   double mass, double gamma = 1.0);

/// Rates of the Euclidean power-law example at decay exponent alpha: the sup
/// and interface exponents when alpha < alpha_star, and 1/(p+m-3) always.
/// `regime` is left empty.
RegimeReport predicted_exponents(const Exponents& exps, double alpha);

/// (Z^p rho(Z) / t)^{1/(p+m-3)} without its constant.
double sub_sup_bound(const DensityProfile& dens, const Exponents& exps, double z, double t);

struct ClassifyOptions {
    /// Outer end of the tail analysis; clipped to the geometry's range.
    double r_max = 1e6;
    /// Decades below r_max sampled for quasi-monotonicity.
    double decades = 6.0;
    /// Decades at the end of the grid used for tail-exponent fits.
    double tail_decades = 2.0;
    int per_decade = 64;
    /// Margin on fitted exponents when deciding finiteness or monotonicity.
    double margin = 0.05;
    double psi_cap = 10.0;
    /// Tail fits below this r^2 are not trusted.
    double min_r_squared = 0.99;
    /// Fits whose rms residual in log units is below this are trusted
    /// regardless of r^2.
    double flat_residual = 1e-3;
    int theta_levels = 21;
};

/// Evaluates the hypotheses of the subcritical, supercritical and
/// interface blow-up results in that order. Throws InconclusiveError when a
/// tail exponent cannot be estimated.
RegimeReport classify_regime(const ManifoldProfile& geom, const DensityProfile& dens,
                             const Exponents& exps, const ClassifyOptions& opts = {});

} // namespace densflow
