#pragma once

#include "densflow/density.hpp"
#include "densflow/exponents.hpp"
#include "densflow/geometry.hpp"
#include "densflow/grid.hpp"
#include "densflow/numerics.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace densflow {

using GridHandle = std::shared_ptr<const RadialGrid>;

/// Nonnegative cell values on a radial grid, vanishing in the last cell.
class RadialTestFunction {
public:
    RadialTestFunction(GridHandle grid, std::vector<double> values);

    /// f evaluated at the cell centres.
    static RadialTestFunction sample(GridHandle grid, const std::function<double(double)>& f);

    /// Linear interpolation of (knots, values), zero beyond the last knot.
    static RadialTestFunction piecewise_linear(GridHandle grid, const std::vector<double>& knots,
                                               const std::vector<double>& values);

    const RadialGrid& grid() const noexcept { return *grid_; }
    const GridHandle& grid_handle() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t support_cells() const noexcept { return support_cells_; }

    /// sum_i w_i u_i^q.
    double moment(double q) const;
    /// sum_i rho(r_i) w_i u_i^q.
    double weighted_moment(double q, const DensityProfile& dens) const;
    /// sum over interior faces of sigma_f h_f |(u_f - u_{f-1}) / h_f|^p.
    double gradient_energy(double p) const;
    /// Total weight of cells where u > 0.
    double support_measure() const;
    /// sum of rho(r_i) w_i over positive cells with r_i >= r.
    double weighted_support_beyond(const DensityProfile& dens, double r) const;

    RadialTestFunction scaled(double lambda) const;

private:
    GridHandle grid_;
    std::vector<double> values_;
    std::size_t support_cells_ = 0;
};

/// Step function u*(s) = v_k on (S_{k-1}, S_k], with the cell values sorted
/// in decreasing order and S_k their cumulative weights.
class Rearrangement {
public:
    Rearrangement(std::vector<double> cumulative_measure, std::vector<double> values);

    double operator()(double s) const;
    /// int_0^infinity u*(s)^q ds.
    double moment(double q) const;
    const std::vector<double>& measures() const noexcept { return measure_; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> measure_;
    std::vector<double> values_;
};

Rearrangement decreasing_rearrangement(const RadialTestFunction& f);

/// int u^p / r^p dmu over int |u'|^p dmu, with the centre cell evaluated at
/// its midpoint radius. Throws DegenerateInputError for the zero function.
double hardy_ratio(const RadialTestFunction& f, double p);

namespace embedding {
/// Moment interpolation with exponents 0 < r < q <= Np/(N-p).
struct Moments {
    double q;
    double r;
};
/// The case q = p of Moments with the support measure in place of E.
struct MomentsAtP {
    double r;
};
/// Weighted L^p bound through psi(R) and omega of the support.
struct WeightedOmega {
    double radius;
};
/// Euclidean weighted L^p bound through rho^{N/p}.
struct EuclideanWeighted {
    double radius;
};
/// Euclidean weighted L^{p1} bound for decaying densities.
struct EuclideanDecay {
    double p1;
};
} // namespace embedding

using EmbeddingKind =
    std::variant<embedding::Moments, embedding::MomentsAtP, embedding::WeightedOmega,
                 embedding::EuclideanWeighted, embedding::EuclideanDecay>;

/// Short name of the inequality, e.g. "EmbOld".
std::string kind_name(const EmbeddingKind& kind);
/// Parameters as space-separated key=value pairs.
std::string kind_params(const EmbeddingKind& kind);

/// Left side over right side without the constant. Throws DomainError for
/// exponents outside the admissible range and HypothesisError when the
/// density or geometry does not meet the statement's assumptions.
double embedding_ratio(const RadialTestFunction& f, const EmbeddingKind& kind,
                       const Exponents& exps, const DensityProfile& dens);

/// A convex increasing G with G(0) = 0 and, optionally, its inverse.
struct ConvexFunction {
    std::function<double(double)> value;
    std::function<double(double)> inverse;
};

/// G(s) = (s / (N omega_N^{1/N}))^{N/(N-1)}, the inverse of the Euclidean
/// isoperimetric function.
ConvexFunction euclidean_isoperimetric_g_inverse(int n_dim);

/// Tabulated maximal solution A of G(A) = (A')^{p/(p-1)}, A(0) = 0, together
/// with B(s) = G(A(s^{1/p})) and S(s) = G^{-1}(s)^p s^{1-p}.
///
/// A is tabulated on a logarithmic grid and interpolated in log-log
/// coordinates; below the first node it follows the singular-start power
/// law and beyond the last node the fitted tail power law.
class GeneralEmbeddingProfile {
public:
    double p() const noexcept { return p_; }
    /// max s A'(s) / A(s) over the table.
    double c_ap() const noexcept { return c_ap_; }

    double g(double s) const { return g_.value(s); }
    double g_inverse(double v) const;
    double a(double s) const;
    /// G(A(s))^{(p-1)/p}.
    double a_prime(double s) const;
    double a_inverse(double v) const;
    double b(double s) const;
    double b_inverse(double v) const;
    double s_fn(double v) const;

    const std::vector<double>& grid() const noexcept { return s_; }
    const std::vector<double>& a_table() const noexcept { return a_; }

    /// A/s <= A' <= C_ap A/s at every node (relative slack 1e-9).
    bool derivative_sandwich_holds() const;
    /// C_ap^{-p} s <= S(B(s)) <= s at every node (relative slack 1e-9).
    bool composition_sandwich_holds() const;
    /// Nodes where the discrete second difference of B is negative.
    std::size_t b_convexity_violations() const;

    /// Log-log slope of A and of B over the table.
    double fitted_a_exponent() const;
    double fitted_b_exponent() const;

private:
    friend GeneralEmbeddingProfile solve_profile_ode(ConvexFunction g, double p, double s_max);

    ConvexFunction g_;
    double p_ = 0.0;
    double c_ap_ = 0.0;
    double head_exponent_ = 0.0;
    double tail_exponent_ = 0.0;
    std::vector<double> s_;
    std::vector<double> a_;
    numerics::MonotoneCubic log_a_;
    numerics::MonotoneCubic log_s_of_a_;
};

/// Starts from the power law matching G near 0 at s0 = 1e-6 and continues with
/// an adaptive Dormand-Prince integration of log A against log s up to s_max.
/// Throws BranchError when only the trivial branch exists.
GeneralEmbeddingProfile solve_profile_ode(ConvexFunction g, double p, double s_max);

struct GeneralEmbeddingRatios {
    /// S(int G(A(u))) over int |u'|^p.
    double energy = 0.0;
    /// int u^p over v B^{-1}(B(C^p int |u'|^p) / v), v the support measure.
    double faber_krahn = 0.0;
    /// int u^p rho over psi(R) int |u'|^p plus the tail term, constant 1.
    double weighted = 0.0;
};

/// Throws HypothesisError off Euclidean geometry, or when psi decreases on
/// the grid.
GeneralEmbeddingRatios general_embedding_check(const RadialTestFunction& f,
                                               const GeneralEmbeddingProfile& prof,
                                               const DensityProfile& dens, double radius);

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

/// Piecewise-linear test function number `index` of the seeded family:
/// 3-10 knots, support radius in [R_max/20, R_max/2], values in [0, 1].
RadialTestFunction random_test_function(GridHandle grid, std::uint64_t seed, std::size_t index);

struct RandomSuiteResult {
    std::vector<double> ratios;
    double max_ratio = 0.0;
    std::size_t argmax = 0;
};

/// hardy_ratio over `count` members of the family, evaluated in parallel.
RandomSuiteResult random_hardy_suite(GridHandle grid, double p, std::uint64_t seed,
                                     std::size_t count);

} // namespace densflow
