#pragma once

#include "densflow/density.hpp"
#include "densflow/exponents.hpp"
#include "densflow/grid.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace densflow {

/// The face law ubar^{m-1} (|D|^2 + eps^2)^{(p-2)/2} D of the discrete flux,
/// with exact shortcuts for m = 1, 2 and p = 2 (pow(x, 1) and pow(x, 0) are
/// exact, so the shortcuts change no bits).
class FluxLaw {
public:
    FluxLaw(const Exponents& exps, double eps_reg)
        : p_(exps.p()), m_(exps.m()), eps2_(eps_reg * eps_reg),
          stiffness_(exps.p() > 2.0 ? exps.p() - 1.0 : 1.0),
          mobility_kind_(exps.m() == 2.0 ? 2 : (exps.m() == 1.0 ? 1 : 0)),
          quadratic_(exps.p() == 2.0) {}

    /// Effective diffusivity a at a face with mean value ubar and gradient d.
    double diffusivity(double ubar, double d) const {
        if (ubar == 0.0) {
            return 0.0;
        }
        double mobility;
        switch (mobility_kind_) {
        case 2: mobility = ubar; break;
        case 1: mobility = 1.0; break;
        default: mobility = std::pow(ubar, m_ - 1.0); break;
        }
        if (quadratic_) {
            return mobility;
        }
        const double g2 = d * d + eps2_;
        if (g2 == 0.0) {
            return 0.0;
        }
        return mobility * std::pow(g2, 0.5 * (p_ - 2.0));
    }

    /// Factor turning a into the linearised diffusivity of the p-Laplacian.
    double stiffness() const noexcept { return stiffness_; }

private:
    double p_;
    double m_;
    double eps2_;
    double stiffness_;
    int mobility_kind_;
    bool quadratic_;
};

/// Flux density between two neighbouring values a distance dr apart:
/// ubar^{m-1} (|D|^2 + eps^2)^{(p-2)/2} D with D = (u_right - u_left)/dr and
/// ubar the arithmetic mean.
double numerical_flux(double u_left, double u_right, double dr, const Exponents& exps,
                      double eps_reg);

namespace kernels {

/// Per-grid constants of the conservative update.
struct StepCoefficients {
    std::vector<double> inv_capacity; ///< 1 / (rho(r_i) w_i)
    std::vector<double> face_area;    ///< sigma at every edge
    std::vector<double> face_spacing; ///< centre-to-centre distance per face
};

StepCoefficients make_coefficients(const RadialGrid& grid, const DensityProfile& dens);

/// Face fluxes sigma_f F_f (zero at the centre and outer wall) and the
/// largest per-cell explicit rate sum_f sigma_f k_f / h_f / (rho_i w_i).
/// Serial reference over every cell.
/// `flux` and `rate` have n_cells + 1 entries.
double fluxes_reference(std::span<const double> u, const StepCoefficients& c, const FluxLaw& law,
                        std::span<double> flux, std::span<double> rate);

/// OpenMP version restricted to the cells [0, active_end] that can change.
double fluxes_parallel(std::span<const double> u, const StepCoefficients& c, const FluxLaw& law,
                       std::span<double> flux, std::span<double> rate, std::size_t active_end);

/// out_i = u_i + dt (flux_{i+1} - flux_i) / (rho_i w_i). Returns false when
/// any updated value is negative.
bool update_reference(std::span<const double> u, std::span<const double> flux,
                      const StepCoefficients& c, double dt, std::span<double> out);

/// Writes only cells [0, active_end]; the caller keeps both buffers zero beyond
/// the support.
bool update_parallel(std::span<const double> u, std::span<const double> flux,
                     const StepCoefficients& c, double dt, std::span<double> out,
                     std::size_t active_end);

/// One past the last strictly positive entry, scanning down from `hint`.
std::size_t support_end(std::span<const double> u, std::size_t hint);

} // namespace kernels
} // namespace densflow
