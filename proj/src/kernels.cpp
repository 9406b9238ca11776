#include "densflow/kernels.hpp"

#include <algorithm>

namespace densflow {

double numerical_flux(double u_left, double u_right, double dr, const Exponents& exps,
                      double eps_reg) {
    if (u_left == u_right) {
        return 0.0;
    }
    const double d = (u_right - u_left) / dr;
    const FluxLaw law(exps, eps_reg);
    return law.diffusivity(0.5 * (u_left + u_right), d) * d;
}

namespace kernels {

StepCoefficients make_coefficients(const RadialGrid& grid, const DensityProfile& dens) {
    StepCoefficients c;
    const auto centers = grid.centers();
    const auto weights = grid.cell_weights();
    c.inv_capacity.resize(grid.n_cells());
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        c.inv_capacity[i] = 1.0 / (dens.rho(centers[i]) * weights[i]);
    }
    c.face_area.assign(grid.face_areas().begin(), grid.face_areas().end());
    c.face_spacing.assign(grid.face_spacing().begin(), grid.face_spacing().end());
    return c;
}

namespace {

// Shared by both backends so the arithmetic is identical.
inline void face_terms(const double* u, const StepCoefficients& c, const FluxLaw& law,
                       std::size_t f, double& flux, double& rate) {
    const double ul = u[f - 1];
    const double ur = u[f];
    if (ul == ur) {
        flux = 0.0;
        const double a = law.diffusivity(ul, 0.0);
        rate = c.face_area[f] * law.stiffness() * a / c.face_spacing[f];
        return;
    }
    const double h = c.face_spacing[f];
    const double d = (ur - ul) / h;
    const double a = law.diffusivity(0.5 * (ul + ur), d);
    flux = c.face_area[f] * a * d;
    rate = c.face_area[f] * law.stiffness() * a / h;
}

} // namespace

double fluxes_reference(std::span<const double> u, const StepCoefficients& c, const FluxLaw& law,
                        std::span<double> flux, std::span<double> rate) {
    const std::size_t n = u.size();
    flux[0] = 0.0;
    flux[n] = 0.0;
    rate[0] = 0.0;
    rate[n] = 0.0;
    for (std::size_t f = 1; f < n; ++f) {
        face_terms(u.data(), c, law, f, flux[f], rate[f]);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, c.inv_capacity[i] * (rate[i] + rate[i + 1]));
    }
    return worst;
}

double fluxes_parallel(std::span<const double> u, const StepCoefficients& c, const FluxLaw& law,
                       std::span<double> flux, std::span<double> rate, std::size_t active_end) {
    const std::size_t n = u.size();
    // Cells at or beyond active_end are zero, so faces past last_face see two zeros.
    const std::size_t last_face = std::min(active_end, n - 1);
    const double* uu = u.data();
    double* ff = flux.data();
    double* rr = rate.data();
    ff[0] = 0.0;
    rr[0] = 0.0;
    for (std::size_t f = last_face + 1; f <= n; ++f) {
        ff[f] = 0.0;
        rr[f] = 0.0;
    }
    const long faces = static_cast<long>(last_face);
    double worst = 0.0;
#pragma omp parallel if (faces > 4096)
    {
#pragma omp for schedule(static)
        for (long fl = 1; fl <= faces; ++fl) {
            const auto f = static_cast<std::size_t>(fl);
            face_terms(uu, c, law, f, ff[f], rr[f]);
        }
#pragma omp for schedule(static) reduction(max : worst)
        for (long il = 0; il <= faces; ++il) {
            const auto i = static_cast<std::size_t>(il);
            worst = std::max(worst, c.inv_capacity[i] * (rr[i] + rr[i + 1]));
        }
    }
    return worst;
}

bool update_reference(std::span<const double> u, std::span<const double> flux,
                      const StepCoefficients& c, double dt, std::span<double> out) {
    bool ok = true;
    for (std::size_t i = 0; i < u.size(); ++i) {
        out[i] = u[i] + dt * c.inv_capacity[i] * (flux[i + 1] - flux[i]);
        ok = ok && out[i] >= 0.0;
    }
    return ok;
}

bool update_parallel(std::span<const double> u, std::span<const double> flux,
                     const StepCoefficients& c, double dt, std::span<double> out,
                     std::size_t active_end) {
    const std::size_t n = u.size();
    const long last = static_cast<long>(std::min(active_end, n - 1));
    int bad = 0;
    const double* uu = u.data();
    const double* ff = flux.data();
    double* oo = out.data();
#pragma omp parallel for schedule(static) reduction(| : bad) if (last > 4096)
    for (long il = 0; il <= last; ++il) {
        const auto i = static_cast<std::size_t>(il);
        oo[i] = uu[i] + dt * c.inv_capacity[i] * (ff[i + 1] - ff[i]);
        bad |= oo[i] < 0.0 ? 1 : 0;
    }
    return bad == 0;
}

std::size_t support_end(std::span<const double> u, std::size_t hint) {
    std::size_t k = std::min(hint, u.size());
    while (k > 0 && !(u[k - 1] > 0.0)) {
        --k;
    }
    return k;
}

} // namespace kernels
} // namespace densflow
