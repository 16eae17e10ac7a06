#include "model/constitutive.hpp"

#include "core/errors.hpp"

namespace neurodiffuse {

double effective_diffusion(const ModelSpec& spec, int r, int k, double alpha_r) {
    const double d_free = spec.ions[k].free_diffusion;
    if (r == spec.ecs())
        return alpha_r * d_free;
    return alpha_r * spec.compartments[r].chi * d_free;
}

double ion_flux(const ModelSpec& spec, int r, int k, double alpha_r,
                double conc, double grad_conc, double grad_phi, double velocity) {
    const double d = effective_diffusion(spec, r, k, alpha_r);
    const double z = spec.ions[k].valence;
    const double psi = spec.constants.psi();
    double j = -d * grad_conc - d * z / psi * conc * grad_phi;
    if (!spec.zero_flow)
        j += alpha_r * velocity * conc;
    return j;
}

double membrane_tension(const ModelSpec& spec, int r, double alpha_r) {
    const CompartmentParams& cp = spec.compartments[r];
    return cp.stiffness * (alpha_r - cp.alpha0);
}

double fluid_velocity(const ModelSpec& spec, int r, double alpha_r, double grad_alpha,
                      double grad_p_R, const double* conc, double grad_phi) {
    if (spec.zero_flow)
        throw ModeError("fluid velocity requested in the zero flow limit");
    const CompartmentParams& cp = spec.compartments[r];
    if (cp.kappa == 0.0)
        return 0.0;
    const double rt = spec.constants.rt();
    const double F = spec.constants.faraday;
    double grad_p_tilde = grad_p_R + rt * cp.immobile / (alpha_r * alpha_r) * grad_alpha;
    if (r != spec.ecs())
        grad_p_tilde += cp.stiffness * grad_alpha;
    double electro = 0.0;
    for (int k = 0; k < spec.n_ions(); ++k)
        electro += spec.ions[k].valence * conc[k];
    return -cp.kappa * (grad_p_tilde + F * electro * grad_phi);
}

double water_flux(const ModelSpec& spec, int r, double alpha_r, double alpha_R,
                  const double* conc_r, const double* conc_R, double p_jump) {
    if (alpha_r <= 0.0 || alpha_R <= 0.0)
        throw DegenerateState("volume fraction at or below zero in water flux");
    const CompartmentParams& cp = spec.compartments[r];
    const CompartmentParams& ce = spec.compartments[spec.ecs()];
    const double rt = spec.constants.rt();
    double osm = ce.immobile / alpha_R - cp.immobile / alpha_r;
    for (int k = 0; k < spec.n_ions(); ++k)
        osm += conc_R[k] - conc_r[k];
    return cp.eta * (p_jump / rt + osm);
}

} // namespace neurodiffuse
