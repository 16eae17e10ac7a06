#ifndef NEURODIFFUSE_MODEL_CONSTITUTIVE_HPP
#define NEURODIFFUSE_MODEL_CONSTITUTIVE_HPP

#include "model/model_spec.hpp"

namespace neurodiffuse {

// Effective diffusion D_r^k; pass the compartment's own volume fraction
// (the ECS has no gap-junction factor).
double effective_diffusion(const ModelSpec& spec, int r, int k, double alpha_r);

// Pointwise ion flux density J_r^k = -D dc - (D z/psi) c dphi + alpha u c.
// velocity is ignored in the zero flow limit.
double ion_flux(const ModelSpec& spec, int r, int k, double alpha_r,
                double conc, double grad_conc, double grad_phi, double velocity);

// Membrane tension tau_r = S_r (alpha_r - alpha0_r); p_r = p_R + tau_r.
double membrane_tension(const ModelSpec& spec, int r, double alpha_r);

// Compartmental fluid velocity (full model only; ModeError in zero flow).
// grad_alpha enters through the tension (r < R-1) and oncotic terms.
double fluid_velocity(const ModelSpec& spec, int r, double alpha_r, double grad_alpha,
                      double grad_p_R, const double* conc, double grad_phi);

// Transmembrane water flux w_rR; p_jump = p_r - p_R. The pressure term is
// converted to an osmolarity equivalent so that eta multiplies mol/m^3,
// matching eta's units. Positive w shrinks compartment r.
double water_flux(const ModelSpec& spec, int r, double alpha_r, double alpha_R,
                  const double* conc_r, const double* conc_R, double p_jump);

} // namespace neurodiffuse

#endif
