#include "model/model_spec.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace neurodiffuse {

std::vector<IonSpecies> default_ion_species() {
    return {
        {"Na", +1, 1.33e-9},
        {"K", +1, 1.96e-9},
        {"Cl", -1, 2.03e-9},
    };
}

void derive_immobile_ions(ModelSpec& spec, const UniformInit& init) {
    const double F = spec.constants.faraday;
    const int R = spec.n_comps();
    const int ecs = spec.ecs();

    auto charge = [&](int r) {
        double s = 0.0;
        for (int k = 0; k < spec.n_ions(); ++k)
            s += spec.ions[k].valence * init.conc[r][k];
        return s;
    };

    double ecs_membrane_sum = 0.0; // sum_r gamma_rR C_rR phi_rR
    for (int r = 0; r < R - 1; ++r) {
        CompartmentParams& cp = spec.compartments[r];
        const double phi_rR = init.phi[r] - init.phi[ecs];
        const double lhs = cp.gamma * cp.capacitance * phi_rR;
        // gamma C phi_rR = z0 F a_r + alpha_r F sum_k z^k [k]_r
        const double z0a = (lhs - init.alpha[r] * F * charge(r)) / F;
        cp.immobile = z0a / cp.immobile_valence;
        if (cp.immobile < 0.0)
            throw ConfigError("initial data not electroneutralizable: a_" + cp.label +
                              " < 0 with z0 = " + std::to_string(cp.immobile_valence));
        ecs_membrane_sum += lhs;
    }
    CompartmentParams& ce = spec.compartments[ecs];
    const double z0a_e = (-ecs_membrane_sum - init.alpha[ecs] * F * charge(ecs)) / F;
    ce.immobile = z0a_e / ce.immobile_valence;
    if (ce.immobile < 0.0)
        throw ConfigError("initial data not electroneutralizable: a_" + ce.label + " < 0");
}

} // namespace neurodiffuse
