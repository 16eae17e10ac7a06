#ifndef NEURODIFFUSE_MODEL_MODEL_SPEC_HPP
#define NEURODIFFUSE_MODEL_MODEL_SPEC_HPP

#include <array>
#include <string>
#include <vector>

#include "core/constants.hpp"

namespace neurodiffuse {

inline constexpr int kNumIons = 3; // Na, K, Cl
inline constexpr int kNa = 0;
inline constexpr int kK = 1;
inline constexpr int kCl = 2;

struct IonSpecies {
    std::string name;
    int valence = 1;
    double free_diffusion = 0.0; // m^2/s in water
};

// Which transmembrane current set a compartment carries.
enum class MembraneModel {
    None,      // ECS
    LeakOnly,  // passive leak currents for all ions
    LeakKir,   // Na/Cl leaks, KIR-conductance K current (glial, verification)
    Neuron,    // leaks + NaP + KDR + KA + pump + excitatory trigger
    Glial,     // leaks + KIR + pump + NaKCl + excitatory trigger
};

struct TriggerParams {
    double g_max = 0.0; // S/m^2
    double l_ex = 0.0;  // m
    double t_ex = 0.0;  // s
};

struct CompartmentParams {
    std::string label;
    double gamma = 0.0;       // membrane area per tissue volume, 1/m
    double capacitance = 0.0; // F/m^2
    double eta = 0.0;         // membrane water permeability, m^4/(mol s)
    double chi = 0.0;         // gap junction connectivity
    double kappa = 0.0;       // compartmental water permeability, m^4/(N s)
    double stiffness = 0.0;   // membrane stiffness (tension per unit volume-fraction excess), Pa
    double alpha0 = 0.0;      // tension-free volume fraction
    double immobile = 0.0;    // immobile ion amount a_r, mol/m^3 of tissue
    double immobile_valence = -1.0;

    MembraneModel membrane = MembraneModel::None;
    std::array<double, kNumIons> g_leak{}; // S/m^2
    double pump_max = 0.0;                 // A/m^2
    double pump_m_na = 7.7;                // mol/m^3
    double pump_m_k = 2.0;                 // mol/m^3
    double g_kir0 = 0.0;                   // S/m^2
    double g_nakcl = 0.0;                  // A/m^2
    double g_nap = 0.0, g_kdr = 0.0, g_ka = 0.0; // channel permeabilities, m/s
    int kdr_exponent = 2;                  // activation gate power of the delayed rectifier
};

struct ModelSpec {
    PhysicalConstants constants;
    std::vector<IonSpecies> ions;                // size kNumIons
    std::vector<CompartmentParams> compartments; // last entry is the ECS
    bool zero_flow = true;
    TriggerParams trigger;
    bool trigger_literal_sign = false; // driving potential (E - phi) as printed
    bool ka_literal_rates = false;     // KA rate expressions exactly as printed

    int n_comps() const { return static_cast<int>(compartments.size()); }
    int n_ions() const { return static_cast<int>(ions.size()); }
    int ecs() const { return n_comps() - 1; }
};

// Spatially uniform initial data (one value per compartment/field).
struct UniformInit {
    std::vector<double> alpha;                        // all compartments incl. ECS
    std::vector<std::array<double, kNumIons>> conc;   // per compartment
    std::vector<double> phi;                          // per compartment, V
    double pressure = 0.0;                            // ECS, Pa (full model)
};

std::vector<IonSpecies> default_ion_species();

// Closes the electroneutrality relations at t = 0: picks a_r per compartment
// (uniform in space, valence z0 = -1) so the residuals vanish for the given
// initial data. Throws ConfigError if any a_r comes out negative.
void derive_immobile_ions(ModelSpec& spec, const UniformInit& init);

} // namespace neurodiffuse

#endif
