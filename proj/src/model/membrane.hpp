#ifndef NEURODIFFUSE_MODEL_MEMBRANE_HPP
#define NEURODIFFUSE_MODEL_MEMBRANE_HPP

#include <array>

#include "core/constants.hpp"
#include "model/model_spec.hpp"

namespace neurodiffuse {

// Gate slots of the physiological neuron channels.
inline constexpr int kGateNapM = 0;
inline constexpr int kGateNapH = 1;
inline constexpr int kGateKdrM = 2;
inline constexpr int kGateKaM = 3;
inline constexpr int kGateKaH = 4;
inline constexpr int kNumGates = 5;

enum class Channel { NaP, KDR, KA };

// Nernst potential (V). Throws on non-positive concentrations.
double nernst(const PhysicalConstants& pc, int valence, double conc_r, double conc_R);

// I = g (phi_rR - E), A/m^2.
double leak_current(double g_leak, double phi_rR, double nernst_potential);

// x/(e^x - 1) with the removable singularity handled by series.
double ratio_expm1(double x);

struct GhkCurrent {
    double value = 0.0; // A/m^2
    double d_phi = 0.0;
    double d_conc_r = 0.0;
    double d_conc_R = 0.0;
};

// Goldman-Hodgkin-Katz current for a monovalent cation channel with frozen
// gate open fraction; mu = F phi_rR / (R T), the |mu| < 1e-4 branch uses the
// second-order series of mu/(1 - e^{-mu}).
GhkCurrent ghk_current(const PhysicalConstants& pc, double permeability, double gate_factor,
                       double phi_rR, double conc_r, double conc_R);

struct GateRatePair {
    double alpha = 0.0; // 1/s
    double beta = 0.0;  // 1/s
};

struct ChannelRates {
    GateRatePair m;
    GateRatePair h; // unused for KDR
};

// Voltage-dependent rate expressions; phi_rR in mV, rates returned in 1/s
// (the tabulated expressions are 1/ms). ka_literal selects the printed KA
// expressions instead of the conventional ones.
ChannelRates gating_rates(Channel ch, double phi_mv, bool ka_literal = false);

// alpha (1 - y) - beta y for one gate.
double gating_rhs(double y, const GateRatePair& r);

struct PumpCurrent {
    double value = 0.0;
    double d_conc_k_ecs = 0.0;
    double d_conc_na_r = 0.0;
};

// Na/K/ATPase: 3 Na out, 2 K in.
PumpCurrent pump_current(double pump_max, double m_k, double m_na,
                         double conc_k_ecs, double conc_na_r);

struct KirConductance {
    double value = 0.0; // S/m^2
    double d_phi_ge_mv = 0.0;
    double d_nernst_k_mv = 0.0;
    double d_conc_k_ecs = 0.0;
};

// Inward-rectifier K conductance; voltages in mV.
KirConductance kir_conductance(double g0, double conc_k_ecs, double phi_ge_mv,
                               double nernst_k_mv);

struct NakclCurrent {
    double value = 0.0;
    std::array<double, kNumIons> d_conc_g{};
    std::array<double, kNumIons> d_conc_e{};
};

NakclCurrent nakcl_current(double g_nakcl, const std::array<double, kNumIons>& conc_g,
                           const std::array<double, kNumIons>& conc_e);

// Excitatory conductance G_ex(x, t), S/m^2.
double excitatory_conductance(const TriggerParams& trigger, double x, double t);

// Transmembrane ion fluxes for compartment r against the ECS, split into the
// implicitly treated passive part (with its linearization) and the explicitly
// treated active (pump) part. Partial-derivative slots per ion:
//   [0] phi_r  [1] phi_R  [2..4] conc_r  [5..7] conc_R
struct MembraneFluxSet {
    std::array<double, kNumIons> passive{};                      // mol/(m^2 s)
    std::array<double, kNumIons> active{};                       // mol/(m^2 s)
    std::array<std::array<double, 8>, kNumIons> d_passive{};

    double total(int k) const { return passive[k] + active[k]; }
};

MembraneFluxSet membrane_fluxes(const ModelSpec& spec, int r,
                                double phi_r, double phi_R,
                                const double* conc_r, const double* conc_R,
                                const double* gates, double x, double t,
                                bool want_partials = true);

// Steady-state gate values alpha/(alpha+beta) at a membrane potential (mV).
std::array<double, kNumGates> gating_steady_state(double phi_mv, bool ka_literal = false);

} // namespace neurodiffuse

#endif
