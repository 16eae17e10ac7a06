#ifndef NEURODIFFUSE_SOLVE_ODE_STEPPER_HPP
#define NEURODIFFUSE_SOLVE_ODE_STEPPER_HPP

#include <array>
#include <string>
#include <vector>

#include "core/fem.hpp"
#include "model/membrane.hpp"
#include "model/state.hpp"

namespace neurodiffuse {

enum class OdeStepperKind { BE, RK4, ESDIRK4 };

const char* ode_stepper_name(OdeStepperKind k);
OdeStepperKind ode_stepper_from_name(const std::string& name);

struct ButcherTableau {
    int stages = 0;
    std::array<std::array<double, 6>, 6> a{};
    std::array<double, 6> b{};
    std::array<double, 6> c{};
    bool stiffly_accurate = false;

    static const ButcherTableau& rk4();
    // ESDIRK4(3)6L[2]SA, gamma = 1/4, stiffly accurate and L-stable.
    static const ButcherTableau& esdirk4();
};

// Gating dynamics at a single spatial dof with the membrane potential frozen
// over the step. Components are mutually independent: two-rate relaxation
// plus an optional additive source (used by the verification harness, where
// the rhs is phi_ne plus a manufactured source).
struct GatingOde {
    int dim = 0;
    bool check_bounds = false; // physiological gates must stay in [0,1]
    std::array<double, kNumGates> alpha{}; // 1/s
    std::array<double, kNumGates> beta{};  // 1/s
    double phi = 0.0;                      // frozen phi_ne (V)
    double x = 0.0;
    double (*source)(double x, double t) = nullptr;

    double source_term(double t) const { return source ? phi + source(x, t) : 0.0; }
    double rhs_component(int i, double t, double y) const {
        return alpha[i] * (1.0 - y) - beta[i] * y + source_term(t);
    }
    double jac_component(int i) const { return -(alpha[i] + beta[i]); }
};

// One time step of y' = f(t, y) at one dof; dof_index only labels errors.
void ode_step(OdeStepperKind kind, const GatingOde& sys, double t0, double dt,
              double* y, int dof_index = -1);

// Factory for per-dof gating systems.
struct GatingDynamics {
    bool physio = true;
    bool ka_literal = false;
    int kdr_exponent = 2; // informational; exponents apply in the fluxes
    int dim = kNumGates;
    double (*source)(double x, double t) = nullptr;

    GatingOde make(double x, double phi_ne) const;
};

// Applies ode_step at every dof of the gating field; phi_ne holds the frozen
// membrane potential per dof. Deterministic and bitwise identical for any
// thread count (dofs are independent).
void batch_step(OdeStepperKind kind, const GatingDynamics& dyn,
                const std::vector<double>& phi_ne, double t0, double dt,
                GatingField& gates, bool parallel = true);

} // namespace neurodiffuse

#endif
