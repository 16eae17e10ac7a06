#include "solve/pde_stepper.hpp"

#include <chrono>

#include "core/errors.hpp"

namespace neurodiffuse {

const char* pde_stepper_name(PdeStepperKind k) {
    switch (k) {
    case PdeStepperKind::BE: return "be";
    case PdeStepperKind::BDF2: return "bdf2";
    case PdeStepperKind::CN: return "cn";
    }
    return "?";
}

PdeStepperKind pde_stepper_from_name(const std::string& name) {
    if (name == "be") return PdeStepperKind::BE;
    if (name == "bdf2") return PdeStepperKind::BDF2;
    if (name == "cn") return PdeStepperKind::CN;
    throw InvalidArgument("unknown pde stepper '" + name + "'");
}

SchemeWeights scheme_weights(PdeStepperKind kind) {
    SchemeWeights w;
    switch (kind) {
    case PdeStepperKind::BE:
        break;
    case PdeStepperKind::BDF2:
        w.mass_n = -4.0 / 3.0;
        w.mass_nm1 = 1.0 / 3.0;
        w.flux_new = 2.0 / 3.0;
        w.pump_old = 2.0 / 3.0;
        w.force_new = 2.0 / 3.0;
        break;
    case PdeStepperKind::CN:
        // Midpoint fluxes (f^n + f^{n+1})/2; the active pump part stays
        // fully explicit at level n.
        w.flux_new = 0.5;
        w.flux_old = 0.5;
        w.force_new = 0.5;
        w.force_old = 0.5;
        break;
    }
    return w;
}

PdeStepper::PdeStepper(const CoupledSystem& system, PdeStepperKind kind, NewtonConfig newton)
    : system_(&system), kind_(kind), newton_(newton), jac_(system.make_matrix()) {}

void PdeStepper::set_pins(double phi_ecs_left, double pressure_left) {
    pins_ = system_->nullspace_pins(phi_ecs_left, pressure_left);
}

TissueState PdeStepper::step(const HistoryBuffer& history, const GatingField& gates, double dt,
                             const ForcingSet* forcing) {
    if (!(dt > 0.0))
        throw InvalidArgument("pde step needs dt > 0");

    PdeStepperKind effective = kind_;
    if (kind_ == PdeStepperKind::BDF2 && !history.state_nm1.has_value())
        effective = PdeStepperKind::BE; // startup step

    StepContext ctx;
    ctx.weights = scheme_weights(effective);
    ctx.dt = dt;
    ctx.t_new = history.state_n.t + dt;
    ctx.u_n = &history.state_n.u;
    ctx.u_nm1 = history.state_nm1 ? &history.state_nm1->u : nullptr;
    ctx.gates = &gates;
    ctx.forcing = forcing;

    std::vector<RowConstraint> rows =
        forcing ? system_->boundary_constraints(*forcing, ctx.t_new) : pins_;

    const auto t0 = std::chrono::steady_clock::now();
    TissueState next;
    next.t = ctx.t_new;
    next.u = history.state_n.u; // predictor

    AssembleFn assemble = [&](const std::vector<double>& u, std::vector<double>& residual,
                              BandedMatrix* jac) {
        system_->assemble(ctx, u, residual, jac, parallel_);
        system_->apply_constraints(rows, u, residual, jac);
    };
    report_ = newton_solve(assemble, jac_, next.u, newton_, perf_);

    if (perf_) {
        perf_->t_pde += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        perf_->steps += 1;
    }
    return next;
}

} // namespace neurodiffuse
