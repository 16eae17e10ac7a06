#ifndef NEURODIFFUSE_SOLVE_PDE_STEPPER_HPP
#define NEURODIFFUSE_SOLVE_PDE_STEPPER_HPP

#include <optional>
#include <string>

#include "solve/coupled_system.hpp"
#include "solve/newton.hpp"

namespace neurodiffuse {

enum class PdeStepperKind { BE, BDF2, CN };

const char* pde_stepper_name(PdeStepperKind k);
PdeStepperKind pde_stepper_from_name(const std::string& name);

SchemeWeights scheme_weights(PdeStepperKind kind);

// States at levels n and n-1 (the latter only once a BDF2 history exists).
struct HistoryBuffer {
    TissueState state_n;
    std::optional<TissueState> state_nm1;
};

// One nonlinear variational time step, monolithic Newton over all PDE
// fields with a banded direct solve. BDF2 falls back to backward Euler
// while only one history level exists.
class PdeStepper {
public:
    PdeStepper(const CoupledSystem& system, PdeStepperKind kind, NewtonConfig newton = {});

    // Nullspace pins for physiological runs (ignored when forcing provides
    // Dirichlet data): phi_R and, in the full model, p_R at the left dof.
    void set_pins(double phi_ecs_left, double pressure_left);

    TissueState step(const HistoryBuffer& history, const GatingField& gates, double dt,
                     const ForcingSet* forcing = nullptr);

    const NewtonReport& last_report() const { return report_; }
    void set_parallel(bool p) { parallel_ = p; }
    void set_perf(PerfCounters* perf) { perf_ = perf; }

private:
    const CoupledSystem* system_;
    PdeStepperKind kind_;
    NewtonConfig newton_;
    BandedMatrix jac_;
    NewtonReport report_;
    std::vector<RowConstraint> pins_;
    bool parallel_ = true;
    PerfCounters* perf_ = nullptr;
};

} // namespace neurodiffuse

#endif
