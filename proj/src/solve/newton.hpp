#ifndef NEURODIFFUSE_SOLVE_NEWTON_HPP
#define NEURODIFFUSE_SOLVE_NEWTON_HPP

#include <functional>
#include <vector>

#include "core/banded.hpp"

namespace neurodiffuse {

struct NewtonConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    int max_iters = 25;
    double divergence_ratio = 1e4;
};

struct NewtonReport {
    int iterations = 0;
    std::vector<double> residual_history;
    bool stagnated = false; // accepted on update size at the rounding floor
};

// Fills the constrained residual (and Jacobian when non-null) at u.
using AssembleFn =
    std::function<void(const std::vector<double>& u, std::vector<double>& residual,
                       BandedMatrix* jac)>;

struct PerfCounters {
    double t_assembly = 0.0;
    double t_lu = 0.0;
    double t_pde = 0.0;
    double t_ode = 0.0;
    double t_total = 0.0;
    long newton_iterations = 0;
    long steps = 0;
};

// Plain Newton (no line search, matching the failure behaviour the refinement
// tables document for the marginal schemes). Throws StepFailure on
// divergence, singular Jacobians, or running out of iterations.
NewtonReport newton_solve(const AssembleFn& assemble, BandedMatrix& jac,
                          std::vector<double>& u, const NewtonConfig& config,
                          PerfCounters* perf = nullptr);

} // namespace neurodiffuse

#endif
