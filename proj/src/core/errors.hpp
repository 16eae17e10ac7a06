#ifndef NEURODIFFUSE_CORE_ERRORS_HPP
#define NEURODIFFUSE_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace neurodiffuse {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& msg) : Error("invalid argument: " + msg) {}
};

struct SingularMatrix : Error {
    int pivot_index;
    explicit SingularMatrix(int pivot)
        : Error("singular matrix: zero pivot at index " + std::to_string(pivot)),
          pivot_index(pivot) {}
};

struct AssemblyFailure : Error {
    int cell_index;
    explicit AssemblyFailure(int cell)
        : Error("assembly failure: non-finite local contribution in cell " + std::to_string(cell)),
          cell_index(cell) {}
};

// ODE stage failure (Newton non-convergence or a gating bound violation).
struct StepperDivergence : Error {
    int dof_index;
    double dt;
    StepperDivergence(const std::string& what, int dof, double dt_)
        : Error("ode stepper divergence at dof " + std::to_string(dof) +
                " (dt = " + std::to_string(dt_) + " s): " + what),
          dof_index(dof), dt(dt_) {}
};

// Nonlinear PDE step failure; carries the Newton residual history.
struct StepFailure : Error {
    std::vector<double> residual_history;
    StepFailure(const std::string& what, std::vector<double> history)
        : Error("pde step failure: " + what), residual_history(std::move(history)) {}
};

struct DegenerateState : Error {
    explicit DegenerateState(const std::string& msg) : Error("degenerate state: " + msg) {}
};

struct ModeError : Error {
    explicit ModeError(const std::string& msg) : Error("mode error: " + msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config error: " + msg) {}
};

struct RestoreError : Error {
    explicit RestoreError(const std::string& msg) : Error("restore error: " + msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error("i/o error: " + msg) {}
};

} // namespace neurodiffuse

#endif
