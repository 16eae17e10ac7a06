#ifndef NEURODIFFUSE_SOLVE_COUPLED_SYSTEM_HPP
#define NEURODIFFUSE_SOLVE_COUPLED_SYSTEM_HPP

#include <vector>

#include "core/banded.hpp"
#include "model/state.hpp"

namespace neurodiffuse {

// Source terms and boundary traces injected by the verification harness;
// physiological runs pass none.
struct ForcingSet {
    virtual ~ForcingSet() = default;
    // Strong-form residual of the exact solution for equation eq (equations
    // are indexed like fields).
    virtual double force(int eq, double x, double t) const = 0;
    virtual bool dirichlet_field(int field) const = 0;
    virtual double dirichlet_value(int field, double x, double t) const = 0;
};

// Time-discretization weights of one nonlinear step:
//   sum_l mass_l * Mass(u_l)/dt + flux_new*F(u) + flux_old*F(u_n)
//   + pump_old*Pump(u_n) + Alg(u) - forcing = 0
struct SchemeWeights {
    double mass_new = 1.0, mass_n = -1.0, mass_nm1 = 0.0;
    double flux_new = 1.0, flux_old = 0.0;
    double pump_old = 1.0;
    double force_new = 1.0, force_old = 0.0;

    bool need_nm1() const { return mass_nm1 != 0.0; }
    bool need_old_flux() const { return flux_old != 0.0; }
};

struct StepContext {
    SchemeWeights weights;
    double dt = 0.0;
    double t_new = 0.0;
    const std::vector<double>* u_n = nullptr;
    const std::vector<double>* u_nm1 = nullptr;
    const GatingField* gates = nullptr;
    const ForcingSet* forcing = nullptr;
};

// Dirichlet-style row replacement: field dof fixed to a value.
struct RowConstraint {
    int global_dof = 0;
    double value = 0.0;
};

// Assembles the residual and analytic Jacobian of the coupled ionic
// electrodiffusion system (zero flow limit or full model with fluid
// dynamics) over the banded, vertex-interleaved layout.
class CoupledSystem {
public:
    CoupledSystem(const ModelSpec& spec, const Mesh1D& mesh, ElementPairing pairing);

    const ModelLayout& layout() const { return layout_; }
    const ModelSpec& spec() const { return *spec_; }
    int n_dofs() const { return layout_.system().n_global(); }
    int bandwidth() const { return layout_.system().bandwidth(); }
    BandedMatrix make_matrix() const;

    void assemble(const StepContext& ctx, const std::vector<double>& u,
                  std::vector<double>& residual, BandedMatrix* jac,
                  bool parallel = true) const;

    // Boundary rows for a verification run (exact-trace Dirichlet at both
    // ends for every nodal field) or the nullspace pins of a physiological
    // run (phi_R and, in the full model, p_R at the leftmost dof).
    std::vector<RowConstraint> boundary_constraints(const ForcingSet& forcing, double t) const;
    std::vector<RowConstraint> nullspace_pins(double phi_ecs_left, double pressure_left) const;

    void apply_constraints(const std::vector<RowConstraint>& rows, const std::vector<double>& u,
                           std::vector<double>& residual, BandedMatrix* jac) const;

private:
    struct CellScratch;
    void assemble_cells(const StepContext& ctx, const std::vector<double>& u,
                        int cell_begin, int cell_end, double* residual, int res_row0,
                        double* band, int band_col0, const BandedMatrix* shape) const;
    void point_kernel(const StepContext& ctx, int cell, double x,
                      const double* val, const double* grad,
                      const double* val_n, const double* grad_n, const double* val_nm1,
                      const double* gates_qp, double* A, double* B,
                      double* dAdv, double* dBdv, double* dBdg,
                      bool want_jacobian) const;

    const ModelSpec* spec_;
    ModelLayout layout_;
};

} // namespace neurodiffuse

#endif
