#ifndef NEURODIFFUSE_MODEL_STATE_HPP
#define NEURODIFFUSE_MODEL_STATE_HPP

#include <memory>
#include <string>
#include <vector>

#include "core/fem.hpp"
#include "model/model_spec.hpp"

namespace neurodiffuse {

// Element pairing for the coupled system.
enum class ElementPairing {
    P0P1,    // zero flow: P0 volume fractions, P1c concentrations/potentials
    P1dcP2,  // zero flow, higher order: P1dc volume fractions, P2c scalars
    FullP1,  // full model: P1c everything (pressure included)
};

const char* pairing_name(ElementPairing p);
ElementPairing pairing_from_name(const std::string& name);

// Field bookkeeping for one model on one mesh: which scalar fields exist,
// their families, and their position in the interleaved coupled vector.
class ModelLayout {
public:
    ModelLayout(const ModelSpec& spec, const Mesh1D& mesh, ElementPairing pairing);

    const ModelSpec& spec() const { return *spec_; }
    const Mesh1D& mesh() const { return system_->mesh(); }
    const SystemLayout& system() const { return *system_; }
    ElementPairing pairing() const { return pairing_; }

    int n_fields() const { return system_->n_fields(); }
    int conc_field(int r, int k) const { return conc0_ + r * spec_->n_ions() + k; }
    int phi_field(int r) const { return phi0_ + r; }
    int alpha_field(int r) const { return alpha0_ + r; } // r < R-1
    int pressure_field() const { return pressure_; }     // -1 in zero flow
    bool has_pressure() const { return pressure_ >= 0; }

    ElementFamily alpha_family() const { return alpha_family_; }
    ElementFamily scalar_family() const { return scalar_family_; }
    // Dofmap shared by concentrations and potentials (gating lives here too).
    const DofMap& scalar_dofmap() const { return system_->dofmap(phi0_); }
    const DofMap& alpha_dofmap() const { return system_->dofmap(alpha0_); }

    FieldVector extract(int field, const std::vector<double>& flat) const;

private:
    const ModelSpec* spec_;
    ElementPairing pairing_;
    std::unique_ptr<SystemLayout> system_;
    ElementFamily alpha_family_, scalar_family_;
    int conc0_ = 0, phi0_ = 0, alpha0_ = 0, pressure_ = -1;
};

// All unknown fields at one time level, in the layout's interleaved order.
struct TissueState {
    std::vector<double> u;
    double t = 0.0;
};

TissueState make_uniform_state(const ModelLayout& layout, const UniformInit& init);

// Pointwise gating variables on the scalar dofmap.
struct GatingField {
    const DofMap* dofmap = nullptr;
    int n_gates = 0;
    std::vector<double> values; // dof-major: values[dof * n_gates + g]

    GatingField() = default;
    GatingField(const DofMap& map, int gates)
        : dofmap(&map), n_gates(gates), values(static_cast<std::size_t>(map.n_dofs()) * gates, 0.0) {}

    int n_dofs() const { return dofmap ? dofmap->n_dofs() : 0; }
    double* at(int dof) { return values.data() + static_cast<std::size_t>(dof) * n_gates; }
    const double* at(int dof) const { return values.data() + static_cast<std::size_t>(dof) * n_gates; }
};

// Weak (assembled) electroneutrality residuals, one vector per compartment
// plus the summed ECS counterpart, in the spec's unscaled form.
std::vector<std::vector<double>> electroneutrality_weak_residual(const ModelLayout& layout,
                                                                 const TissueState& state);

// Pointwise residual of compartment r's electroneutrality relation at x.
double electroneutrality_pointwise(const ModelLayout& layout, const TissueState& state,
                                   int r, double x);

} // namespace neurodiffuse

#endif
