#include "model/state.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace neurodiffuse {

const char* pairing_name(ElementPairing p) {
    switch (p) {
    case ElementPairing::P0P1: return "p0p1";
    case ElementPairing::P1dcP2: return "p1dcp2";
    case ElementPairing::FullP1: return "p1p1";
    }
    return "?";
}

ElementPairing pairing_from_name(const std::string& name) {
    if (name == "p0p1") return ElementPairing::P0P1;
    if (name == "p1dcp2") return ElementPairing::P1dcP2;
    if (name == "p1p1") return ElementPairing::FullP1;
    throw InvalidArgument("unknown element pairing '" + name + "'");
}

ModelLayout::ModelLayout(const ModelSpec& spec, const Mesh1D& mesh, ElementPairing pairing)
    : spec_(&spec), pairing_(pairing) {
    switch (pairing) {
    case ElementPairing::P0P1:
        alpha_family_ = ElementFamily::P0;
        scalar_family_ = ElementFamily::P1c;
        break;
    case ElementPairing::P1dcP2:
        alpha_family_ = ElementFamily::P1dc;
        scalar_family_ = ElementFamily::P2c;
        break;
    case ElementPairing::FullP1:
        alpha_family_ = ElementFamily::P1c;
        scalar_family_ = ElementFamily::P1c;
        break;
    }
    if (!spec.zero_flow && pairing != ElementPairing::FullP1)
        throw ConfigError("the full model requires the p1p1 element pairing");

    const int R = spec.n_comps();
    const int K = spec.n_ions();
    std::vector<SystemLayout::Field> fields;
    conc0_ = 0;
    for (int r = 0; r < R; ++r)
        for (int k = 0; k < K; ++k)
            fields.push_back({"c_" + spec.compartments[r].label + "_" + spec.ions[k].name,
                              scalar_family_});
    phi0_ = static_cast<int>(fields.size());
    for (int r = 0; r < R; ++r)
        fields.push_back({"phi_" + spec.compartments[r].label, scalar_family_});
    alpha0_ = static_cast<int>(fields.size());
    for (int r = 0; r < R - 1; ++r)
        fields.push_back({"alpha_" + spec.compartments[r].label, alpha_family_});
    if (!spec.zero_flow) {
        pressure_ = static_cast<int>(fields.size());
        fields.push_back({"p_" + spec.compartments[R - 1].label, scalar_family_});
    }
    system_ = std::make_unique<SystemLayout>(mesh, std::move(fields));
}

FieldVector ModelLayout::extract(int field, const std::vector<double>& flat) const {
    FieldVector out(system_->dofmap(field));
    out.values = system_->extract(field, flat);
    return out;
}

TissueState make_uniform_state(const ModelLayout& layout, const UniformInit& init) {
    const ModelSpec& spec = layout.spec();
    TissueState state;
    state.u.assign(layout.system().n_global(), 0.0);
    state.t = 0.0;
    auto fill = [&](int field, double value) {
        std::vector<double> v(layout.system().dofmap(field).n_dofs(), value);
        layout.system().insert(field, v, state.u);
    };
    for (int r = 0; r < spec.n_comps(); ++r) {
        for (int k = 0; k < spec.n_ions(); ++k)
            fill(layout.conc_field(r, k), init.conc[r][k]);
        fill(layout.phi_field(r), init.phi[r]);
    }
    for (int r = 0; r < spec.n_comps() - 1; ++r)
        fill(layout.alpha_field(r), init.alpha[r]);
    if (layout.has_pressure())
        fill(layout.pressure_field(), init.pressure);
    return state;
}

std::vector<std::vector<double>> electroneutrality_weak_residual(const ModelLayout& layout,
                                                                 const TissueState& state) {
    const ModelSpec& spec = layout.spec();
    const Mesh1D& mesh = layout.mesh();
    const Quadrature& quad = Quadrature::gauss4();
    const double F = spec.constants.faraday;
    const int R = spec.n_comps();
    const int ecs = spec.ecs();
    const DofMap& smap = layout.scalar_dofmap();
    const DofMap& amap = layout.alpha_dofmap();

    std::vector<std::vector<double>> out(R, std::vector<double>(smap.n_dofs(), 0.0));

    const int snd = smap.dofs_per_cell();
    const int and_ = amap.dofs_per_cell();
    int sdofs[3], adofs[3];
    double sn[3], sdn[3], an[3], adn[3];
    const double h = mesh.h();

    for (int c = 0; c < mesh.num_cells; ++c) {
        smap.cell_dofs(c, sdofs);
        amap.cell_dofs(c, adofs);
        for (int q = 0; q < Quadrature::n_points; ++q) {
            family_basis(layout.scalar_family(), quad.points[q], sn, sdn);
            family_basis(layout.alpha_family(), quad.points[q], an, adn);
            const double w = quad.weights[q] * h;

            auto field_at = [&](int f) {
                double v = 0.0;
                for (int i = 0; i < snd; ++i)
                    v += sn[i] * state.u[layout.system().global_index(f, sdofs[i])];
                return v;
            };
            auto alpha_at = [&](int r) {
                double v = 0.0;
                for (int i = 0; i < and_; ++i)
                    v += an[i] * state.u[layout.system().global_index(layout.alpha_field(r), adofs[i])];
                return v;
            };

            const double phi_e = field_at(layout.phi_field(ecs));
            double alpha_e = 1.0;
            double membrane_sum = 0.0;
            for (int r = 0; r < R - 1; ++r) {
                const CompartmentParams& cp = spec.compartments[r];
                const double alpha_r = alpha_at(r);
                alpha_e -= alpha_r;
                double charge = 0.0;
                for (int k = 0; k < spec.n_ions(); ++k)
                    charge += spec.ions[k].valence * field_at(layout.conc_field(r, k));
                const double phi_rR = field_at(layout.phi_field(r)) - phi_e;
                const double lhs = cp.gamma * cp.capacitance * phi_rR;
                const double res = lhs - cp.immobile_valence * F * cp.immobile - alpha_r * F * charge;
                membrane_sum += lhs;
                for (int i = 0; i < snd; ++i)
                    out[r][sdofs[i]] += w * sn[i] * res;
            }
            const CompartmentParams& ce = spec.compartments[ecs];
            double charge_e = 0.0;
            for (int k = 0; k < spec.n_ions(); ++k)
                charge_e += spec.ions[k].valence * field_at(layout.conc_field(ecs, k));
            const double res_e =
                -membrane_sum - ce.immobile_valence * F * ce.immobile - alpha_e * F * charge_e;
            for (int i = 0; i < snd; ++i)
                out[ecs][sdofs[i]] += w * sn[i] * res_e;
        }
    }
    return out;
}

double electroneutrality_pointwise(const ModelLayout& layout, const TissueState& state,
                                   int r, double x) {
    const ModelSpec& spec = layout.spec();
    const double F = spec.constants.faraday;
    const int ecs = spec.ecs();

    auto value = [&](int f) {
        FieldVector v = layout.extract(f, state.u);
        return eval_field(v, x);
    };

    const double phi_e = value(layout.phi_field(ecs));
    if (r < ecs) {
        const CompartmentParams& cp = spec.compartments[r];
        double charge = 0.0;
        for (int k = 0; k < spec.n_ions(); ++k)
            charge += spec.ions[k].valence * value(layout.conc_field(r, k));
        const double alpha_r = value(layout.alpha_field(r));
        const double phi_rR = value(layout.phi_field(r)) - phi_e;
        return cp.gamma * cp.capacitance * phi_rR - cp.immobile_valence * F * cp.immobile -
               alpha_r * F * charge;
    }
    const CompartmentParams& ce = spec.compartments[ecs];
    double membrane_sum = 0.0;
    double alpha_e = 1.0;
    for (int rr = 0; rr < ecs; ++rr) {
        const CompartmentParams& cp = spec.compartments[rr];
        membrane_sum += cp.gamma * cp.capacitance * (value(layout.phi_field(rr)) - phi_e);
        alpha_e -= value(layout.alpha_field(rr));
    }
    double charge_e = 0.0;
    for (int k = 0; k < spec.n_ions(); ++k)
        charge_e += spec.ions[k].valence * value(layout.conc_field(ecs, k));
    return -membrane_sum - ce.immobile_valence * F * ce.immobile - alpha_e * F * charge_e;
}

} // namespace neurodiffuse
