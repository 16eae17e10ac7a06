#include "core/fem.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace neurodiffuse {

const char* family_name(ElementFamily f) {
    switch (f) {
    case ElementFamily::P0: return "P0";
    case ElementFamily::P1c: return "P1c";
    case ElementFamily::P1dc: return "P1dc";
    case ElementFamily::P2c: return "P2c";
    }
    return "?";
}

ElementFamily family_from_name(const std::string& name) {
    if (name == "P0") return ElementFamily::P0;
    if (name == "P1c") return ElementFamily::P1c;
    if (name == "P1dc") return ElementFamily::P1dc;
    if (name == "P2c") return ElementFamily::P2c;
    throw InvalidArgument("unknown element family '" + name + "'");
}

int family_dofs_per_cell(ElementFamily f) {
    switch (f) {
    case ElementFamily::P0: return 1;
    case ElementFamily::P1c: return 2;
    case ElementFamily::P1dc: return 2;
    case ElementFamily::P2c: return 3;
    }
    return 0;
}

bool family_has_vertex_dofs(ElementFamily f) {
    return f == ElementFamily::P1c || f == ElementFamily::P2c;
}

int family_interior_dofs(ElementFamily f) {
    switch (f) {
    case ElementFamily::P0: return 1;
    case ElementFamily::P1c: return 0;
    case ElementFamily::P1dc: return 2;
    case ElementFamily::P2c: return 1;
    }
    return 0;
}

int family_degree(ElementFamily f) {
    switch (f) {
    case ElementFamily::P0: return 0;
    case ElementFamily::P1c: return 1;
    case ElementFamily::P1dc: return 1;
    case ElementFamily::P2c: return 2;
    }
    return 0;
}

void family_basis(ElementFamily f, double xi, double* values, double* derivs) {
    switch (f) {
    case ElementFamily::P0:
        values[0] = 1.0;
        derivs[0] = 0.0;
        return;
    case ElementFamily::P1c:
    case ElementFamily::P1dc:
        values[0] = 1.0 - xi;
        values[1] = xi;
        derivs[0] = -1.0;
        derivs[1] = 1.0;
        return;
    case ElementFamily::P2c:
        values[0] = (1.0 - xi) * (1.0 - 2.0 * xi);
        values[1] = xi * (2.0 * xi - 1.0);
        values[2] = 4.0 * xi * (1.0 - xi);
        derivs[0] = 4.0 * xi - 3.0;
        derivs[1] = 4.0 * xi - 1.0;
        derivs[2] = 4.0 - 8.0 * xi;
        return;
    }
}

const Quadrature& Quadrature::gauss4() {
    static const Quadrature q = [] {
        Quadrature rule;
        const double a = 0.3399810435848563;
        const double b = 0.8611363115940526;
        const double wa = 0.6521451548625461;
        const double wb = 0.3478548451374538;
        const double pts[4] = {-b, -a, a, b};
        const double wts[4] = {wb, wa, wa, wb};
        for (int i = 0; i < 4; ++i) {
            rule.points[i] = 0.5 * (pts[i] + 1.0);
            rule.weights[i] = 0.5 * wts[i];
        }
        return rule;
    }();
    return q;
}

DofMap::DofMap(const Mesh1D& mesh, ElementFamily family)
    : mesh_(&mesh), family_(family) {
    const int nc = mesh.num_cells;
    switch (family) {
    case ElementFamily::P0:
        n_dofs_ = nc;
        coords_.resize(n_dofs_);
        for (int c = 0; c < nc; ++c)
            coords_[c] = mesh.cell_mid(c);
        break;
    case ElementFamily::P1c:
        n_dofs_ = nc + 1;
        coords_ = mesh.vertices;
        break;
    case ElementFamily::P1dc:
        n_dofs_ = 2 * nc;
        coords_.resize(n_dofs_);
        for (int c = 0; c < nc; ++c) {
            coords_[2 * c] = mesh.cell_left(c);
            coords_[2 * c + 1] = mesh.cell_right(c);
        }
        break;
    case ElementFamily::P2c:
        // Vertices first, then cell midpoints.
        n_dofs_ = 2 * nc + 1;
        coords_.resize(n_dofs_);
        for (int v = 0; v <= nc; ++v)
            coords_[v] = mesh.vertices[v];
        for (int c = 0; c < nc; ++c)
            coords_[nc + 1 + c] = mesh.cell_mid(c);
        break;
    }
}

void DofMap::cell_dofs(int cell, int* out) const {
    switch (family_) {
    case ElementFamily::P0:
        out[0] = cell;
        return;
    case ElementFamily::P1c:
        out[0] = cell;
        out[1] = cell + 1;
        return;
    case ElementFamily::P1dc:
        out[0] = 2 * cell;
        out[1] = 2 * cell + 1;
        return;
    case ElementFamily::P2c:
        out[0] = cell;
        out[1] = cell + 1;
        out[2] = mesh_->num_cells + 1 + cell;
        return;
    }
}

bool DofMap::operator==(const DofMap& other) const {
    return family_ == other.family_ && n_dofs_ == other.n_dofs_ &&
           mesh_->num_cells == other.mesh_->num_cells &&
           mesh_->length == other.mesh_->length;
}

FieldVector interpolate(const DofMap& map, const std::function<double(double)>& f) {
    FieldVector u(map);
    if (map.family() == ElementFamily::P0) {
        // P0 dofs are cell midpoint samples.
        for (int i = 0; i < map.n_dofs(); ++i)
            u[i] = f(map.dof_coord(i));
        return u;
    }
    for (int i = 0; i < map.n_dofs(); ++i)
        u[i] = f(map.dof_coord(i));
    return u;
}

namespace {
int locate_cell(const Mesh1D& mesh, double x) {
    const double h = mesh.h();
    int c = static_cast<int>(std::floor(x / h));
    return std::clamp(c, 0, mesh.num_cells - 1);
}
} // namespace

double eval_field(const FieldVector& u, double x) {
    const DofMap& map = *u.dofmap;
    const Mesh1D& mesh = map.mesh();
    const int c = locate_cell(mesh, x);
    const double xi = (x - mesh.cell_left(c)) / mesh.h();
    const int nd = map.dofs_per_cell();
    int dofs[3];
    double n[3], dn[3];
    map.cell_dofs(c, dofs);
    family_basis(map.family(), xi, n, dn);
    double v = 0.0;
    for (int i = 0; i < nd; ++i)
        v += n[i] * u[dofs[i]];
    return v;
}

double eval_field_deriv(const FieldVector& u, double x) {
    const DofMap& map = *u.dofmap;
    const Mesh1D& mesh = map.mesh();
    const int c = locate_cell(mesh, x);
    const double xi = (x - mesh.cell_left(c)) / mesh.h();
    const int nd = map.dofs_per_cell();
    int dofs[3];
    double n[3], dn[3];
    map.cell_dofs(c, dofs);
    family_basis(map.family(), xi, n, dn);
    double v = 0.0;
    for (int i = 0; i < nd; ++i)
        v += dn[i] / mesh.h() * u[dofs[i]];
    return v;
}

double integrate_field(const FieldVector& u) {
    const DofMap& map = *u.dofmap;
    const Mesh1D& mesh = map.mesh();
    const Quadrature& quad = Quadrature::gauss4();
    const int nd = map.dofs_per_cell();
    double total = 0.0;
    int dofs[3];
    double n[3], dn[3];
    for (int c = 0; c < mesh.num_cells; ++c) {
        map.cell_dofs(c, dofs);
        double acc = 0.0;
        for (int q = 0; q < Quadrature::n_points; ++q) {
            family_basis(map.family(), quad.points[q], n, dn);
            double v = 0.0;
            for (int i = 0; i < nd; ++i)
                v += n[i] * u[dofs[i]];
            acc += quad.weights[q] * v;
        }
        total += acc * mesh.h();
    }
    return total;
}

ErrorNorms error_norms(const FieldVector& numeric,
                       const std::function<double(double)>& exact,
                       const std::function<double(double)>& exact_dx) {
    const DofMap& map = *numeric.dofmap;
    const Mesh1D& mesh = map.mesh();
    const Quadrature& quad = Quadrature::gauss4();
    const int nd = map.dofs_per_cell();
    const double h = mesh.h();
    double l2sq = 0.0;
    double h1semisq = 0.0;
    int dofs[3];
    double n[3], dn[3];
    for (int c = 0; c < mesh.num_cells; ++c) {
        map.cell_dofs(c, dofs);
        for (int q = 0; q < Quadrature::n_points; ++q) {
            family_basis(map.family(), quad.points[q], n, dn);
            const double x = mesh.cell_left(c) + quad.points[q] * h;
            double v = 0.0, dv = 0.0;
            for (int i = 0; i < nd; ++i) {
                v += n[i] * numeric[dofs[i]];
                dv += dn[i] / h * numeric[dofs[i]];
            }
            const double ev = v - exact(x);
            const double edv = dv - exact_dx(x);
            l2sq += quad.weights[q] * h * ev * ev;
            h1semisq += quad.weights[q] * h * edv * edv;
        }
    }
    ErrorNorms out;
    out.l2 = std::sqrt(l2sq);
    out.h1 = std::sqrt(l2sq + h1semisq);
    return out;
}

SystemLayout::SystemLayout(const Mesh1D& mesh, std::vector<Field> fields)
    : mesh_(&mesh), fields_(std::move(fields)) {
    const int nf = n_fields();
    dofmaps_.reserve(nf);
    field_to_global_.resize(nf);
    local_offset_.resize(nf + 1, 0);
    for (int f = 0; f < nf; ++f) {
        dofmaps_.emplace_back(mesh, fields_[f].family);
        field_to_global_[f].assign(dofmaps_[f].n_dofs(), -1);
        local_offset_[f + 1] = local_offset_[f] + dofmaps_[f].dofs_per_cell();
    }
    local_size_ = local_offset_[nf];

    // Interleave: vertex 0 dofs, cell 0 interior dofs, vertex 1 dofs, ...
    int next = 0;
    const int nc = mesh.num_cells;
    for (int v = 0; v <= nc; ++v) {
        for (int f = 0; f < nf; ++f) {
            if (!family_has_vertex_dofs(fields_[f].family))
                continue;
            field_to_global_[f][v] = next++;
        }
        if (v == nc)
            break;
        for (int f = 0; f < nf; ++f) {
            switch (fields_[f].family) {
            case ElementFamily::P0:
                field_to_global_[f][v] = next++;
                break;
            case ElementFamily::P1dc:
                field_to_global_[f][2 * v] = next++;
                field_to_global_[f][2 * v + 1] = next++;
                break;
            case ElementFamily::P2c:
                field_to_global_[f][nc + 1 + v] = next++;
                break;
            case ElementFamily::P1c:
                break;
            }
        }
    }
    n_global_ = next;

    bandwidth_ = 0;
    std::vector<int> cell(local_size_);
    for (int c = 0; c < nc; ++c) {
        cell_global_dofs(c, cell.data());
        int lo = n_global_, hi = -1;
        for (int i = 0; i < local_size_; ++i) {
            lo = std::min(lo, cell[i]);
            hi = std::max(hi, cell[i]);
        }
        bandwidth_ = std::max(bandwidth_, hi - lo);
    }
}

void SystemLayout::cell_global_dofs(int cell, int* out) const {
    int pos = 0;
    int local[3];
    for (int f = 0; f < n_fields(); ++f) {
        const DofMap& map = dofmaps_[f];
        map.cell_dofs(cell, local);
        for (int i = 0; i < map.dofs_per_cell(); ++i)
            out[pos++] = field_to_global_[f][local[i]];
    }
}

int SystemLayout::field_of_name(const std::string& name) const {
    for (int f = 0; f < n_fields(); ++f)
        if (fields_[f].name == name)
            return f;
    throw InvalidArgument("no field named '" + name + "'");
}

std::vector<double> SystemLayout::extract(int f, const std::vector<double>& flat) const {
    const auto& idx = field_to_global_[f];
    std::vector<double> out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i)
        out[i] = flat[idx[i]];
    return out;
}

void SystemLayout::insert(int f, const std::vector<double>& values, std::vector<double>& flat) const {
    const auto& idx = field_to_global_[f];
    for (size_t i = 0; i < idx.size(); ++i)
        flat[idx[i]] = values[i];
}

} // namespace neurodiffuse
