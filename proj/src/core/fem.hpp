#ifndef NEURODIFFUSE_CORE_FEM_HPP
#define NEURODIFFUSE_CORE_FEM_HPP

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "core/mesh.hpp"

namespace neurodiffuse {

enum class ElementFamily { P0, P1c, P1dc, P2c };

const char* family_name(ElementFamily f);
ElementFamily family_from_name(const std::string& name);

// Dofs a family carries on one cell, and how many of those sit at the
// cell's two vertices (shared with neighbours for the continuous families).
int family_dofs_per_cell(ElementFamily f);
bool family_has_vertex_dofs(ElementFamily f);
int family_interior_dofs(ElementFamily f);
int family_degree(ElementFamily f);

// Reference basis on [0,1]; values and reference derivatives for the
// cell-local dofs in a fixed order (P1c/P1dc: left, right; P2c: left,
// right, midpoint; P0: single).
void family_basis(ElementFamily f, double xi, double* values, double* derivs);

// 4-point Gauss-Legendre rule on [0,1], exact through degree 7. One rule
// everywhere keeps mixed P0/P1c/P2c forms on a common set of points.
struct Quadrature {
    static constexpr int n_points = 4;
    std::array<double, n_points> points;
    std::array<double, n_points> weights;
    static const Quadrature& gauss4();
};

// Dof numbering for a single scalar field on a mesh.
class DofMap {
public:
    DofMap() = default;
    DofMap(const Mesh1D& mesh, ElementFamily family);

    const Mesh1D& mesh() const { return *mesh_; }
    ElementFamily family() const { return family_; }
    int n_dofs() const { return n_dofs_; }
    int dofs_per_cell() const { return family_dofs_per_cell(family_); }
    // Cell-local ordering matches family_basis.
    void cell_dofs(int cell, int* out) const;
    double dof_coord(int dof) const { return coords_[dof]; }
    const std::vector<double>& coords() const { return coords_; }

    bool operator==(const DofMap& other) const;

private:
    const Mesh1D* mesh_ = nullptr;
    ElementFamily family_ = ElementFamily::P1c;
    int n_dofs_ = 0;
    std::vector<double> coords_;
};

struct FieldVector {
    const DofMap* dofmap = nullptr;
    std::vector<double> values;

    FieldVector() = default;
    explicit FieldVector(const DofMap& map)
        : dofmap(&map), values(map.n_dofs(), 0.0) {}

    int size() const { return static_cast<int>(values.size()); }
    double& operator[](int i) { return values[i]; }
    double operator[](int i) const { return values[i]; }
};

// Nodal interpolant of f.
FieldVector interpolate(const DofMap& map, const std::function<double(double)>& f);

// Value / spatial derivative of a field at x (x clamped to the domain).
double eval_field(const FieldVector& u, double x);
double eval_field_deriv(const FieldVector& u, double x);

// \int u dx over the domain by the 4-point rule.
double integrate_field(const FieldVector& u);

struct ErrorNorms {
    double l2 = 0.0;
    double h1 = 0.0;
};

// L2 and H1 errors against an exact solution; quadrature order exceeds
// 2*degree+2 for every family in use.
ErrorNorms error_norms(const FieldVector& numeric,
                       const std::function<double(double)>& exact,
                       const std::function<double(double)>& exact_dx);

// Interleaved-by-vertex numbering for a coupled multi-field system: all
// fields with a dof at a vertex are adjacent, cell-interior dofs sit
// between the cells' vertices. Keeps the coupled bandwidth O(#fields).
class SystemLayout {
public:
    struct Field {
        std::string name;
        ElementFamily family;
    };

    SystemLayout() = default;
    SystemLayout(const Mesh1D& mesh, std::vector<Field> fields);

    const Mesh1D& mesh() const { return *mesh_; }
    int n_fields() const { return static_cast<int>(fields_.size()); }
    const Field& field(int f) const { return fields_[f]; }
    const DofMap& dofmap(int f) const { return dofmaps_[f]; }
    int n_global() const { return n_global_; }
    int global_index(int f, int field_dof) const { return field_to_global_[f][field_dof]; }

    // Flat per-cell dof list, field-major (field 0's cell dofs, then
    // field 1's, ...). Global indices into the coupled vector.
    int local_size() const { return local_size_; }
    void cell_global_dofs(int cell, int* out) const;
    int field_local_offset(int f) const { return local_offset_[f]; }

    int bandwidth() const { return bandwidth_; }
    int field_of_name(const std::string& name) const;

    std::vector<double> extract(int f, const std::vector<double>& flat) const;
    void insert(int f, const std::vector<double>& values, std::vector<double>& flat) const;

private:
    const Mesh1D* mesh_ = nullptr;
    std::vector<Field> fields_;
    std::vector<DofMap> dofmaps_;
    std::vector<std::vector<int>> field_to_global_;
    std::vector<int> local_offset_;
    int local_size_ = 0;
    int n_global_ = 0;
    int bandwidth_ = 0;
};

} // namespace neurodiffuse

#endif
