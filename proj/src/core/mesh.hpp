#ifndef NEURODIFFUSE_CORE_MESH_HPP
#define NEURODIFFUSE_CORE_MESH_HPP

#include <vector>

namespace neurodiffuse {

// Uniform 1D mesh on [0, length].
struct Mesh1D {
    double length = 0.0;
    int num_cells = 0;
    std::vector<double> vertices; // num_cells + 1, strictly increasing

    double h() const { return length / num_cells; }
    double cell_left(int c) const { return vertices[c]; }
    double cell_right(int c) const { return vertices[c + 1]; }
    double cell_mid(int c) const { return 0.5 * (vertices[c] + vertices[c + 1]); }
};

Mesh1D build_mesh(double length, int num_cells);

} // namespace neurodiffuse

#endif
