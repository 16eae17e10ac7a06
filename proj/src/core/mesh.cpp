#include "core/mesh.hpp"

#include "core/errors.hpp"

namespace neurodiffuse {

Mesh1D build_mesh(double length, int num_cells) {
    if (!(length > 0.0))
        throw InvalidArgument("mesh length must be positive");
    if (num_cells < 1)
        throw InvalidArgument("mesh must have at least one cell");
    Mesh1D mesh;
    mesh.length = length;
    mesh.num_cells = num_cells;
    mesh.vertices.resize(num_cells + 1);
    for (int i = 0; i <= num_cells; ++i)
        mesh.vertices[i] = length * static_cast<double>(i) / num_cells;
    mesh.vertices.back() = length;
    return mesh;
}

} // namespace neurodiffuse
