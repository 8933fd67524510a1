#pragma once

// Binary STL (little-endian) and SVG crease-pattern output.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "oritube/geometry.hpp"
#include "oritube/mesh.hpp"

namespace oritube {

struct StlTriangle {
    std::array<float, 3> normal{};
    std::array<std::array<float, 3>, 3> v{};
};

/// Bytes taken by a binary STL with n triangles.
constexpr std::size_t stl_size(std::size_t n) { return 80 + 4 + 50 * n; }

/// Writes a binary STL. Normals follow the right-hand rule of each triangle.
/// Throws EmptyMesh, IoFailure. Returns the number of bytes written.
std::size_t export_stl(const TriMesh& mesh, std::ostream& out, const std::string& header = "oritube");
/// Quads are split along their shorter diagonal first.
std::size_t export_stl(const QuadMesh& mesh, std::ostream& out, const std::string& header = "oritube");
std::size_t export_stl(const QuadMesh& mesh, const std::filesystem::path& path);
/// Closes each boundary loop with a centroid fan before writing, so open tubes come out watertight.
std::size_t export_closed_stl(const QuadMesh& mesh, std::ostream& out, const std::string& header = "oritube");

/// Writes triangles as given, normals included. Throws EmptyMesh, IoFailure.
std::size_t write_stl(const std::vector<StlTriangle>& triangles, std::ostream& out,
                      const std::string& header = "oritube");

/// Throws IoFailure on truncated or inconsistent input.
std::vector<StlTriangle> read_stl(std::istream& in);
std::vector<StlTriangle> read_stl(const std::filesystem::path& path);

/// Welds bit-identical corners back into an indexed mesh.
TriMesh stl_to_mesh(const std::vector<StlTriangle>& triangles);

struct EdgeIncidence {
    std::size_t manifold = 0;   // edges with exactly two triangles
    std::size_t border = 0;     // edges with one triangle
    std::size_t excess = 0;     // edges with three or more
    std::size_t border_loops = 0;
    bool closed() const { return border == 0 && excess == 0; }
};

EdgeIncidence edge_incidence(const TriMesh& mesh);

/// Mountain solid, valley dashed, flat dotted, strip outlines as boundary.
/// viewBox is the pattern bounding box in mm. Throws EmptyMesh, IoFailure.
std::size_t export_svg_pattern(const CreasePattern2D& pattern, std::ostream& out);

}  // namespace oritube
