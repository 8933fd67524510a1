#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oritube {

struct QuadMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 4>> faces;
};

struct TriMesh {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 3>> triangles;
};

using EdgeKey = std::pair<int, int>;

inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// Undirected edge -> incident faces, for faces given as index cycles.
template <std::size_t N>
std::map<EdgeKey, std::vector<int>> edge_faces(const std::vector<std::array<int, N>>& faces) {
    std::map<EdgeKey, std::vector<int>> out;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
        for (std::size_t i = 0; i < N; ++i) {
            out[edge_key(faces[f][i], faces[f][(i + 1) % N])].push_back(f);
        }
    }
    return out;
}

/// Splits every quad along its shorter diagonal (0-2 on ties), keeping winding.
TriMesh triangulate(const QuadMesh& mesh);

/// Distance of the fourth corner from the plane of the first three (mm).
double planarity_residual(const QuadMesh& mesh, int face);

Eigen::Vector3d face_normal(const QuadMesh& mesh, int face);
double face_area(const QuadMesh& mesh, int face);

/// Signed volume enclosed by a closed, outward-oriented triangle mesh.
double signed_volume(const TriMesh& mesh);

/// Edges whose incidence is not exactly two, as (edge, count).
std::vector<std::pair<EdgeKey, int>> non_manifold_edges(const TriMesh& mesh);

/// Directed border half-edges (no opposite half-edge), grouped by connected loop.
std::vector<std::vector<std::pair<int, int>>> boundary_loops(const TriMesh& mesh);

/// Closes every boundary loop with a fan from the centroid of its vertices,
/// wound against the loop so orientation stays consistent. No geometric checks.
TriMesh fan_boundary_loops(const TriMesh& mesh);

}  // namespace oritube
