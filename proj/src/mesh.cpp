#include "oritube/mesh.hpp"

#include <numeric>
#include <set>

#include <Eigen/Geometry>

namespace oritube {

TriMesh triangulate(const QuadMesh& mesh) {
    TriMesh out;
    out.vertices = mesh.vertices;
    out.triangles.reserve(mesh.faces.size() * 2);
    for (const auto& q : mesh.faces) {
        const auto& v = mesh.vertices;
        const double d02 = (v[q[2]] - v[q[0]]).squaredNorm();
        const double d13 = (v[q[3]] - v[q[1]]).squaredNorm();
        if (d13 < d02) {
            out.triangles.push_back({q[0], q[1], q[3]});
            out.triangles.push_back({q[1], q[2], q[3]});
        } else {
            out.triangles.push_back({q[0], q[1], q[2]});
            out.triangles.push_back({q[0], q[2], q[3]});
        }
    }
    return out;
}

double planarity_residual(const QuadMesh& mesh, int face) {
    const auto& q = mesh.faces[face];
    const auto& v = mesh.vertices;
    const Eigen::Vector3d n = (v[q[1]] - v[q[0]]).cross(v[q[2]] - v[q[0]]);
    const double len = n.norm();
    if (len == 0.0) return 0.0;
    return std::abs(n.dot(v[q[3]] - v[q[0]])) / len;
}

Eigen::Vector3d face_normal(const QuadMesh& mesh, int face) {
    const auto& q = mesh.faces[face];
    const auto& v = mesh.vertices;
    // Diagonal cross product: exact for planar quads and symmetric in the corners.
    const Eigen::Vector3d n = (v[q[2]] - v[q[0]]).cross(v[q[3]] - v[q[1]]);
    const double len = n.norm();
    return len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d::Zero();
}

double face_area(const QuadMesh& mesh, int face) {
    const auto& q = mesh.faces[face];
    const auto& v = mesh.vertices;
    return 0.5 * (v[q[2]] - v[q[0]]).cross(v[q[3]] - v[q[1]]).norm();
}

double signed_volume(const TriMesh& mesh) {
    double six_v = 0.0;
    for (const auto& t : mesh.triangles) {
        const auto& a = mesh.vertices[t[0]];
        const auto& b = mesh.vertices[t[1]];
        const auto& c = mesh.vertices[t[2]];
        six_v += a.dot(b.cross(c));
    }
    return six_v / 6.0;
}

std::vector<std::pair<EdgeKey, int>> non_manifold_edges(const TriMesh& mesh) {
    std::vector<std::pair<EdgeKey, int>> out;
    for (const auto& [edge, faces] : edge_faces(mesh.triangles)) {
        if (faces.size() != 2) out.emplace_back(edge, static_cast<int>(faces.size()));
    }
    return out;
}

std::vector<std::vector<std::pair<int, int>>> boundary_loops(const TriMesh& mesh) {
    std::set<std::pair<int, int>> half;
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) half.insert({t[i], t[(i + 1) % 3]});
    }
    std::vector<std::pair<int, int>> border;
    for (const auto& [a, b] : half) {
        if (!half.count({b, a})) border.emplace_back(a, b);
    }
    std::vector<int> parent(mesh.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [a, b] : border) parent[root(a)] = root(b);
    std::map<int, std::vector<std::pair<int, int>>> loops;
    for (const auto& e : border) loops[root(e.first)].push_back(e);
    std::vector<std::vector<std::pair<int, int>>> out;
    for (auto& [r, edges] : loops) out.push_back(std::move(edges));
    return out;
}

TriMesh fan_boundary_loops(const TriMesh& mesh) {
    TriMesh out = mesh;
    for (const auto& edges : boundary_loops(mesh)) {
        std::set<int> members;
        for (const auto& [a, b] : edges) {
            members.insert(a);
            members.insert(b);
        }
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (int v : members) c += mesh.vertices[v];
        c /= static_cast<double>(members.size());
        const int ci = static_cast<int>(out.vertices.size());
        out.vertices.push_back(c);
        for (const auto& [a, b] : edges) out.triangles.push_back({ci, b, a});
    }
    return out;
}

}  // namespace oritube
