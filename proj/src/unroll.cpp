#include <algorithm>
#include <cmath>
#include <map>
#include <limits>

#include "oritube/error.hpp"
#include "oritube/geometry.hpp"

namespace oritube {

std::size_t CreasePattern2D::interior_crease_count() const {
    std::map<EdgeKey, int> uses;
    for (const auto& c : cells) {
        for (int i = 0; i < 4; ++i) ++uses[edge_key(c[i], c[(i + 1) % 4])];
    }
    std::size_t n = 0;
    for (const auto& [e, count] : uses) n += count == 2;
    return n;
}

Eigen::AlignedBox2d CreasePattern2D::bounding_box() const {
    Eigen::AlignedBox2d box;
    for (const auto& v : vertices) box.extend(v);
    return box;
}

CreasePattern2D unroll_crease_pattern(const TubeGeometry& tube, double strip_gap) {
    const int n = tube.n_sides();
    const int rings = tube.n_rings();
    if (tube.mesh.faces.size() != static_cast<std::size_t>(n) * (rings - 1) ||
        tube.mesh.vertices.size() != static_cast<std::size_t>(n) * rings) {
        throw Error(ErrorCode::NonUnrollable, "mesh does not match the ring layout of its spec");
    }
    if (!(strip_gap >= 0.0)) throw Error(ErrorCode::InvalidArgument, "strip gap must be non-negative");

    std::map<EdgeKey, CreaseKind> kind;
    for (const auto& c : classify_creases(tube.mesh)) kind[edge_key(c.a, c.b)] = c.kind;
    auto kind_of = [&](int a, int b) {
        auto it = kind.find(edge_key(a, b));
        if (it == kind.end()) throw Error(ErrorCode::NonUnrollable, "pattern edge missing from the mesh");
        return it->second;
    };

    CreasePattern2D out;
    out.strip_gap = strip_gap;
    const auto& V = tube.mesh.vertices;
    double cursor = 0.0;

    for (int k = 0; k < n; ++k) {
        const int kn = (k + 1) % n;
        const Eigen::Vector3d e = V[tube.vertex_index(0, kn)] - V[tube.vertex_index(0, k)];
        const double width = e.norm();

        // Left column of the strip; the right column is offset by (width, 0).
        std::vector<Eigen::Vector2d> left(rings);
        left[0] = Eigen::Vector2d::Zero();
        for (int j = 1; j < rings; ++j) {
            const Eigen::Vector3d d = V[tube.vertex_index(j, k)] - V[tube.vertex_index(j - 1, k)];
            const double len = d.norm();
            const double c = std::clamp(e.dot(d) / (width * len), -1.0, 1.0);
            left[j] = left[j - 1] + len * Eigen::Vector2d(c, std::sqrt(1.0 - c * c));
        }
        double min_x = std::numeric_limits<double>::infinity();
        double max_x = -min_x;
        for (const auto& p : left) {
            min_x = std::min(min_x, p.x());
            max_x = std::max(max_x, p.x() + width);
        }
        const Eigen::Vector2d shift(cursor - min_x, 0.0);
        cursor += (max_x - min_x) + strip_gap;

        const int base = static_cast<int>(out.vertices.size());
        for (int j = 0; j < rings; ++j) {
            out.vertices.push_back(left[j] + shift);
            out.source_vertex.push_back(tube.vertex_index(j, k));
            out.vertices.push_back(left[j] + shift + Eigen::Vector2d(width, 0.0));
            out.source_vertex.push_back(tube.vertex_index(j, kn));
        }
        auto lv = [&](int j) { return base + 2 * j; };
        auto rv = [&](int j) { return base + 2 * j + 1; };
        for (int j = 0; j + 1 < rings; ++j) {
            out.cells.push_back({lv(j), rv(j), rv(j + 1), lv(j + 1)});
            out.source_face.push_back(tube.face_index(j, k));
        }
        out.strip_base_width.push_back(width);

        for (int j = 0; j < rings; ++j) {
            const bool outline = j == 0 || j == rings - 1;
            out.edges.push_back({lv(j), rv(j),
                                 kind_of(tube.vertex_index(j, k), tube.vertex_index(j, kn)), outline});
        }
        for (int j = 0; j + 1 < rings; ++j) {
            out.edges.push_back(
                {lv(j), lv(j + 1), kind_of(tube.vertex_index(j, k), tube.vertex_index(j + 1, k)), true});
            out.edges.push_back(
                {rv(j), rv(j + 1), kind_of(tube.vertex_index(j, kn), tube.vertex_index(j + 1, kn)), true});
        }
    }
    return out;
}

}  // namespace oritube
