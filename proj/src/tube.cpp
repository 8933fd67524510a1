#include <cmath>
#include <sstream>

#include "oritube/detail/angles.hpp"
#include "oritube/error.hpp"
#include "oritube/geometry.hpp"

namespace oritube {

void TubeSpec::validate() const {
    if (!(alpha_deg > 0.0 && alpha_deg < 90.0)) {
        std::ostringstream msg;
        msg << "alpha must lie strictly inside (0, 90) deg, got " << alpha_deg;
        throw Error(ErrorCode::DegenerateSpec, msg.str());
    }
    if (!(unit_length > 0.0) || !std::isfinite(unit_length)) {
        throw Error(ErrorCode::DegenerateSpec, "unit_length must be positive");
    }
    if (n_units < 1) throw Error(ErrorCode::DegenerateSpec, "n_units must be >= 1");
}

const char* to_string(CreaseKind kind) {
    switch (kind) {
        case CreaseKind::Mountain: return "mountain";
        case CreaseKind::Valley: return "valley";
        case CreaseKind::Flat: return "flat";
        case CreaseKind::Boundary: return "boundary";
    }
    return "?";
}

std::array<Eigen::Vector3d, 2> zigzag_segments(const TubeSpec& spec) {
    const auto [c, s] = detail::cos_sin_deg(spec.alpha_deg);
    const double L = spec.unit_length;
    return {Eigen::Vector3d(L * s, 0.0, L * c), Eigen::Vector3d(-L * s, 0.0, L * c)};
}

TubeGeometry generate_tube(const TubeSpec& spec) {
    spec.validate();
    const EdgeGroupReport report = check_admissible(spec.cross_section);
    if (!report.admissible) {
        std::string msg = "cross-section is not admissible";
        for (const auto& v : report.violations) msg += "; " + v;
        throw Error(ErrorCode::InadmissibleSection, msg);
    }

    TubeGeometry tube;
    tube.spec = spec;
    const int n = tube.n_sides();
    const int rings = tube.n_rings();
    const auto d = zigzag_segments(spec);
    const auto& section = spec.cross_section.vertices();

    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    tube.mesh.vertices.reserve(static_cast<std::size_t>(rings) * n);
    for (int j = 0; j < rings; ++j) {
        for (int k = 0; k < n; ++k) {
            tube.mesh.vertices.push_back(Eigen::Vector3d(section[k].x(), section[k].y(), 0.0) + offset);
        }
        if (j + 1 < rings) offset += d[j % 2];
    }

    const bool ccw = spec.cross_section.signed_area() > 0.0;
    for (int j = 0; j + 1 < rings; ++j) {
        for (int k = 0; k < n; ++k) {
            const int a = tube.vertex_index(j, k);
            const int b = tube.vertex_index(j, k + 1);
            const int c = tube.vertex_index(j + 1, k + 1);
            const int e = tube.vertex_index(j + 1, k);
            if (ccw) {
                tube.mesh.faces.push_back({a, b, c, e});
            } else {
                tube.mesh.faces.push_back({a, e, c, b});
            }
        }
    }

    tube.deployed_length = spec.n_units * (d[0].z() + d[1].z());
    tube.creases = classify_creases(tube.mesh);
    return tube;
}

CreaseKind classify_edge(const QuadMesh& mesh, int a, int b, int f1, int f2, double angle_tol) {
    const Eigen::Vector3d mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    auto centroid = [&](int f) {
        Eigen::Vector3d s = Eigen::Vector3d::Zero();
        for (int v : mesh.faces[f]) s += mesh.vertices[v];
        return Eigen::Vector3d(s / 4.0);
    };
    const Eigen::Vector3d w1 = (centroid(f1) - mid).normalized();
    const Eigen::Vector3d w2 = (centroid(f2) - mid).normalized();
    // Sine of the fold angle, averaged over both sides.
    const double s = 0.5 * (face_normal(mesh, f1).dot(w2) + face_normal(mesh, f2).dot(w1));
    if (std::abs(s) <= angle_tol) return CreaseKind::Flat;
    return s < 0 ? CreaseKind::Mountain : CreaseKind::Valley;
}

std::vector<Crease> classify_creases(const QuadMesh& mesh, double angle_tol) {
    std::vector<Crease> out;
    for (const auto& [edge, faces] : edge_faces(mesh.faces)) {
        Crease c{edge.first, edge.second, CreaseKind::Boundary};
        if (faces.size() > 2) {
            std::ostringstream msg;
            msg << "edge " << edge.first << "-" << edge.second << " has " << faces.size() << " faces";
            throw Error(ErrorCode::NonUnrollable, msg.str());
        }
        if (faces.size() == 2) c.kind = classify_edge(mesh, edge.first, edge.second, faces[0], faces[1], angle_tol);
        out.push_back(c);
    }
    return out;
}

}  // namespace oritube
