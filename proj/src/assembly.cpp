#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "oritube/error.hpp"
#include "oritube/geometry.hpp"

namespace oritube {
namespace {

using Cell = std::tuple<long long, long long, long long>;

Cell cell_of(const Eigen::Vector3d& p, double h) {
    return {static_cast<long long>(std::floor(p.x() / h)), static_cast<long long>(std::floor(p.y() / h)),
            static_cast<long long>(std::floor(p.z() / h))};
}

bool has_flat_wall(const CrossSection& cs, double y, double tol) {
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const auto& a = cs.vertices()[i];
        const auto& b = cs.vertices()[(i + 1) % cs.size()];
        if (std::abs(a.y() - y) <= tol && std::abs(b.y() - y) <= tol) return true;
    }
    return false;
}

}  // namespace

const char* to_string(Channel channel) {
    return channel == Channel::Direction1 ? "direction-1" : "direction-2";
}

void AssemblySpec::validate() const {
    tube.validate();
    if (n_vertical < 1) throw Error(ErrorCode::DegenerateSpec, "n_vertical must be >= 1");
    if (n_horizontal < 0) throw Error(ErrorCode::DegenerateSpec, "n_horizontal must be >= 0");
    for (int p : pattern) {
        if (p < 1) throw Error(ErrorCode::DegenerateSpec, "pattern repetitions must be >= 1");
    }
    if (!(merge_tol > 0.0)) throw Error(ErrorCode::DegenerateSpec, "merge tolerance must be positive");
}

std::vector<int> merge_vertices(std::vector<Eigen::Vector3d>& vertices, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "merge tolerance must be positive");
    std::map<Cell, std::vector<int>> grid;  // cell -> merged indices
    std::vector<Eigen::Vector3d> merged;
    std::vector<int> map(vertices.size());
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const auto& p = vertices[i];
        const auto [cx, cy, cz] = cell_of(p, tol);
        int found = -1;
        for (long long dx = -1; dx <= 1 && found < 0; ++dx) {
            for (long long dy = -1; dy <= 1 && found < 0; ++dy) {
                for (long long dz = -1; dz <= 1 && found < 0; ++dz) {
                    auto it = grid.find({cx + dx, cy + dy, cz + dz});
                    if (it == grid.end()) continue;
                    for (int m : it->second) {
                        if ((merged[m] - p).norm() < tol) {
                            found = m;
                            break;
                        }
                    }
                }
            }
        }
        if (found < 0) {
            found = static_cast<int>(merged.size());
            merged.push_back(p);
            grid[{cx, cy, cz}].push_back(found);
        }
        map[i] = found;
    }
    vertices = std::move(merged);
    return map;
}

std::size_t AssemblyGeometry::count(Channel channel) const {
    return static_cast<std::size_t>(std::count(face_channel.begin(), face_channel.end(), channel));
}

QuadMesh AssemblyGeometry::channel_mesh(Channel channel) const {
    QuadMesh out;
    std::map<int, int> remap;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        if (face_channel[f] != channel) continue;
        std::array<int, 4> q{};
        for (int i = 0; i < 4; ++i) {
            const int v = mesh.faces[f][i];
            auto [it, inserted] = remap.emplace(v, static_cast<int>(out.vertices.size()));
            if (inserted) out.vertices.push_back(mesh.vertices[v]);
            q[i] = it->second;
        }
        out.faces.push_back(q);
    }
    return out;
}

AssemblyGeometry assemble_bidirectional(const AssemblySpec& spec) {
    spec.validate();
    const TubeGeometry tube = generate_tube(spec.tube);
    const double H = tube.deployed_length;
    const double tol = spec.merge_tol;

    const auto& section = spec.tube.cross_section.vertices();
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& p : section) {
        x_min = std::min(x_min, p.x());
        x_max = std::max(x_max, p.x());
        y_min = std::min(y_min, p.y());
        y_max = std::max(y_max, p.y());
    }
    // Sideways reach of a tube across its axis: section width plus zigzag amplitude.
    double zig_min = 0.0, zig_max = 0.0;
    for (const auto& v : tube.mesh.vertices) {
        zig_min = std::min(zig_min, v.x() - x_min);
        zig_max = std::max(zig_max, v.x() - x_min);
    }
    const double reach = zig_max - zig_min;

    const int nx = spec.pattern[0], ny = spec.pattern[1], nz = spec.pattern[2];
    const bool rows = spec.n_horizontal > 0;
    if (rows && !has_flat_wall(spec.tube.cross_section, y_min, tol)) {
        throw Error(ErrorCode::InterfaceMismatch,
                    "section has no edge along its lowest side for the horizontal tubes to rest on");
    }
    if (rows && ny >= 2 && !has_flat_wall(spec.tube.cross_section, y_max, tol)) {
        throw Error(ErrorCode::InterfaceMismatch, "section has no edge along its highest side for stacking");
    }
    const double Xp = rows ? spec.n_horizontal * H : reach;
    const double Zp = spec.n_vertical * H;
    const double Yp = 2.0 * (y_max - y_min);
    if (nx >= 2 && Xp < reach - tol) {
        std::ostringstream msg;
        msg << "columns overlap: period " << Xp << " mm < column width " << reach << " mm";
        throw Error(ErrorCode::InterfaceMismatch, msg.str());
    }
    if (rows && nz >= 2 && Zp < reach - tol) {
        std::ostringstream msg;
        msg << "rows overlap: period " << Zp << " mm < row height " << reach << " mm";
        throw Error(ErrorCode::InterfaceMismatch, msg.str());
    }

    Eigen::Matrix3d R_h;
    R_h << 0, 0, 1,
           0, -1, 0,
           1, 0, 0;

    AssemblyGeometry out;
    std::vector<Eigen::Vector3d> raw;
    std::vector<std::array<int, 4>> raw_faces;
    auto place = [&](Channel ch, const Eigen::Matrix3d& R, const Eigen::Vector3d& t) {
        TubeInstance inst;
        inst.channel = ch;
        inst.rotation = R;
        inst.translation = t;
        inst.first_face = static_cast<int>(raw_faces.size());
        const int base = static_cast<int>(raw.size());
        for (const auto& v : tube.mesh.vertices) {
            inst.vertex_map.push_back(static_cast<int>(raw.size()));
            raw.push_back(R * v + t);
        }
        for (const auto& q : tube.mesh.faces) {
            raw_faces.push_back({q[0] + base, q[1] + base, q[2] + base, q[3] + base});
            out.face_channel.push_back(ch);
        }
        out.tubes.push_back(std::move(inst));
    };

    for (int cx = 0; cx < nx; ++cx) {
        for (int cy = 0; cy < ny; ++cy) {
            for (int cz = 0; cz < nz; ++cz) {
                const Eigen::Vector3d cell(cx * Xp, cy * Yp, cz * Zp);
                for (int i = 0; i < spec.n_vertical; ++i) {
                    place(Channel::Direction1, Eigen::Matrix3d::Identity(), cell + Eigen::Vector3d(0, 0, i * H));
                }
                for (int i = 0; i < spec.n_horizontal; ++i) {
                    place(Channel::Direction2, R_h, cell + Eigen::Vector3d(i * H, 2.0 * y_min, 0));
                }
            }
        }
    }

    const std::size_t raw_count = raw.size();
    const std::vector<int> map = merge_vertices(raw, tol);
    out.mesh.vertices = std::move(raw);
    out.merged_vertices = static_cast<int>(raw_count - out.mesh.vertices.size());
    for (auto& q : raw_faces) {
        for (int& v : q) v = map[v];
    }
    out.mesh.faces = std::move(raw_faces);
    for (auto& inst : out.tubes) {
        for (int& v : inst.vertex_map) v = map[v];
    }

    std::vector<int> touched(out.mesh.vertices.size(), 0);  // bit 0: direction-1, bit 1: direction-2
    for (std::size_t f = 0; f < out.mesh.faces.size(); ++f) {
        const int bit = out.face_channel[f] == Channel::Direction1 ? 1 : 2;
        for (int v : out.mesh.faces[f]) touched[v] |= bit;
    }
    out.contact_vertices = static_cast<int>(std::count(touched.begin(), touched.end(), 3));

    // Creases: classify edges with two faces of one channel, flag edges shared across channels.
    for (const auto& [edge, faces] : edge_faces(out.mesh.faces)) {
        std::set<Channel> channels;
        for (int f : faces) channels.insert(out.face_channel[f]);
        Crease c{edge.first, edge.second, CreaseKind::Boundary};
        if (channels.size() > 1) {
            out.ambiguous_edges.push_back({edge.first, edge.second});
        } else if (faces.size() == 2) {
            c.kind = classify_edge(out.mesh, edge.first, edge.second, faces[0], faces[1]);
        } else if (faces.size() > 2) {
            out.ambiguous_edges.push_back({edge.first, edge.second});
        }
        out.creases.push_back(c);
    }
    return out;
}

}  // namespace oritube
