#include "oritube/export.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "oritube/error.hpp"

namespace oritube {
namespace {

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f32(std::string& buf, float f) { put_u32(buf, std::bit_cast<std::uint32_t>(f)); }

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

std::size_t write_all(std::ostream& out, const std::string& bytes) {
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed");
    return bytes.size();
}

// Fixed six-decimal formatting without negative zero.
std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    if (std::strcmp(buf, "-0.000000") == 0) return "0.000000";
    return buf;
}

int find(std::vector<int>& parent, int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
}

}  // namespace

std::size_t write_stl(const std::vector<StlTriangle>& triangles, std::ostream& out, const std::string& header) {
    if (triangles.empty()) throw Error(ErrorCode::EmptyMesh, "no triangles to export");
    std::string buf;
    buf.reserve(stl_size(triangles.size()));
    std::string head = header.substr(0, 80);
    head.resize(80, ' ');
    buf += head;
    put_u32(buf, static_cast<std::uint32_t>(triangles.size()));
    for (const auto& t : triangles) {
        for (float f : t.normal) put_f32(buf, f);
        for (const auto& v : t.v) {
            for (float f : v) put_f32(buf, f);
        }
        buf.push_back('\0');
        buf.push_back('\0');
    }
    return write_all(out, buf);
}

std::size_t export_stl(const TriMesh& mesh, std::ostream& out, const std::string& header) {
    std::vector<StlTriangle> tris;
    tris.reserve(mesh.triangles.size());
    for (const auto& t : mesh.triangles) {
        const Eigen::Vector3d& a = mesh.vertices[t[0]];
        const Eigen::Vector3d& b = mesh.vertices[t[1]];
        const Eigen::Vector3d& c = mesh.vertices[t[2]];
        Eigen::Vector3d n = (b - a).cross(c - a);
        if (n.norm() > 0.0) n.normalize();
        StlTriangle s;
        for (int i = 0; i < 3; ++i) {
            s.normal[i] = static_cast<float>(n[i]);
            s.v[0][i] = static_cast<float>(a[i]);
            s.v[1][i] = static_cast<float>(b[i]);
            s.v[2][i] = static_cast<float>(c[i]);
        }
        tris.push_back(s);
    }
    return write_stl(tris, out, header);
}

std::size_t export_stl(const QuadMesh& mesh, std::ostream& out, const std::string& header) {
    return export_stl(triangulate(mesh), out, header);
}

std::size_t export_closed_stl(const QuadMesh& mesh, std::ostream& out, const std::string& header) {
    return export_stl(fan_boundary_loops(triangulate(mesh)), out, header);
}

std::size_t export_stl(const QuadMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return export_stl(mesh, out);
}

std::vector<StlTriangle> read_stl(std::istream& in) {
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 84) throw Error(ErrorCode::IoFailure, "STL shorter than its header");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::uint32_t n = get_u32(p + 80);
    if (bytes.size() != stl_size(n)) {
        std::ostringstream msg;
        msg << "STL declares " << n << " triangles but holds " << bytes.size() << " bytes";
        throw Error(ErrorCode::IoFailure, msg.str());
    }
    std::vector<StlTriangle> tris(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        const unsigned char* r = p + 84 + 50 * static_cast<std::size_t>(i);
        for (int k = 0; k < 3; ++k) tris[i].normal[k] = get_f32(r + 4 * k);
        for (int c = 0; c < 3; ++c) {
            for (int k = 0; k < 3; ++k) tris[i].v[c][k] = get_f32(r + 12 + 12 * c + 4 * k);
        }
    }
    return tris;
}

std::vector<StlTriangle> read_stl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return read_stl(in);
}

TriMesh stl_to_mesh(const std::vector<StlTriangle>& triangles) {
    TriMesh out;
    std::map<std::array<std::uint32_t, 3>, int> index;
    for (const auto& t : triangles) {
        std::array<int, 3> tri{};
        for (int c = 0; c < 3; ++c) {
            const std::array<std::uint32_t, 3> key{std::bit_cast<std::uint32_t>(t.v[c][0]),
                                                   std::bit_cast<std::uint32_t>(t.v[c][1]),
                                                   std::bit_cast<std::uint32_t>(t.v[c][2])};
            auto [it, inserted] = index.emplace(key, static_cast<int>(out.vertices.size()));
            if (inserted) out.vertices.emplace_back(t.v[c][0], t.v[c][1], t.v[c][2]);
            tri[c] = it->second;
        }
        out.triangles.push_back(tri);
    }
    return out;
}

EdgeIncidence edge_incidence(const TriMesh& mesh) {
    EdgeIncidence r;
    std::vector<int> parent(mesh.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<char> on_border(mesh.vertices.size(), 0);
    for (const auto& [e, faces] : edge_faces(mesh.triangles)) {
        if (faces.size() == 2) {
            ++r.manifold;
        } else if (faces.size() == 1) {
            ++r.border;
            on_border[e.first] = on_border[e.second] = 1;
            parent[find(parent, e.first)] = find(parent, e.second);
        } else {
            ++r.excess;
        }
    }
    for (std::size_t v = 0; v < parent.size(); ++v) {
        if (on_border[v] && find(parent, static_cast<int>(v)) == static_cast<int>(v)) ++r.border_loops;
    }
    return r;
}

std::size_t export_svg_pattern(const CreasePattern2D& pattern, std::ostream& out) {
    if (pattern.empty()) throw Error(ErrorCode::EmptyMesh, "crease pattern has no cells");
    const Eigen::AlignedBox2d box = pattern.bounding_box();
    const double w = box.sizes().x();
    const double h = box.sizes().y();

    // Pattern y points up; SVG y points down.
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w) << "mm\" height=\""
      << num(h) << "mm\" viewBox=\"" << num(box.min().x()) << ' ' << num(-box.max().y()) << ' ' << num(w)
      << ' ' << num(h) << "\">\n"
      << "<style>\n"
      << "line { stroke-width: 0.2; fill: none; }\n"
      << ".mountain { stroke: #c0392b; }\n"
      << ".valley { stroke: #2c6fbb; stroke-dasharray: 1.5 1; }\n"
      << ".flat { stroke: #7f7f7f; stroke-dasharray: 0.3 0.6; }\n"
      << ".boundary { stroke: #000000; }\n"
      << "</style>\n";
    for (const auto& e : pattern.edges) {
        const auto& a = pattern.vertices[e.a];
        const auto& b = pattern.vertices[e.b];
        const char* cls = e.cut ? "boundary" : to_string(e.kind);
        s << "<line class=\"" << cls << "\"";
        if (e.cut && e.kind != CreaseKind::Boundary) s << " data-crease=\"" << to_string(e.kind) << "\"";
        s << " x1=\"" << num(a.x()) << "\" y1=\"" << num(-a.y()) << "\" x2=\"" << num(b.x()) << "\" y2=\""
          << num(-b.y()) << "\"/>\n";
    }
    s << "</svg>\n";
    return write_all(out, s.str());
}

}  // namespace oritube
