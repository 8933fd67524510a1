#pragma once

// Cross-section admissibility, tube generation, bi-directional assembly and
// crease-pattern unrolling. Lengths are millimetres, angles are radians unless
// a name says otherwise.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "oritube/mesh.hpp"

namespace oritube {

inline constexpr double kDefaultLengthTol = 1e-6;  // mm
inline constexpr double kDefaultAngleTol = 1e-9;   // rad
inline constexpr double kMinEdgeLength = 1e-9;     // mm

/// Closed, simple planar polygon. Coordinates are (u, v) in mm; u is the
/// direction of the zigzag offset once the section is swept into a tube.
class CrossSection {
public:
    /// Throws DegeneratePolygon for fewer than 3 vertices, repeated
    /// consecutive vertices or self-intersection.
    explicit CrossSection(std::vector<Eigen::Vector2d> vertices);

    const std::vector<Eigen::Vector2d>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }

    Eigen::Vector2d edge(std::size_t i) const;
    double edge_length(std::size_t i) const { return edge(i).norm(); }
    /// Slope angle of edge i folded into [0, pi).
    double slope(std::size_t i) const;
    double perimeter() const;
    /// Positive for counter-clockwise vertex order.
    double signed_area() const;

private:
    std::vector<Eigen::Vector2d> vertices_;
};

struct EdgeGroup {
    double slope = 0.0;             // rad in [0, pi)
    std::vector<int> edges;         // indices into the polygon's edges
    std::vector<int> sign;          // +1/-1 per member: direction along/against the slope
    double length_positive = 0.0;   // total length of members with sign +1
    double length_negative = 0.0;
};

struct EdgeGroupReport {
    std::vector<EdgeGroup> groups;
    bool admissible = false;
    std::vector<std::string> violations;
};

/// Groups edges by slope (mod pi) and checks that every group's two
/// opposing partitions carry equal total length.
EdgeGroupReport check_admissible(const CrossSection& cs, double length_tol = kDefaultLengthTol,
                                 double angle_tol = kDefaultAngleTol);

/// Parallelogram with sides a (slope theta1) and b (slope theta2), counter-clockwise,
/// vertex 0 at the origin. Angles in degrees.
CrossSection make_quad_section(double a, double b, double theta1_deg, double theta2_deg);

struct TubeSpec {
    CrossSection cross_section = make_quad_section(15.0, 15.0, 0.0, 90.0);
    double alpha_deg = 45.0;
    double unit_length = 15.0;
    int n_units = 1;

    /// Throws DegenerateSpec.
    void validate() const;
};

enum class CreaseKind { Mountain, Valley, Flat, Boundary };

const char* to_string(CreaseKind kind);

struct Crease {
    int a = 0;
    int b = 0;
    CreaseKind kind = CreaseKind::Boundary;
};

/// Deployed-state tube. Vertices are ring-major: ring j, section vertex k at
/// index j * n_sides + k. Face (j, k) spans section edge k between rings j and j+1.
/// Local frame: section in the x-y plane, tube axis +z, zigzag offset along x.
struct TubeGeometry {
    TubeSpec spec;
    QuadMesh mesh;
    std::vector<Crease> creases;
    double deployed_length = 0.0;

    int n_sides() const { return static_cast<int>(spec.cross_section.size()); }
    int n_rings() const { return 2 * spec.n_units + 1; }
    int vertex_index(int ring, int k) const { return ring * n_sides() + (k % n_sides()); }
    int face_index(int row, int k) const { return row * n_sides() + k; }
};

/// Zigzag segment vectors at the deployed state: d1 = (L sin a, 0, L cos a), d2 = (-L sin a, 0, L cos a).
std::array<Eigen::Vector3d, 2> zigzag_segments(const TubeSpec& spec);

/// Throws InadmissibleSection or DegenerateSpec.
TubeGeometry generate_tube(const TubeSpec& spec);

/// Mountain/valley/flat tags from outward face orientation; boundary for
/// edges with one incident face. Throws NonUnrollable for edges with more than two.
std::vector<Crease> classify_creases(const QuadMesh& mesh, double angle_tol = kDefaultAngleTol);

/// Tag of edge (a, b) shared by faces f1 and f2.
CreaseKind classify_edge(const QuadMesh& mesh, int a, int b, int f1, int f2, double angle_tol = kDefaultAngleTol);

// ---------------------------------------------------------------------------
// Crease pattern

struct PatternEdge {
    int a = 0;
    int b = 0;
    CreaseKind kind = CreaseKind::Boundary;  // tag of the 3D edge it came from
    bool cut = false;                        // lies on a strip outline
};

/// Isometric layout of a tube surface, one strip per cross-section edge.
struct CreasePattern2D {
    std::vector<Eigen::Vector2d> vertices;
    std::vector<int> source_vertex;              // 3D vertex per pattern vertex
    std::vector<std::array<int, 4>> cells;       // pattern vertex indices, CCW
    std::vector<int> source_face;                // 3D face per cell
    std::vector<PatternEdge> edges;
    std::vector<double> strip_base_width;        // ring-0 edge length of each strip
    double strip_gap = 0.0;

    bool empty() const { return cells.empty(); }
    /// Number of edges shared by two cells of the pattern.
    std::size_t interior_crease_count() const;
    Eigen::AlignedBox2d bounding_box() const;
};

/// Cuts along every longitudinal crease, starting at the axial line through
/// section vertex 0, and lays each strip out flat. Throws NonUnrollable.
CreasePattern2D unroll_crease_pattern(const TubeGeometry& tube, double strip_gap = 2.0);

// ---------------------------------------------------------------------------
// Bi-directional assembly

enum class Channel { Direction1, Direction2 };

const char* to_string(Channel channel);

struct AssemblySpec {
    TubeSpec tube;
    int n_vertical = 1;     // tubes per vertical column (axis along world Z)
    int n_horizontal = 1;   // tubes per horizontal row (axis along world X); 0 = columns only
    std::array<int, 3> pattern{1, 1, 1};
    double merge_tol = kDefaultLengthTol;

    /// Throws DegenerateSpec.
    void validate() const;
};

struct TubeInstance {
    Channel channel = Channel::Direction1;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    std::vector<int> vertex_map;  // tube-local vertex -> assembly vertex
    int first_face = 0;
};

struct AssemblyGeometry {
    QuadMesh mesh;
    std::vector<Channel> face_channel;
    std::vector<Crease> creases;
    std::vector<TubeInstance> tubes;
    std::vector<std::array<int, 2>> ambiguous_edges;  // edges touched by both channels
    int contact_vertices = 0;                          // vertices shared by both channels
    int merged_vertices = 0;                           // raw vertex count minus merged count

    std::size_t count(Channel channel) const;
    /// Faces of one channel, re-indexed into a compact mesh.
    QuadMesh channel_mesh(Channel channel) const;
};

/// Stage 1: vertical tubes joined end to end into a column. Stage 2: a row of
/// horizontal tubes pressed against the column's flat wall. Stage 3: the
/// column+row unit cell repeated pattern[0] x pattern[1] x pattern[2] times.
/// Throws InterfaceMismatch when the walls or ends to be joined do not coincide.
AssemblyGeometry assemble_bidirectional(const AssemblySpec& spec);

/// Merges vertices closer than tol (first occurrence wins). Returns the map
/// old index -> new index and rewrites `vertices` in place.
std::vector<int> merge_vertices(std::vector<Eigen::Vector3d>& vertices, double tol);

}  // namespace oritube
