#pragma once

// One-parameter rigid folding of a translational origami tube.
//
// Every slope group of the section keeps P * cos(psi_g) fixed, where P is the
// in-plane zigzag offset of the segments and psi_g the group's current edge
// direction. The group with the largest |cos theta| drives the motion; t
// maps linearly onto the interior dihedral at the first corner crease of the
// first segment, t = 0 and t = 1 being the two flat states.

#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "oritube/geometry.hpp"
#include "oritube/mesh.hpp"

namespace oritube {

enum class FoldMethod { Analytic, Continuation };

struct FoldOptions {
    FoldMethod method = FoldMethod::Analytic;
    double step = 0.01;       // continuation step in t
    double min_step = 1e-6;   // smallest step after halving
    double tol = 1e-9;        // max constraint residual, mm
    int max_iter = 200;       // Gauss-Newton iterations per step
};

/// Mechanism parameters derived from the section and projection.
struct FoldRange {
    int reference_group = 0;
    double phi_lo = 0.0;          // reference angle at t = 0 (rad)
    double phi_hi = 0.0;          // reference angle at t = 1
    double phi_deployed = 0.0;
    bool collapse_lo = false;     // t = 0 flattens the section instead of the axis
    int driver_vertex = 0;        // section vertex of the driving corner crease
    double rho_lo = 0.0;          // driving dihedral at t = 0 (rad)
    double rho_hi = 0.0;
    double rho_deployed = 0.0;
    double t_deployed = 0.5;
};

struct FoldedState {
    double t = 0.0;
    double phi = 0.0;                      // reference-group angle (rad); NaN for continuation states
    QuadMesh mesh;                         // same topology as the tube
    double axial_length = 0.0;             // mm
    double transverse_height = 0.0;        // mm, extent along the thinnest principal axis
    double enclosed_volume = 0.0;          // mm^3
    bool volume_from_hull = false;         // end caps failed; volume is the convex hull's
    double driving_dihedral = 0.0;         // rad
};

/// Throws NotOneDof when two slope groups tie for the driving role in a
/// section with three or more groups.
FoldRange fold_range(const TubeGeometry& tube);

/// Throws NoConvergence, NotOneDof, InvalidArgument (t outside [0, 1]).
FoldedState fold_configuration(const TubeGeometry& tube, double t, const FoldOptions& options = {});

/// States at t = i / (n_steps - 1). Throws InvalidArgument for n_steps < 2.
std::vector<FoldedState> fold_sweep(const TubeGeometry& tube, int n_steps, const FoldOptions& options = {});

/// Interior dihedral at the driving corner for arbitrary vertex positions.
double driving_dihedral(const TubeGeometry& tube, const std::vector<Eigen::Vector3d>& vertices,
                        int driver_vertex);

struct VolumeResult {
    double volume = 0.0;
    bool from_hull = false;
};

/// Closes every boundary loop with a fan from its centroid.
/// Throws OpenSurface if a loop is neither planar nor star-shaped about its centroid.
TriMesh cap_boundary_loops(const TriMesh& surface);

/// Divergence-theorem volume of the capped surface; falls back to the convex
/// hull (from_hull = true) when capping fails.
VolumeResult enclosed_volume(const QuadMesh& surface);
double enclosed_volume(const FoldedState& state);

double convex_hull_volume(const std::vector<Eigen::Vector3d>& points);

/// Axial length over deployed length. Exceeds 1 for sections whose deployed
/// state is not the longest one.
double extension_ratio(const FoldedState& state, const TubeGeometry& tube);

/// Pattern vertices carried to their 3D positions in a folded state.
std::vector<Eigen::Vector3d> refold(const CreasePattern2D& pattern, const FoldedState& state);

/// Max |edge length - reference| and max planarity residual over a state.
struct RigidityResidual {
    double edge = 0.0;
    double planarity = 0.0;
};
RigidityResidual rigidity_residual(const TubeGeometry& tube, const FoldedState& state);

/// Columns t, axial_length_mm, transverse_height_mm, volume_mm3.
void write_sweep_csv(const std::vector<FoldedState>& states, std::ostream& out);

}  // namespace oritube
