#pragma once

// Bar-and-hinge model of a thin-walled origami tube.
//
// Bars: every panel edge and one diagonal per quad (the shorter), linear
// springs with energy 1/2 k (l - l0)^2 and k = E t A_trib / l0^2, where A_trib
// is a third of the area of each triangle touching the bar (N/mm).
// Hinges: 1/2 kappa (theta - theta0)^2 with kappa = D l / w, D = E t^3 / 9
// (plate modulus at Poisson ratio 1/2), l the hinge length and w the mean
// distance of the two wing nodes from the hinge line. Crease hinges are
// scaled by crease_scale. E is the small-strain modulus 3 mu1 in N/mm^2.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "oritube/geometry.hpp"
#include "oritube/material.hpp"
#include "oritube/mesh.hpp"

namespace oritube {

struct Bar {
    int a = 0;
    int b = 0;
    double rest = 0.0;       // mm
    double stiffness = 0.0;  // N/mm
    bool diagonal = false;
};

enum class HingeKind { Crease, Panel };

/// Nodes (i, j, k, l): j-k is the hinge axis, i and l the wing tips.
struct Hinge {
    std::array<int, 4> nodes{};
    double rest = 0.0;       // rad in [0, 2 pi)
    double stiffness = 0.0;  // N mm / rad
    HingeKind kind = HingeKind::Crease;
};

struct BarHingeModel {
    std::vector<Eigen::Vector3d> nodes;
    std::vector<Bar> bars;
    std::vector<Hinge> hinges;
    double youngs_modulus = 0.0;  // N/mm^2
    double thickness = 0.0;       // mm
    double crease_scale = 0.0;

    int dof() const { return 3 * static_cast<int>(nodes.size()); }
    Eigen::VectorXd rest_positions() const;
    std::size_t count(HingeKind kind) const;
    std::size_t diagonal_count() const;
};

/// Throws InvalidMaterial (mu1 <= 0, crease_scale outside (0, 1]) and
/// InvalidArgument (thickness <= 0).
BarHingeModel build_bar_hinge(const TubeGeometry& tube, const OgdenParams& material, double thickness = 1.0,
                              double crease_scale = 0.01);

/// Several surfaces sharing nodes that coincide within merge_tol. Each part
/// keeps its own bars and hinges, so an edge shared by two parts carries two bars.
BarHingeModel build_bar_hinge(const std::vector<QuadMesh>& parts, const OgdenParams& material,
                              double thickness = 1.0, double crease_scale = 0.01, double merge_tol = 1e-6);

/// The tube mirrored across x = 0 and y = 0: {original, x-mirror, y-mirror, xy-mirror}.
std::vector<QuadMesh> mirror_block(const QuadMesh& mesh);

/// Dihedral angle of a hinge in [0, 2 pi); pi when flat.
double hinge_angle(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj, const Eigen::Vector3d& xk,
                   const Eigen::Vector3d& xl);

/// Total energy (N mm) at stacked positions x (size 3 * nodes); fills grad (N) if given.
double energy(const BarHingeModel& model, const Eigen::VectorXd& x, Eigen::VectorXd* grad = nullptr);
Eigen::VectorXd gradient(const BarHingeModel& model, const Eigen::VectorXd& x);

/// Prescribed position for the masked axes of one node.
struct BoundaryCondition {
    int node = 0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    std::array<bool, 3> fixed{true, true, true};
};

struct SolverOptions {
    double gradient_tol = 1e-8;  // N, 2-norm over free degrees of freedom
    int max_iter = 100000;
    int memory = 12;
};

struct Equilibrium {
    Eigen::VectorXd positions;
    double energy = 0.0;                       // N mm
    std::vector<Eigen::Vector3d> reactions;    // N, per boundary condition
    int iterations = 0;
    double gradient_norm = 0.0;                // N, free degrees of freedom
};

/// L-BFGS from `start` (rest positions when empty) with the prescribed
/// coordinates imposed first. A reaction is the force the support applies to
/// the structure, +dE/dx at the constrained node, so pulling a tube gives a
/// positive reaction along the pull. Throws UnderConstrained, NoConvergence.
Equilibrium minimize_energy(const BarHingeModel& model, const std::vector<BoundaryCondition>& bcs,
                            const Eigen::VectorXd& start = {}, const SolverOptions& options = {});

/// Fixed base nodes and moved nodes that translate along `axis`; the masks
/// choose which axes of each set are held.
struct TensileScenario {
    std::vector<int> fixed_nodes;
    std::vector<int> moved_nodes;
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    std::array<bool, 3> fixed_axes{true, true, true};
    std::array<bool, 3> moved_axes{true, true, true};
    std::vector<BoundaryCondition> extra;  // e.g. symmetry planes
};

/// Ring 0 clamped, last ring pulled along the tube axis.
TensileScenario end_ring_scenario(const TubeGeometry& tube);
/// Same scenario on a tube plus u_x = 0 on x = 0 nodes and u_y = 0 on y = 0 nodes.
TensileScenario quarter_scenario(const TubeGeometry& tube, const BarHingeModel& model);

struct TensilePoint {
    double displacement = 0.0;  // mm
    double force = 0.0;         // N, sum of moved-node reactions along the axis
    double energy = 0.0;        // N mm
    int iterations = 0;
    double gradient_norm = 0.0;
    Eigen::VectorXd positions;
};

/// Warm-started sweep. Throws InvalidArgument for unsorted displacements.
std::vector<TensilePoint> tensile_sweep(const BarHingeModel& model, const TensileScenario& scenario,
                                        const std::vector<double>& displacements,
                                        const SolverOptions& options = {});

/// Columns displacement_mm, force_N, energy_Nmm.
void write_tensile_csv(const std::vector<TensilePoint>& curve, std::ostream& out);

}  // namespace oritube
