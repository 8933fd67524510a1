#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "oritube/error.hpp"
#include "oritube/structural.hpp"

using namespace oritube;

namespace {

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

TubeGeometry tube_with_units(int n) {
    TubeSpec s;
    s.n_units = n;
    return generate_tube(s);
}

// Edge -> number of incident faces, from the quad connectivity alone.
std::map<std::pair<int, int>, int> edge_faces(const QuadMesh& m) {
    std::map<std::pair<int, int>, int> e;
    for (const auto& q : m.faces)
        for (int i = 0; i < 4; ++i) ++e[std::minmax(q[i], q[(i + 1) % 4])];
    return e;
}

Eigen::VectorXd perturbed(const BarHingeModel& m, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, scale);
    Eigen::VectorXd x = m.rest_positions();
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += g(rng);
    return x;
}

std::vector<BoundaryCondition> pulled(const BarHingeModel& m, const TensileScenario& s, double u) {
    std::vector<BoundaryCondition> bcs;
    for (int n : s.fixed_nodes) bcs.push_back({n, m.nodes[n]});
    for (int n : s.moved_nodes) bcs.push_back({n, m.nodes[n] + u * s.axis});
    return bcs;
}

}  // namespace

TEST(BarHinge, CountsFollowConnectivity) {
    for (int units : {1, 2}) {
        const auto tube = tube_with_units(units);
        const auto model = build_bar_hinge(tube, kResinOgden);
        const auto edges = edge_faces(tube.mesh);
        std::size_t interior = 0;
        for (const auto& [e, n] : edges) interior += n == 2;
        EXPECT_EQ(model.nodes.size(), tube.mesh.vertices.size());
        EXPECT_EQ(model.diagonal_count(), tube.mesh.faces.size());
        EXPECT_EQ(model.bars.size(), edges.size() + tube.mesh.faces.size());
        EXPECT_EQ(model.count(HingeKind::Panel), tube.mesh.faces.size());
        EXPECT_EQ(model.count(HingeKind::Crease), interior);
    }
    const auto one = build_bar_hinge(tube_with_units(1), kResinOgden);
    EXPECT_EQ(one.diagonal_count(), 8u);
    EXPECT_EQ(one.count(HingeKind::Panel), 8u);
}

TEST(BarHinge, StiffnessRules) {
    const auto tube = tube_with_units(2);
    const auto a = build_bar_hinge(tube, kResinOgden, 1.0);
    const auto b = build_bar_hinge(tube, kResinOgden, 2.0);
    ASSERT_EQ(a.bars.size(), b.bars.size());
    for (std::size_t i = 0; i < a.bars.size(); ++i) {
        EXPECT_GT(a.bars[i].stiffness, 0.0);
        EXPECT_EQ(b.bars[i].stiffness, 2.0 * a.bars[i].stiffness);
        EXPECT_NEAR(a.bars[i].rest, (tube.mesh.vertices[a.bars[i].a] - tube.mesh.vertices[a.bars[i].b]).norm(), 1e-12);
    }
    double crease_max = 0.0, panel_min = 1e300;
    for (const auto& h : a.hinges) {
        EXPECT_GE(h.stiffness, 0.0);
        if (h.kind == HingeKind::Crease) crease_max = std::max(crease_max, h.stiffness);
        else panel_min = std::min(panel_min, h.stiffness);
    }
    EXPECT_LT(crease_max, panel_min);
    EXPECT_NEAR(a.youngs_modulus, 3.0 * kResinOgden.mu1 * 1e-6, 1e-12);

    EXPECT_EQ(code_of([&] { build_bar_hinge(tube, kResinOgden, 1.0, 0.0); }), ErrorCode::InvalidMaterial);
    EXPECT_EQ(code_of([&] { build_bar_hinge(tube, {0.0, 2.0, 0.0}); }), ErrorCode::InvalidMaterial);
    EXPECT_EQ(code_of([&] { build_bar_hinge(tube, kResinOgden, -1.0); }), ErrorCode::InvalidArgument);
}

TEST(Energy, SingleBar) {
    BarHingeModel m;
    m.nodes = {{0, 0, 0}, {2, 0, 0}};
    m.bars = {{0, 1, 2.0, 3.0, false}};
    Eigen::VectorXd x = m.rest_positions();
    x[3] += 0.25;
    Eigen::VectorXd g;
    EXPECT_DOUBLE_EQ(energy(m, x, &g), 0.5 * 3.0 * 0.25 * 0.25);
    EXPECT_DOUBLE_EQ(g[3], 3.0 * 0.25);
    EXPECT_DOUBLE_EQ(g[0], -3.0 * 0.25);
}

TEST(Energy, HingeAngleConvention) {
    const Eigen::Vector3d j(0, 0, 0), k(0, 0, 1), i(1, 0, 0);
    EXPECT_NEAR(hinge_angle(i, j, k, Eigen::Vector3d(-1, 0, 0)), std::numbers::pi, 1e-12);
    const double a = hinge_angle(i, j, k, Eigen::Vector3d(0, 1, 0));
    const double b = hinge_angle(i, j, k, Eigen::Vector3d(0, -1, 0));
    EXPECT_NEAR(a + b, 2 * std::numbers::pi, 1e-12);
    EXPECT_NEAR(std::min(a, b), std::numbers::pi / 2, 1e-12);
}

TEST(Energy, RestStateIsStressFree) {
    const auto model = build_bar_hinge(tube_with_units(2), kResinOgden);
    Eigen::VectorXd g;
    EXPECT_NEAR(energy(model, model.rest_positions(), &g), 0.0, 1e-20);
    EXPECT_LT(g.norm(), 1e-12);
}

TEST(Energy, GradientMatchesFiniteDifference) {
    const auto model = build_bar_hinge(tube_with_units(1), kResinOgden);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd x = perturbed(model, 0.3, rng);
        const Eigen::VectorXd g = gradient(model, x);
        const Eigen::VectorXd fd = oracle::central_difference([&](const Eigen::VectorXd& y) { return energy(model, y); }, x, 1e-6);
        EXPECT_LT((g - fd).lpNorm<Eigen::Infinity>(), 1e-6 * g.lpNorm<Eigen::Infinity>()) << "trial " << trial;
    }
}

TEST(Energy, RigidMotionInvariant) {
    const auto model = build_bar_hinge(tube_with_units(2), kResinOgden);
    std::mt19937_64 rng(5);
    const Eigen::VectorXd x = perturbed(model, 0.2, rng);
    const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix();
    const Eigen::Vector3d t(4.0, -2.0, 9.0);
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < x.size() / 3; ++i) y.segment<3>(3 * i) = R * x.segment<3>(3 * i) + t;
    EXPECT_NEAR(energy(model, y), energy(model, x), 1e-10);
}

TEST(Equilibrium, RestBoundaryConditions) {
    const auto tube = tube_with_units(1);
    const auto model = build_bar_hinge(tube, kResinOgden);
    const auto eq = minimize_energy(model, pulled(model, end_ring_scenario(tube), 0.0));
    EXPECT_NEAR(eq.energy, 0.0, 1e-14);
    EXPECT_LT((eq.positions - model.rest_positions()).norm(), 1e-9);
    for (const auto& r : eq.reactions) EXPECT_LT(r.norm(), 1e-8);
}

TEST(Equilibrium, PullReactionMatchesEnergySlope) {
    const auto tube = tube_with_units(1);
    const auto model = build_bar_hinge(tube, kResinOgden);
    const auto sc = end_ring_scenario(tube);
    const double u = 1.0, h = 1e-3;
    const auto eq = minimize_energy(model, pulled(model, sc, u));
    EXPECT_GT(eq.energy, 0.0);
    EXPECT_LT(eq.gradient_norm, 1e-8);
    double force = 0.0;
    for (std::size_t i = 0; i < sc.moved_nodes.size(); ++i)
        force += eq.reactions[sc.fixed_nodes.size() + i].dot(sc.axis);
    EXPECT_GT(force, 0.0);
    // line search on the equilibrium energy: dE*/du is the pull force
    const double ep = minimize_energy(model, pulled(model, sc, u + h), eq.positions).energy;
    const double em = minimize_energy(model, pulled(model, sc, u - h), eq.positions).energy;
    EXPECT_NEAR(force, (ep - em) / (2 * h), 1e-4 * force);

    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    for (const auto& r : eq.reactions) total += r;
    EXPECT_LT(total.norm(), 1e-6);
    // prescribed nodes sit exactly where they were put
    for (int n : sc.moved_nodes) EXPECT_EQ(eq.positions.segment<3>(3 * n), model.nodes[n] + u * sc.axis);
}

TEST(Equilibrium, NeverAboveWarmStart) {
    const auto tube = tube_with_units(2);
    const auto model = build_bar_hinge(tube, kResinOgden);
    const auto bcs = pulled(model, end_ring_scenario(tube), 0.8);
    std::mt19937_64 rng(9);
    Eigen::VectorXd start = perturbed(model, 0.05, rng);
    for (const auto& bc : bcs) start.segment<3>(3 * bc.node) = bc.position;
    const auto eq = minimize_energy(model, bcs, start);
    EXPECT_LE(eq.energy, energy(model, start));
}

TEST(Equilibrium, UnderConstrained) {
    const auto tube = tube_with_units(1);
    const auto model = build_bar_hinge(tube, kResinOgden);
    EXPECT_EQ(code_of([&] { minimize_energy(model, {}); }), ErrorCode::UnderConstrained);
    const std::vector<BoundaryCondition> two{{0, model.nodes[0]}, {1, model.nodes[1]}};
    EXPECT_EQ(code_of([&] { minimize_energy(model, two); }), ErrorCode::UnderConstrained);
}

TEST(Tensile, SmallDisplacementForceMonotone) {
    const auto tube = tube_with_units(1);
    const auto model = build_bar_hinge(tube, kResinOgden);
    const auto sc = end_ring_scenario(tube);
    std::vector<double> coarse, fine;
    for (int i = 0; i <= 10; ++i) coarse.push_back(0.1 * i);
    for (int i = 0; i <= 20; ++i) fine.push_back(0.05 * i);
    const auto a = tensile_sweep(model, sc, coarse);
    const auto b = tensile_sweep(model, sc, fine);
    EXPECT_EQ(a.front().force, 0.0);
    for (std::size_t i = 1; i < a.size(); ++i) {
        EXPECT_GE(a[i].force, a[i - 1].force);
        EXPECT_NEAR(a[i].force, b[2 * i].force, 1e-6 * std::max(1.0, a[i].force));
    }
    EXPECT_EQ(code_of([&] { tensile_sweep(model, sc, {1.0, 0.5}); }), ErrorCode::InvalidArgument);

    std::ostringstream csv;
    write_tensile_csv(a, csv);
    EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "displacement_mm,force_N,energy_Nmm");
}

TEST(Tensile, QuarterModelMatchesFullOverFour) {
    const auto tube = tube_with_units(3);
    const auto quarter = build_bar_hinge(tube, kResinOgden);
    const auto full = build_bar_hinge(mirror_block(tube.mesh), kResinOgden);
    TensileScenario fs;
    double zmax = 0.0;
    for (const auto& p : full.nodes) zmax = std::max(zmax, p.z());
    for (int i = 0; i < static_cast<int>(full.nodes.size()); ++i) {
        if (std::abs(full.nodes[i].z()) < 1e-9) fs.fixed_nodes.push_back(i);
        else if (std::abs(full.nodes[i].z() - zmax) < 1e-9) fs.moved_nodes.push_back(i);
    }
    const auto q = tensile_sweep(quarter, quarter_scenario(tube, quarter), {0.0, 1.0});
    const auto f = tensile_sweep(full, fs, {0.0, 1.0});
    EXPECT_GT(q[1].force, 0.0);
    EXPECT_NEAR(q[1].force, f[1].force / 4.0, 0.02 * f[1].force / 4.0);
}
