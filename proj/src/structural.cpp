#include "oritube/structural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "oritube/detail/angles.hpp"
#include "oritube/error.hpp"

namespace oritube {
namespace {

double tri_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

double distance_to_line(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
    const Eigen::Vector3d u = (b - a).normalized();
    return (p - a).cross(u).norm();
}

void check_inputs(const OgdenParams& material, double thickness, double crease_scale) {
    material.validate();
    if (!(crease_scale > 0.0 && crease_scale <= 1.0)) {
        throw Error(ErrorCode::InvalidMaterial, "crease stiffness scale must lie in (0, 1]");
    }
    if (!(thickness > 0.0)) throw Error(ErrorCode::InvalidArgument, "thickness must be positive");
}

// Third vertex of the triangle of `tri` that contains edge (a, b), or -1.
int wing(const std::array<int, 3>& tri, int a, int b) {
    int hits = 0, other = -1;
    for (int v : tri) {
        if (v == a || v == b) {
            ++hits;
        } else {
            other = v;
        }
    }
    return hits == 2 ? other : -1;
}

void add_part(BarHingeModel& model, const QuadMesh& part, const std::vector<int>& node_of) {
    const auto& X = model.nodes;
    const double E = model.youngs_modulus;
    const double t = model.thickness;
    const double D = E * t * t * t / 9.0;
    const TriMesh tris = triangulate(part);

    std::map<EdgeKey, double> tributary;  // summed triangle area / 3 per bar
    for (const auto& tr : tris.triangles) {
        const double a3 = tri_area(X[node_of[tr[0]]], X[node_of[tr[1]]], X[node_of[tr[2]]]) / 3.0;
        for (int i = 0; i < 3; ++i) tributary[edge_key(tr[i], tr[(i + 1) % 3])] += a3;
    }
    auto make_bar = [&](int a, int b, bool diagonal) {
        Bar bar;
        bar.a = node_of[a];
        bar.b = node_of[b];
        bar.rest = (X[bar.b] - X[bar.a]).norm();
        bar.stiffness = E * t * tributary[edge_key(a, b)] / (bar.rest * bar.rest);
        bar.diagonal = diagonal;
        model.bars.push_back(bar);
    };
    auto make_hinge = [&](int i, int j, int k, int l, double scale, HingeKind kind) {
        Hinge h;
        h.nodes = {node_of[i], node_of[j], node_of[k], node_of[l]};
        const auto& xi = X[h.nodes[0]];
        const auto& xj = X[h.nodes[1]];
        const auto& xk = X[h.nodes[2]];
        const auto& xl = X[h.nodes[3]];
        h.rest = hinge_angle(xi, xj, xk, xl);
        const double len = (xk - xj).norm();
        const double w = 0.5 * (distance_to_line(xi, xj, xk) + distance_to_line(xl, xj, xk));
        h.stiffness = scale * D * len / w;
        h.kind = kind;
        model.hinges.push_back(h);
    };

    const auto faces_of_edge = edge_faces(part.faces);
    for (const auto& [e, faces] : faces_of_edge) make_bar(e.first, e.second, false);
    for (std::size_t f = 0; f < part.faces.size(); ++f) {
        const auto& t0 = tris.triangles[2 * f];
        const auto& t1 = tris.triangles[2 * f + 1];
        // The diagonal is the edge the two triangles of a quad share.
        int d0 = -1, d1 = -1;
        for (int v : t0) {
            if (std::find(t1.begin(), t1.end(), v) != t1.end()) (d0 < 0 ? d0 : d1) = v;
        }
        make_bar(d0, d1, true);
        make_hinge(wing(t0, d0, d1), d0, d1, wing(t1, d0, d1), 1.0, HingeKind::Panel);
    }
    for (const auto& [e, faces] : faces_of_edge) {
        if (faces.size() != 2) continue;
        int wi = -1, wl = -1;
        for (int s = 0; s < 2 && wi < 0; ++s) wi = wing(tris.triangles[2 * faces[0] + s], e.first, e.second);
        for (int s = 0; s < 2 && wl < 0; ++s) wl = wing(tris.triangles[2 * faces[1] + s], e.first, e.second);
        make_hinge(wi, e.first, e.second, wl, model.crease_scale, HingeKind::Crease);
    }
}

// Dihedral and its gradient with respect to the four hinge nodes.
double hinge_angle_grad(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj, const Eigen::Vector3d& xk,
                        const Eigen::Vector3d& xl, std::array<Eigen::Vector3d, 4>* g) {
    const Eigen::Vector3d rij = xi - xj;
    const Eigen::Vector3d rkj = xk - xj;
    const Eigen::Vector3d rkl = xk - xl;
    const Eigen::Vector3d m = rij.cross(rkj);
    const Eigen::Vector3d n = rkj.cross(rkl);
    const double raw = std::atan2(m.cross(n).norm(), m.dot(n));
    const double theta = m.dot(rkl) >= 0.0 ? raw : 2.0 * std::numbers::pi - raw;
    if (g) {
        const double lkj2 = rkj.squaredNorm();
        const double lkj = std::sqrt(lkj2);
        const Eigen::Vector3d gi = lkj / m.squaredNorm() * m;
        const Eigen::Vector3d gl = -lkj / n.squaredNorm() * n;
        const double a = rij.dot(rkj) / lkj2;
        const double b = rkl.dot(rkj) / lkj2;
        (*g)[0] = gi;
        (*g)[3] = gl;
        (*g)[1] = (a - 1.0) * gi - b * gl;
        (*g)[2] = (b - 1.0) * gl - a * gi;
    }
    return theta;
}

}  // namespace

Eigen::VectorXd BarHingeModel::rest_positions() const {
    Eigen::VectorXd x(dof());
    for (std::size_t i = 0; i < nodes.size(); ++i) x.segment<3>(3 * i) = nodes[i];
    return x;
}

std::size_t BarHingeModel::count(HingeKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(hinges.begin(), hinges.end(), [&](const Hinge& h) { return h.kind == kind; }));
}

std::size_t BarHingeModel::diagonal_count() const {
    return static_cast<std::size_t>(std::count_if(bars.begin(), bars.end(), [](const Bar& b) { return b.diagonal; }));
}

BarHingeModel build_bar_hinge(const TubeGeometry& tube, const OgdenParams& material, double thickness,
                              double crease_scale) {
    return build_bar_hinge(std::vector<QuadMesh>{tube.mesh}, material, thickness, crease_scale);
}

BarHingeModel build_bar_hinge(const std::vector<QuadMesh>& parts, const OgdenParams& material, double thickness,
                              double crease_scale, double merge_tol) {
    check_inputs(material, thickness, crease_scale);
    BarHingeModel model;
    model.youngs_modulus = material.youngs_modulus() * 1e-6;
    model.thickness = thickness;
    model.crease_scale = crease_scale;

    std::vector<Eigen::Vector3d> raw;
    for (const auto& p : parts) raw.insert(raw.end(), p.vertices.begin(), p.vertices.end());
    const std::vector<int> map = merge_vertices(raw, merge_tol);
    model.nodes = std::move(raw);

    std::size_t base = 0;
    for (const auto& p : parts) {
        std::vector<int> node_of(map.begin() + static_cast<std::ptrdiff_t>(base),
                                 map.begin() + static_cast<std::ptrdiff_t>(base + p.vertices.size()));
        add_part(model, p, node_of);
        base += p.vertices.size();
    }
    return model;
}

std::vector<QuadMesh> mirror_block(const QuadMesh& mesh) {
    std::vector<QuadMesh> out;
    for (const auto& s : {Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(-1, 1, 1), Eigen::Vector3d(1, -1, 1),
                          Eigen::Vector3d(-1, -1, 1)}) {
        QuadMesh m = mesh;
        for (auto& v : m.vertices) v = v.cwiseProduct(s);
        if (s.prod() < 0) {
            for (auto& q : m.faces) std::swap(q[1], q[3]);
        }
        out.push_back(std::move(m));
    }
    return out;
}

double hinge_angle(const Eigen::Vector3d& xi, const Eigen::Vector3d& xj, const Eigen::Vector3d& xk,
                   const Eigen::Vector3d& xl) {
    return hinge_angle_grad(xi, xj, xk, xl, nullptr);
}

double energy(const BarHingeModel& model, const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    if (x.size() != model.dof()) throw Error(ErrorCode::InvalidArgument, "position vector size mismatch");
    if (grad) grad->setZero(x.size());
    double e = 0.0;
    for (const auto& b : model.bars) {
        const Eigen::Vector3d d = x.segment<3>(3 * b.b) - x.segment<3>(3 * b.a);
        const double len = d.norm();
        const double stretch = len - b.rest;
        e += 0.5 * b.stiffness * stretch * stretch;
        if (grad) {
            const Eigen::Vector3d f = b.stiffness * stretch / len * d;
            grad->segment<3>(3 * b.b) += f;
            grad->segment<3>(3 * b.a) -= f;
        }
    }
    std::array<Eigen::Vector3d, 4> g;
    for (const auto& h : model.hinges) {
        const double theta = hinge_angle_grad(x.segment<3>(3 * h.nodes[0]), x.segment<3>(3 * h.nodes[1]),
                                              x.segment<3>(3 * h.nodes[2]), x.segment<3>(3 * h.nodes[3]),
                                              grad ? &g : nullptr);
        const double dtheta = detail::wrap_pi(theta - h.rest);
        e += 0.5 * h.stiffness * dtheta * dtheta;
        if (grad) {
            for (int i = 0; i < 4; ++i) grad->segment<3>(3 * h.nodes[i]) += h.stiffness * dtheta * g[i];
        }
    }
    return e;
}

Eigen::VectorXd gradient(const BarHingeModel& model, const Eigen::VectorXd& x) {
    Eigen::VectorXd g;
    energy(model, x, &g);
    return g;
}

namespace {

struct Masked {
    std::vector<char> fixed;   // per dof
    Eigen::VectorXd value;     // prescribed values on fixed dofs
    std::vector<int> free;
};

Masked apply_masks(const BarHingeModel& model, const std::vector<BoundaryCondition>& bcs) {
    Masked m;
    m.fixed.assign(model.dof(), 0);
    m.value = Eigen::VectorXd::Zero(model.dof());
    for (const auto& bc : bcs) {
        if (bc.node < 0 || bc.node >= static_cast<int>(model.nodes.size())) {
            throw Error(ErrorCode::InvalidArgument, "boundary condition on a missing node");
        }
        for (int a = 0; a < 3; ++a) {
            if (!bc.fixed[a]) continue;
            m.fixed[3 * bc.node + a] = 1;
            m.value[3 * bc.node + a] = bc.position[a];
        }
    }
    for (int i = 0; i < model.dof(); ++i) {
        if (!m.fixed[i]) m.free.push_back(i);
    }
    return m;
}

void require_rigid_support(const Eigen::VectorXd& x, const Masked& m) {
    std::vector<int> rows;
    for (int i = 0; i < static_cast<int>(m.fixed.size()); ++i) {
        if (m.fixed[i]) rows.push_back(i);
    }
    if (rows.empty()) throw Error(ErrorCode::UnderConstrained, "no boundary conditions");
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    const int n = static_cast<int>(x.size() / 3);
    for (int i = 0; i < n; ++i) c += x.segment<3>(3 * i);
    c /= n;
    double scale = 1.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, (x.segment<3>(3 * i) - c).norm());
    // Rigid modes restricted to the constrained dofs must have full rank.
    Eigen::MatrixXd R(rows.size(), 6);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int node = rows[r] / 3;
        const int axis = rows[r] % 3;
        const Eigen::Vector3d p = (x.segment<3>(3 * node) - c) / scale;
        R.row(r).setZero();
        R(r, axis) = 1.0;
        for (int w = 0; w < 3; ++w) R(r, 3 + w) = Eigen::Vector3d::Unit(w).cross(p)[axis];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
    const auto& s = svd.singularValues();
    if (s.size() < 6 || s[5] <= 1e-9 * s[0]) {
        throw Error(ErrorCode::UnderConstrained, "boundary conditions leave a rigid-body motion free");
    }
}

double free_norm(const Eigen::VectorXd& g, const std::vector<int>& free) {
    double s = 0.0;
    for (int i : free) s += g[i] * g[i];
    return std::sqrt(s);
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
    Eigen::VectorXd out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

// Newton steps with a finite-difference Hessian of the analytic gradient,
// used once L-BFGS can no longer make progress in floating point.
bool newton_polish(const BarHingeModel& model, Eigen::VectorXd& x, const std::vector<int>& free, double tol,
                   int& iterations) {
    const int nf = static_cast<int>(free.size());
    Eigen::VectorXd g;
    double e = energy(model, x, &g);
    for (int it = 0; it < 50; ++it) {
        double gn = free_norm(g, free);
        if (gn < tol) return true;
        const double h = 1e-6;
        Eigen::MatrixXd H(nf, nf);
        for (int j = 0; j < nf; ++j) {
            Eigen::VectorXd xp = x, xm = x;
            xp[free[j]] += h;
            xm[free[j]] -= h;
            H.col(j) = (gather(gradient(model, xp), free) - gather(gradient(model, xm), free)) / (2.0 * h);
        }
        H = 0.5 * (H + H.transpose());
        const Eigen::VectorXd gf = gather(g, free);
        bool moved = false;
        for (double shift = 0.0; shift < 1e8; shift = shift == 0.0 ? 1e-10 * H.diagonal().cwiseAbs().maxCoeff() + 1e-14 : shift * 10.0) {
            Eigen::MatrixXd A = H;
            A.diagonal().array() += shift;
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            if (llt.info() != Eigen::Success) continue;
            const Eigen::VectorXd step = llt.solve(-gf);
            Eigen::VectorXd xn = x;
            for (int i = 0; i < nf; ++i) xn[free[i]] += step[i];
            Eigen::VectorXd gnew;
            const double en = energy(model, xn, &gnew);
            if (free_norm(gnew, free) < gn && en <= e + 1e-13 * std::max(1.0, std::abs(e))) {
                x = xn;
                g = gnew;
                e = en;
                moved = true;
                break;
            }
        }
        ++iterations;
        if (!moved) return free_norm(g, free) < tol;
    }
    return free_norm(g, free) < tol;
}

}  // namespace

Equilibrium minimize_energy(const BarHingeModel& model, const std::vector<BoundaryCondition>& bcs,
                            const Eigen::VectorXd& start, const SolverOptions& options) {
    const Masked mask = apply_masks(model, bcs);
    Eigen::VectorXd x = start.size() == 0 ? model.rest_positions() : start;
    if (x.size() != model.dof()) throw Error(ErrorCode::InvalidArgument, "start vector size mismatch");
    for (int i = 0; i < model.dof(); ++i) {
        if (mask.fixed[i]) x[i] = mask.value[i];
    }
    require_rigid_support(x, mask);

    const auto& free = mask.free;
    const int nf = static_cast<int>(free.size());
    Eigen::VectorXd g;
    double f = energy(model, x, &g);
    Eigen::VectorXd gf = gather(g, free);
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;  // (s, y)
    int it = 0;
    bool stalled = false;
    double best_g = gf.norm();
    int since_best = 0;
    while (nf > 0 && gf.norm() >= options.gradient_tol && it < options.max_iter) {
        ++it;
        // Progress at roundoff level: hand over to Newton polishing.
        if (++since_best > 200) {
            stalled = true;
            break;
        }
        // Two-loop recursion.
        Eigen::VectorXd q = gf;
        std::vector<double> alpha(memory.size());
        for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
            const auto& [s, y] = memory[i];
            alpha[i] = s.dot(q) / y.dot(s);
            q -= alpha[i] * y;
        }
        if (!memory.empty()) {
            const auto& [s, y] = memory.back();
            q *= s.dot(y) / y.squaredNorm();
        } else {
            q /= std::max(1.0, gf.norm());
        }
        for (std::size_t i = 0; i < memory.size(); ++i) {
            const auto& [s, y] = memory[i];
            const double beta = y.dot(q) / y.dot(s);
            q += (alpha[i] - beta) * s;
        }
        Eigen::VectorXd d = -q;
        double slope = gf.dot(d);
        if (!(slope < 0.0)) {
            memory.clear();
            d = -gf / std::max(1.0, gf.norm());
            slope = gf.dot(d);
        }

        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd xn, gn_full;
        double fn = f;
        for (int ls = 0; ls < 60; ++ls) {
            xn = x;
            for (int i = 0; i < nf; ++i) xn[free[i]] += step * d[i];
            fn = energy(model, xn, &gn_full);
            if (std::isfinite(fn) && fn <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!memory.empty()) {
                memory.clear();
                continue;
            }
            stalled = true;
            break;
        }
        const Eigen::VectorXd gfn = gather(gn_full, free);
        Eigen::VectorXd s = step * d;
        Eigen::VectorXd y = gfn - gf;
        if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
            memory.emplace_back(std::move(s), std::move(y));
            if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
        }
        x = xn;
        f = fn;
        g = gn_full;
        gf = gfn;
        if (gf.norm() < 0.5 * best_g) {
            best_g = gf.norm();
            since_best = 0;
        }
    }
    if (nf > 0 && gf.norm() >= options.gradient_tol && (stalled || it >= options.max_iter)) {
        if (!newton_polish(model, x, free, options.gradient_tol, it)) {
            std::ostringstream msg;
            msg << "gradient norm " << free_norm(gradient(model, x), free) << " N after " << it << " iterations";
            throw Error(ErrorCode::NoConvergence, msg.str());
        }
        f = energy(model, x, &g);
    }

    Equilibrium eq;
    eq.positions = x;
    eq.energy = f;
    eq.iterations = it;
    eq.gradient_norm = free_norm(g, free);
    for (const auto& bc : bcs) {
        Eigen::Vector3d r = Eigen::Vector3d::Zero();
        for (int a = 0; a < 3; ++a) {
            if (bc.fixed[a]) r[a] = g[3 * bc.node + a];
        }
        eq.reactions.push_back(r);
    }
    return eq;
}

TensileScenario end_ring_scenario(const TubeGeometry& tube) {
    TensileScenario s;
    const int n = tube.n_sides();
    const int last = tube.n_rings() - 1;
    Eigen::Vector3d c0 = Eigen::Vector3d::Zero(), c1 = Eigen::Vector3d::Zero();
    for (int k = 0; k < n; ++k) {
        s.fixed_nodes.push_back(tube.vertex_index(0, k));
        s.moved_nodes.push_back(tube.vertex_index(last, k));
        c0 += tube.mesh.vertices[tube.vertex_index(0, k)];
        c1 += tube.mesh.vertices[tube.vertex_index(last, k)];
    }
    s.axis = (c1 - c0).normalized();
    return s;
}

TensileScenario quarter_scenario(const TubeGeometry& tube, const BarHingeModel& model) {
    TensileScenario s = end_ring_scenario(tube);
    for (int i = 0; i < static_cast<int>(model.nodes.size()); ++i) {
        const auto& p = model.nodes[i];
        if (std::abs(p.x()) <= 1e-9) s.extra.push_back({i, Eigen::Vector3d(0, p.y(), p.z()), {true, false, false}});
        if (std::abs(p.y()) <= 1e-9) s.extra.push_back({i, Eigen::Vector3d(p.x(), 0, p.z()), {false, true, false}});
    }
    return s;
}

std::vector<TensilePoint> tensile_sweep(const BarHingeModel& model, const TensileScenario& scenario,
                                        const std::vector<double>& displacements, const SolverOptions& options) {
    if (!std::is_sorted(displacements.begin(), displacements.end())) {
        throw Error(ErrorCode::InvalidArgument, "displacements must be sorted ascending");
    }
    std::vector<TensilePoint> out;
    Eigen::VectorXd x = model.rest_positions();
    for (double u : displacements) {
        std::vector<BoundaryCondition> bcs;
        for (int n : scenario.fixed_nodes) bcs.push_back({n, model.nodes[n], scenario.fixed_axes});
        for (int n : scenario.moved_nodes) bcs.push_back({n, model.nodes[n] + u * scenario.axis, scenario.moved_axes});
        bcs.insert(bcs.end(), scenario.extra.begin(), scenario.extra.end());
        const Equilibrium eq = minimize_energy(model, bcs, x, options);
        TensilePoint p;
        p.displacement = u;
        p.energy = eq.energy;
        p.iterations = eq.iterations;
        p.gradient_norm = eq.gradient_norm;
        const std::size_t first_moved = scenario.fixed_nodes.size();
        for (std::size_t i = 0; i < scenario.moved_nodes.size(); ++i) {
            p.force += eq.reactions[first_moved + i].dot(scenario.axis);
        }
        p.positions = eq.positions;
        x = eq.positions;
        out.push_back(std::move(p));
    }
    return out;
}

void write_tensile_csv(const std::vector<TensilePoint>& curve, std::ostream& out) {
    out << "displacement_mm,force_N,energy_Nmm\n";
    char buf[160];
    for (const auto& p : curve) {
        const double f = std::abs(p.force) < 5e-13 ? 0.0 : p.force;
        const double e = std::abs(p.energy) < 5e-13 ? 0.0 : p.energy;
        std::snprintf(buf, sizeof buf, "%.6f,%.12f,%.12f\n", p.displacement, f, e);
        out << buf;
    }
}

}  // namespace oritube
