#include "oritube/folding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "oritube/detail/angles.hpp"
#include "oritube/error.hpp"

namespace oritube {
namespace {

constexpr double kTieTol = 1e-12;

struct Mechanism {
    std::vector<int> group;     // per section edge
    std::vector<int> sign;      // per section edge
    std::vector<double> length; // per section edge
    std::vector<double> kappa;  // cos of each group's deployed slope
    std::vector<bool> tied;     // group ties with the reference
    int ref = 0;
    double kref = 1.0;          // |kappa| of the reference group
    double sin_alpha = 0.0;
    double L = 0.0;
    Eigen::Vector2d origin = Eigen::Vector2d::Zero();
};

Mechanism analyse(const TubeGeometry& tube) {
    const auto& cs = tube.spec.cross_section;
    const EdgeGroupReport rep = check_admissible(cs);
    if (!rep.admissible) throw Error(ErrorCode::InadmissibleSection, "tube section is not admissible");

    Mechanism m;
    const int n = static_cast<int>(cs.size());
    m.group.assign(n, 0);
    m.sign.assign(n, 1);
    m.length.resize(n);
    for (int k = 0; k < n; ++k) m.length[k] = cs.edge_length(k);
    for (int g = 0; g < static_cast<int>(rep.groups.size()); ++g) {
        const auto& grp = rep.groups[g];
        for (std::size_t i = 0; i < grp.edges.size(); ++i) {
            m.group[grp.edges[i]] = g;
            m.sign[grp.edges[i]] = grp.sign[i];
        }
        m.kappa.push_back(detail::cos_sin_deg(detail::rad2deg(grp.slope)).first);
    }
    for (int g = 1; g < static_cast<int>(m.kappa.size()); ++g) {
        if (std::abs(m.kappa[g]) > std::abs(m.kappa[m.ref]) + kTieTol) m.ref = g;
    }
    m.kref = std::abs(m.kappa[m.ref]);
    m.tied.assign(m.kappa.size(), false);
    int ties = 0;
    for (int g = 0; g < static_cast<int>(m.kappa.size()); ++g) {
        if (g != m.ref && std::abs(std::abs(m.kappa[g]) - m.kref) <= kTieTol) {
            m.tied[g] = true;
            ++ties;
        }
    }
    if (ties > 0 && m.kappa.size() >= 3) {
        throw Error(ErrorCode::NotOneDof,
                    "two slope groups make equal angles with the zigzag offset; the motion branches");
    }
    m.sin_alpha = detail::cos_sin_deg(tube.spec.alpha_deg).second;
    m.L = tube.spec.unit_length;
    m.origin = cs.vertices()[0];
    return m;
}

double phi_max(const Mechanism& m) { return std::acos(std::clamp(m.sin_alpha * m.kref, -1.0, 1.0)); }

// Vertices for reference angle phi. axial_flat forces the zero-height end exactly.
std::vector<Eigen::Vector3d> analytic_vertices(const TubeGeometry& tube, const Mechanism& m, double phi,
                                               bool axial_flat) {
    const int n = tube.n_sides();
    const double cphi = std::cos(phi);
    const double sphi = std::sin(phi);
    double P = m.L;
    double h = 0.0;
    if (!axial_flat) {
        P = m.L * m.sin_alpha * m.kref / cphi;
        h = std::sqrt(std::max(0.0, m.L * m.L - P * P));
    }

    std::vector<Eigen::Vector2d> dir(m.kappa.size());
    for (std::size_t g = 0; g < m.kappa.size(); ++g) {
        if (static_cast<int>(g) == m.ref) {
            dir[g] = Eigen::Vector2d((m.kappa[g] >= 0 ? 1.0 : -1.0) * cphi, sphi);
        } else if (m.tied[g]) {
            dir[g] = Eigen::Vector2d((m.kappa[g] >= 0 ? 1.0 : -1.0) * cphi, std::abs(sphi));
        } else {
            const double c = std::clamp(m.kappa[g] * cphi / m.kref, -1.0, 1.0);
            dir[g] = Eigen::Vector2d(c, std::sqrt(1.0 - c * c));
        }
    }

    std::vector<Eigen::Vector2d> ring(n);
    ring[0] = m.origin;
    for (int k = 0; k + 1 < n; ++k) ring[k + 1] = ring[k] + m.length[k] * m.sign[k] * dir[m.group[k]];

    std::vector<Eigen::Vector3d> out;
    out.reserve(static_cast<std::size_t>(tube.n_rings()) * n);
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    for (int j = 0; j < tube.n_rings(); ++j) {
        for (int k = 0; k < n; ++k) out.emplace_back(ring[k].x() + offset.x(), ring[k].y(), offset.z());
        offset += Eigen::Vector3d(j % 2 == 0 ? P : -P, 0.0, h);
    }
    return out;
}

double orientation_sign(const TubeGeometry& tube) {
    return tube.spec.cross_section.signed_area() >= 0 ? 1.0 : -1.0;
}

// Continuous dihedral: raw value unwrapped around a reference.
double unwrapped(double raw, double reference) { return reference + detail::wrap_pi(raw - reference); }

struct Analytic {
    Mechanism m;
    FoldRange range;
};

Analytic build_analytic(const TubeGeometry& tube) {
    Analytic a;
    a.m = analyse(tube);
    const Mechanism& m = a.m;
    FoldRange& r = a.range;
    r.reference_group = m.ref;
    const double pmax = phi_max(m);
    const bool tie = std::any_of(m.tied.begin(), m.tied.end(), [](bool b) { return b; });
    r.phi_lo = tie ? 0.0 : -pmax;
    r.phi_hi = pmax;
    r.collapse_lo = tie;
    r.phi_deployed = std::acos(std::clamp(m.kref, -1.0, 1.0));

    const int n = tube.n_sides();
    const std::vector<Eigen::Vector3d> dep = analytic_vertices(tube, m, r.phi_deployed, false);
    const int samples = 256;
    for (int k = 0; k < n; ++k) {
        if (m.group[(k + n - 1) % n] == m.group[k]) continue;
        const double rho_dep = driving_dihedral(tube, dep, k);
        std::vector<double> rho(samples + 1);
        for (int i = 0; i <= samples; ++i) {
            const double phi = r.phi_lo + (r.phi_hi - r.phi_lo) * i / samples;
            const bool flat = (i == samples) || (i == 0 && !tie);
            rho[i] = unwrapped(driving_dihedral(tube, analytic_vertices(tube, m, phi, flat), k), rho_dep);
        }
        const double span = rho.back() - rho.front();
        if (std::abs(span) < 1e-6) continue;
        bool monotone = true;
        for (int i = 0; i < samples && monotone; ++i) monotone = (rho[i + 1] - rho[i]) * span > -1e-12;
        if (!monotone) continue;
        r.driver_vertex = k;
        r.rho_lo = rho.front();
        r.rho_hi = rho.back();
        r.rho_deployed = rho_dep;
        r.t_deployed = (rho_dep - r.rho_lo) / span;
        return a;
    }
    throw Error(ErrorCode::NotOneDof, "no corner crease varies monotonically over the fold range");
}

double rho_of_phi(const TubeGeometry& tube, const Analytic& a, double phi) {
    const bool flat = phi >= a.range.phi_hi || (!a.range.collapse_lo && phi <= a.range.phi_lo);
    return unwrapped(driving_dihedral(tube, analytic_vertices(tube, a.m, phi, flat), a.range.driver_vertex),
                     a.range.rho_deployed);
}

double phi_of_t(const TubeGeometry& tube, const Analytic& a, double t) {
    const FoldRange& r = a.range;
    if (t <= 0.0) return r.phi_lo;
    if (t >= 1.0) return r.phi_hi;
    const double target = r.rho_lo + t * (r.rho_hi - r.rho_lo);
    const double dir = r.rho_hi > r.rho_lo ? 1.0 : -1.0;
    double lo = r.phi_lo, hi = r.phi_hi;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if ((rho_of_phi(tube, a, mid) - target) * dir < 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Eigen::Vector3d ring_centroid(const std::vector<Eigen::Vector3d>& v, int ring, int n) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (int k = 0; k < n; ++k) c += v[ring * n + k];
    return c / n;
}

double thinnest_extent(const std::vector<Eigen::Vector3d>& v) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : v) mean += p;
    mean /= static_cast<double>(v.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : v) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Eigen::Vector3d axis = es.eigenvectors().col(0);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : v) {
        const double s = axis.dot(p - mean);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    return hi - lo;
}

FoldedState make_state(const TubeGeometry& tube, double t, double phi, std::vector<Eigen::Vector3d> vertices,
                       int driver) {
    FoldedState s;
    s.t = t;
    s.phi = phi;
    s.mesh.vertices = std::move(vertices);
    s.mesh.faces = tube.mesh.faces;
    const int n = tube.n_sides();
    s.axial_length = (ring_centroid(s.mesh.vertices, tube.n_rings() - 1, n) - ring_centroid(s.mesh.vertices, 0, n)).norm();
    s.transverse_height = thinnest_extent(s.mesh.vertices);
    const VolumeResult vol = enclosed_volume(s.mesh);
    s.enclosed_volume = vol.volume;
    s.volume_from_hull = vol.from_hull;
    s.driving_dihedral = driving_dihedral(tube, s.mesh.vertices, driver);
    return s;
}

// ---------------------------------------------------------------------------
// Numerical continuation

struct Constraints {
    std::vector<std::array<int, 2>> bars;
    std::vector<double> rest;
    std::vector<std::array<int, 4>> quads;
    double scale2 = 1.0;
    const TubeGeometry* tube = nullptr;
    int driver = 0;
    double rho_target = 0.0;

    int size() const { return static_cast<int>(bars.size() + quads.size()) + 1; }

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const {
        Eigen::VectorXd c(size());
        int row = 0;
        auto p = [&](int i) { return x.segment<3>(3 * i); };
        for (std::size_t b = 0; b < bars.size(); ++b) c[row++] = (p(bars[b][1]) - p(bars[b][0])).norm() - rest[b];
        for (const auto& q : quads) {
            const Eigen::Vector3d a = p(q[1]) - p(q[0]);
            const Eigen::Vector3d b = p(q[2]) - p(q[0]);
            const Eigen::Vector3d d = p(q[3]) - p(q[0]);
            c[row++] = a.dot(b.cross(d)) / scale2;
        }
        std::vector<Eigen::Vector3d> v(x.size() / 3);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = p(static_cast<int>(i));
        c[row] = std::sqrt(scale2) * detail::wrap_pi(driving_dihedral(*tube, v, driver) - rho_target);
        return c;
    }
};

Constraints make_constraints(const TubeGeometry& tube, int driver) {
    Constraints c;
    c.tube = &tube;
    c.driver = driver;
    c.scale2 = tube.spec.unit_length * tube.spec.unit_length;
    const auto& v = tube.mesh.vertices;
    for (const auto& [e, faces] : edge_faces(tube.mesh.faces)) {
        c.bars.push_back({e.first, e.second});
        c.rest.push_back((v[e.second] - v[e.first]).norm());
    }
    for (const auto& q : tube.mesh.faces) {
        c.bars.push_back({q[0], q[2]});
        c.rest.push_back((v[q[2]] - v[q[0]]).norm());
        c.quads.push_back(q);
    }
    return c;
}

Eigen::VectorXd flatten(const std::vector<Eigen::Vector3d>& v) {
    Eigen::VectorXd x(3 * v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x.segment<3>(3 * i) = v[i];
    return x;
}

std::vector<Eigen::Vector3d> unflatten(const Eigen::VectorXd& x) {
    std::vector<Eigen::Vector3d> v(x.size() / 3);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = x.segment<3>(3 * i);
    return v;
}

Eigen::MatrixXd jacobian(const Constraints& c, const Eigen::VectorXd& x) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(c.size(), x.size());
    auto p = [&](int i) { return Eigen::Vector3d(x.segment<3>(3 * i)); };
    int row = 0;
    for (const auto& b : c.bars) {
        const Eigen::Vector3d u = (p(b[1]) - p(b[0])).normalized();
        J.block<1, 3>(row, 3 * b[1]) = u.transpose();
        J.block<1, 3>(row, 3 * b[0]) = -u.transpose();
        ++row;
    }
    for (const auto& q : c.quads) {
        const Eigen::Vector3d a = p(q[1]) - p(q[0]);
        const Eigen::Vector3d b = p(q[2]) - p(q[0]);
        const Eigen::Vector3d d = p(q[3]) - p(q[0]);
        const Eigen::Vector3d g1 = b.cross(d) / c.scale2;
        const Eigen::Vector3d g2 = d.cross(a) / c.scale2;
        const Eigen::Vector3d g3 = a.cross(b) / c.scale2;
        J.block<1, 3>(row, 3 * q[1]) += g1.transpose();
        J.block<1, 3>(row, 3 * q[2]) += g2.transpose();
        J.block<1, 3>(row, 3 * q[3]) += g3.transpose();
        J.block<1, 3>(row, 3 * q[0]) -= (g1 + g2 + g3).transpose();
        ++row;
    }
    // The dihedral row depends on four vertices only; central differences there.
    const TubeGeometry& tube = *c.tube;
    const int n = tube.n_sides();
    const int k = c.driver;
    std::vector<Eigen::Vector3d> v = unflatten(x);
    const double h = 1e-7 * std::sqrt(c.scale2);
    for (int idx : {tube.vertex_index(0, k), tube.vertex_index(0, (k + n - 1) % n), tube.vertex_index(0, k + 1),
                    tube.vertex_index(1, k)}) {
        for (int a = 0; a < 3; ++a) {
            const double keep = v[idx][a];
            v[idx][a] = keep + h;
            const double fp = driving_dihedral(tube, v, k);
            v[idx][a] = keep - h;
            const double fm = driving_dihedral(tube, v, k);
            v[idx][a] = keep;
            J(row, 3 * idx + a) = std::sqrt(c.scale2) * detail::wrap_pi(fp - fm) / (2.0 * h);
        }
    }
    return J;
}

bool gauss_newton(const Constraints& c, Eigen::VectorXd& x, const FoldOptions& opt) {
    for (int it = 0; it < opt.max_iter; ++it) {
        const Eigen::VectorXd r = c.eval(x);
        if (!r.allFinite()) return false;
        if (r.cwiseAbs().maxCoeff() < opt.tol) return true;
        const Eigen::VectorXd dx = jacobian(c, x).completeOrthogonalDecomposition().solve(-r);
        if (!dx.allFinite()) return false;
        x += dx;
    }
    return c.eval(x).cwiseAbs().maxCoeff() < opt.tol;
}

// Places ring 0 back in the section plane: vertex 0 at the section origin,
// the ring normal along +z and the first segment's sideways drift along +x.
std::vector<Eigen::Vector3d> canonical_frame(const TubeGeometry& tube, std::vector<Eigen::Vector3d> v) {
    const int n = tube.n_sides();
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    for (int k = 0; k < n; ++k) normal += v[k].cross(v[(k + 1) % n]);
    normal *= orientation_sign(tube);
    if (normal.norm() == 0.0) return v;
    normal.normalize();
    Eigen::Vector3d drift = ring_centroid(v, 1, n) - ring_centroid(v, 0, n);
    drift -= drift.dot(normal) * normal;
    if (drift.norm() == 0.0) return v;
    const Eigen::Vector3d ex = drift.normalized();
    const Eigen::Vector3d ey = normal.cross(ex);
    Eigen::Matrix3d R;
    R.row(0) = ex;
    R.row(1) = ey;
    R.row(2) = normal;
    const Eigen::Vector3d p0 = v[0];
    const Eigen::Vector2d origin = tube.spec.cross_section.vertices()[0];
    for (auto& p : v) p = R * (p - p0) + Eigen::Vector3d(origin.x(), origin.y(), 0.0);
    return v;
}

Eigen::VectorXd march(const Constraints& base, Eigen::VectorXd x, double t_from, double t_to, const FoldRange& r,
                      const FoldOptions& opt) {
    Constraints c = base;
    double t = t_from;
    double dt = opt.step;
    while (t != t_to) {
        const double tn = std::abs(t_to - t) <= dt ? t_to : t + std::copysign(dt, t_to - t);
        c.rho_target = r.rho_lo + tn * (r.rho_hi - r.rho_lo);
        Eigen::VectorXd trial = x;
        if (gauss_newton(c, trial, opt)) {
            x = trial;
            t = tn;
            dt = std::min(opt.step, 2.0 * dt);
        } else {
            dt *= 0.5;
            if (dt < opt.min_step) {
                std::ostringstream msg;
                msg << "continuation stalled at t = " << t << " (residual above " << opt.tol << " mm)";
                throw Error(ErrorCode::NoConvergence, msg.str());
            }
        }
    }
    return x;
}

bool is_end(double t) { return t <= 1e-12 || t >= 1.0 - 1e-12; }

void check_t(double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        std::ostringstream msg;
        msg << "fold parameter " << t << " outside [0, 1]";
        throw Error(ErrorCode::InvalidArgument, msg.str());
    }
}

}  // namespace

double driving_dihedral(const TubeGeometry& tube, const std::vector<Eigen::Vector3d>& v, int k) {
    const int n = tube.n_sides();
    const Eigen::Vector3d& p = v[tube.vertex_index(0, k)];
    const Eigen::Vector3d u = v[tube.vertex_index(0, (k + n - 1) % n)] - p;
    const Eigen::Vector3d w = v[tube.vertex_index(0, k + 1)] - p;
    const Eigen::Vector3d axis = (v[tube.vertex_index(1, k)] - p).normalized();
    const Eigen::Vector3d up = u - u.dot(axis) * axis;
    const Eigen::Vector3d wp = w - w.dot(axis) * axis;
    return std::atan2(-orientation_sign(tube) * up.cross(wp).dot(axis), up.dot(wp));
}

FoldRange fold_range(const TubeGeometry& tube) { return build_analytic(tube).range; }

FoldedState fold_configuration(const TubeGeometry& tube, double t, const FoldOptions& options) {
    check_t(t);
    const Analytic a = build_analytic(tube);
    const FoldRange& r = a.range;
    if (options.method == FoldMethod::Analytic || is_end(t)) {
        const double phi = phi_of_t(tube, a, t);
        const bool flat = t >= 1.0 - 1e-12 || (t <= 1e-12 && !r.collapse_lo);
        const double tt = t >= 1.0 - 1e-12 ? 1.0 : (t <= 1e-12 ? 0.0 : t);
        return make_state(tube, tt, phi, analytic_vertices(tube, a.m, phi, flat), r.driver_vertex);
    }
    const Constraints c = make_constraints(tube, r.driver_vertex);
    const Eigen::VectorXd x = march(c, flatten(tube.mesh.vertices), r.t_deployed, t, r, options);
    return make_state(tube, t, std::numeric_limits<double>::quiet_NaN(), canonical_frame(tube, unflatten(x)),
                      r.driver_vertex);
}

std::vector<FoldedState> fold_sweep(const TubeGeometry& tube, int n_steps, const FoldOptions& options) {
    if (n_steps < 2) throw Error(ErrorCode::InvalidArgument, "fold sweep needs at least 2 steps");
    std::vector<double> ts(n_steps);
    for (int i = 0; i < n_steps; ++i) ts[i] = static_cast<double>(i) / (n_steps - 1);
    std::vector<FoldedState> out(n_steps);
    if (options.method == FoldMethod::Analytic) {
        for (int i = 0; i < n_steps; ++i) out[i] = fold_configuration(tube, ts[i], options);
        return out;
    }
    // Continuation path: march outwards from the deployed state, one seed per grid point.
    const Analytic a = build_analytic(tube);
    const Constraints c = make_constraints(tube, a.range.driver_vertex);
    const Eigen::VectorXd start = flatten(tube.mesh.vertices);
    for (int dir : {1, -1}) {
        Eigen::VectorXd x = start;
        double t_prev = a.range.t_deployed;
        for (int k = 0; k < n_steps; ++k) {
            const int i = dir > 0 ? k : n_steps - 1 - k;
            if ((dir > 0) != (ts[i] >= a.range.t_deployed)) continue;
            if (is_end(ts[i])) {
                out[i] = fold_configuration(tube, ts[i], options);
                continue;
            }
            x = march(c, x, t_prev, ts[i], a.range, options);
            t_prev = ts[i];
            out[i] = make_state(tube, ts[i], std::numeric_limits<double>::quiet_NaN(),
                                canonical_frame(tube, unflatten(x)), a.range.driver_vertex);
        }
    }
    return out;
}

TriMesh cap_boundary_loops(const TriMesh& surface) {
    for (const auto& edges : boundary_loops(surface)) {
        std::set<int> members;
        for (const auto& [a, b] : edges) {
            members.insert(a);
            members.insert(b);
        }
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (int v : members) c += surface.vertices[v];
        c /= static_cast<double>(members.size());

        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        double scale = 0.0;
        for (int v : members) {
            const Eigen::Vector3d d = surface.vertices[v] - c;
            cov += d * d.transpose();
            scale = std::max(scale, d.norm());
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
        const Eigen::Vector3d axis = es.eigenvectors().col(0);
        double off_plane = 0.0;
        for (int v : members) off_plane = std::max(off_plane, std::abs(axis.dot(surface.vertices[v] - c)));
        const bool planar = off_plane <= 1e-9 * std::max(1.0, scale);

        Eigen::Vector3d total = Eigen::Vector3d::Zero();
        std::vector<Eigen::Vector3d> normals;
        for (const auto& [a, b] : edges) {
            normals.push_back((surface.vertices[a] - c).cross(surface.vertices[b] - c));
            total += normals.back();
        }
        bool star = true;
        for (const auto& nrm : normals) star = star && nrm.dot(total) >= -1e-12 * scale * scale * scale * scale;
        if (!planar && !star) {
            throw Error(ErrorCode::OpenSurface, "boundary loop is neither planar nor star-shaped");
        }
    }
    return fan_boundary_loops(surface);
}

VolumeResult enclosed_volume(const QuadMesh& surface) {
    VolumeResult r;
    try {
        r.volume = std::abs(signed_volume(cap_boundary_loops(triangulate(surface))));
    } catch (const Error& e) {
        if (e.code() != ErrorCode::OpenSurface) throw;
        r.volume = convex_hull_volume(surface.vertices);
        r.from_hull = true;
    }
    return r;
}

double enclosed_volume(const FoldedState& state) { return enclosed_volume(state.mesh).volume; }

double convex_hull_volume(const std::vector<Eigen::Vector3d>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 4) return 0.0;
    double scale = 0.0;
    for (const auto& p : pts) scale = std::max(scale, (p - pts[0]).norm());
    const double eps = 1e-12 * std::max(1.0, scale);

    int i1 = 0;
    for (int i = 0; i < n; ++i) {
        if ((pts[i] - pts[0]).norm() > (pts[i1] - pts[0]).norm()) i1 = i;
    }
    const Eigen::Vector3d line = pts[i1] - pts[0];
    if (line.norm() <= eps) return 0.0;
    int i2 = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
        const double d = line.cross(pts[i] - pts[0]).norm();
        if (d > best) best = d, i2 = i;
    }
    if (best / line.norm() <= eps) return 0.0;
    const Eigen::Vector3d plane = line.cross(pts[i2] - pts[0]).normalized();
    int i3 = 0;
    best = -1.0;
    for (int i = 0; i < n; ++i) {
        const double d = std::abs(plane.dot(pts[i] - pts[0]));
        if (d > best) best = d, i3 = i;
    }
    if (best <= eps) return 0.0;

    const Eigen::Vector3d inside = (pts[0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    std::vector<std::array<int, 3>> faces;
    auto add = [&](int a, int b, int c) {
        const Eigen::Vector3d nrm = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
        if (nrm.dot(inside - pts[a]) > 0) {
            faces.push_back({a, c, b});
        } else {
            faces.push_back({a, b, c});
        }
    };
    add(0, i1, i2);
    add(0, i1, i3);
    add(0, i2, i3);
    add(i1, i2, i3);

    for (int p = 0; p < n; ++p) {
        if (p == 0 || p == i1 || p == i2 || p == i3) continue;
        std::vector<char> visible(faces.size(), 0);
        bool any = false;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            const auto& q = faces[f];
            const Eigen::Vector3d nrm = (pts[q[1]] - pts[q[0]]).cross(pts[q[2]] - pts[q[0]]);
            if (nrm.dot(pts[p] - pts[q[0]]) > eps * nrm.norm()) visible[f] = any = true;
        }
        if (!any) continue;
        std::set<std::pair<int, int>> vis_edges;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (!visible[f]) continue;
            for (int i = 0; i < 3; ++i) vis_edges.insert({faces[f][i], faces[f][(i + 1) % 3]});
        }
        std::vector<std::array<int, 3>> kept;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (!visible[f]) kept.push_back(faces[f]);
        }
        for (const auto& [a, b] : vis_edges) {
            if (!vis_edges.count({b, a})) kept.push_back({a, b, p});
        }
        faces = std::move(kept);
    }
    double six_v = 0.0;
    for (const auto& f : faces) six_v += (pts[f[0]] - inside).dot((pts[f[1]] - inside).cross(pts[f[2]] - inside));
    return std::abs(six_v) / 6.0;
}

double extension_ratio(const FoldedState& state, const TubeGeometry& tube) {
    return state.axial_length / tube.deployed_length;
}

std::vector<Eigen::Vector3d> refold(const CreasePattern2D& pattern, const FoldedState& state) {
    std::vector<Eigen::Vector3d> out;
    out.reserve(pattern.source_vertex.size());
    for (int v : pattern.source_vertex) {
        if (v < 0 || v >= static_cast<int>(state.mesh.vertices.size())) {
            throw Error(ErrorCode::InvalidArgument, "pattern does not belong to this folded state");
        }
        out.push_back(state.mesh.vertices[v]);
    }
    return out;
}

RigidityResidual rigidity_residual(const TubeGeometry& tube, const FoldedState& state) {
    RigidityResidual r;
    const auto& ref = tube.mesh.vertices;
    const auto& cur = state.mesh.vertices;
    for (const auto& [e, faces] : edge_faces(tube.mesh.faces)) {
        r.edge = std::max(r.edge, std::abs((cur[e.second] - cur[e.first]).norm() - (ref[e.second] - ref[e.first]).norm()));
    }
    for (int f = 0; f < static_cast<int>(state.mesh.faces.size()); ++f) {
        r.planarity = std::max(r.planarity, planarity_residual(state.mesh, f));
    }
    return r;
}

void write_sweep_csv(const std::vector<FoldedState>& states, std::ostream& out) {
    out << "t,axial_length_mm,transverse_height_mm,volume_mm3\n";
    char buf[160];
    for (const auto& s : states) {
        std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.9f,%.9f\n", s.t, s.axial_length, s.transverse_height,
                      s.enclosed_volume);
        out << buf;
    }
}

}  // namespace oritube
