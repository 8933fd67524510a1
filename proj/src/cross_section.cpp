#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "oritube/detail/angles.hpp"
#include "oritube/error.hpp"
#include "oritube/geometry.hpp"

namespace oritube {
namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

bool on_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::min(a.x(), b.x()) - 1e-12 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
           std::min(a.y(), b.y()) - 1e-12 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-12;
}

int orientation(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    const double v = cross2(b - a, c - a);
    const double scale = std::max({(b - a).norm(), (c - a).norm(), 1.0});
    if (std::abs(v) <= 1e-12 * scale * scale) return 0;
    return v > 0 ? 1 : -1;
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2, const Eigen::Vector2d& q1,
                        const Eigen::Vector2d& q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(q1, p1, p2)) return true;
    if (o2 == 0 && on_segment(q2, p1, p2)) return true;
    if (o3 == 0 && on_segment(p1, q1, q2)) return true;
    if (o4 == 0 && on_segment(p2, q1, q2)) return true;
    return false;
}

double fold_slope(double angle) {
    double s = std::fmod(angle, std::numbers::pi);
    if (s < 0) s += std::numbers::pi;
    if (s >= std::numbers::pi) s -= std::numbers::pi;
    return s;
}

}  // namespace

CrossSection::CrossSection(std::vector<Eigen::Vector2d> vertices) : vertices_(std::move(vertices)) {
    const std::size_t n = vertices_.size();
    if (n < 3) {
        throw Error(ErrorCode::DegeneratePolygon, "cross-section needs at least 3 vertices");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!vertices_[i].allFinite()) throw Error(ErrorCode::DegeneratePolygon, "non-finite vertex");
        if (edge(i).norm() <= kMinEdgeLength) {
            std::ostringstream msg;
            msg << "vertices " << i << " and " << (i + 1) % n << " coincide";
            throw Error(ErrorCode::DegeneratePolygon, msg.str());
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        // Adjacent edges may only share their common vertex.
        const Eigen::Vector2d e0 = edge(i);
        const Eigen::Vector2d e1 = edge((i + 1) % n);
        if (std::abs(cross2(e0, e1)) <= 1e-12 * e0.norm() * e1.norm() && e0.dot(e1) < 0) {
            throw Error(ErrorCode::DegeneratePolygon, "edge folds back onto its neighbour");
        }
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            if (segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j], vertices_[(j + 1) % n])) {
                std::ostringstream msg;
                msg << "edges " << i << " and " << j << " intersect";
                throw Error(ErrorCode::DegeneratePolygon, msg.str());
            }
        }
    }
}

Eigen::Vector2d CrossSection::edge(std::size_t i) const {
    return vertices_[(i + 1) % vertices_.size()] - vertices_[i % vertices_.size()];
}

double CrossSection::slope(std::size_t i) const {
    const Eigen::Vector2d e = edge(i);
    return fold_slope(std::atan2(e.y(), e.x()));
}

double CrossSection::perimeter() const {
    double p = 0.0;
    for (std::size_t i = 0; i < size(); ++i) p += edge_length(i);
    return p;
}

double CrossSection::signed_area() const {
    double a = 0.0;
    for (std::size_t i = 0; i < size(); ++i) a += cross2(vertices_[i], vertices_[(i + 1) % size()]);
    return 0.5 * a;
}

EdgeGroupReport check_admissible(const CrossSection& cs, double length_tol, double angle_tol) {
    if (!(length_tol > 0) || !(angle_tol > 0)) {
        throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
    }
    const int n = static_cast<int>(cs.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return cs.slope(a) < cs.slope(b); });

    std::vector<std::vector<int>> clusters;
    for (int idx : order) {
        if (!clusters.empty() && cs.slope(idx) - cs.slope(clusters.back().back()) <= angle_tol) {
            clusters.back().push_back(idx);
        } else {
            clusters.push_back({idx});
        }
    }
    // Slopes just below pi belong with slopes just above 0.
    if (clusters.size() > 1 &&
        cs.slope(clusters.front().front()) + std::numbers::pi - cs.slope(clusters.back().back()) <= angle_tol) {
        clusters.front().insert(clusters.front().end(), clusters.back().begin(), clusters.back().end());
        clusters.pop_back();
    }
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });

    EdgeGroupReport report;
    report.admissible = true;
    for (const auto& members : clusters) {
        EdgeGroup g;
        g.slope = cs.slope(members.front());
        const Eigen::Vector2d dir(std::cos(g.slope), std::sin(g.slope));
        for (int e : members) {
            const int s = cs.edge(e).dot(dir) >= 0 ? 1 : -1;
            g.edges.push_back(e);
            g.sign.push_back(s);
            (s > 0 ? g.length_positive : g.length_negative) += cs.edge_length(e);
        }
        const double deg = g.slope * 180.0 / std::numbers::pi;
        std::ostringstream msg;
        if (g.length_positive == 0.0 || g.length_negative == 0.0) {
            msg << "slope " << deg << " deg: edges run in one direction only";
            report.violations.push_back(msg.str());
            report.admissible = false;
        } else if (std::abs(g.length_positive - g.length_negative) > length_tol) {
            msg << "slope " << deg << " deg: opposing lengths " << g.length_positive << " vs "
                << g.length_negative;
            report.violations.push_back(msg.str());
            report.admissible = false;
        }
        report.groups.push_back(std::move(g));
    }
    return report;
}

CrossSection make_quad_section(double a, double b, double theta1_deg, double theta2_deg) {
    if (!(a > 0) || !(b > 0)) throw Error(ErrorCode::DegeneratePolygon, "side lengths must be positive");
    const double t1 = theta1_deg * std::numbers::pi / 180.0;
    const double t2 = theta2_deg * std::numbers::pi / 180.0;
    const double diff = fold_slope(t2 - t1);
    if (diff <= kDefaultAngleTol || std::numbers::pi - diff <= kDefaultAngleTol) {
        throw Error(ErrorCode::DegenerateAngles, "theta1 and theta2 are parallel");
    }
    const auto [c1, s1] = detail::cos_sin_deg(theta1_deg);
    const auto [c2, s2] = detail::cos_sin_deg(theta2_deg);
    const Eigen::Vector2d side_a = a * Eigen::Vector2d(c1, s1);
    const Eigen::Vector2d side_b = b * Eigen::Vector2d(c2, s2);
    return CrossSection({Eigen::Vector2d::Zero(), side_a, side_a + side_b, side_b});
}

}  // namespace oritube
