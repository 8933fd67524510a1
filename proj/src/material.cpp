#include "oritube/material.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "oritube/detail/csv.hpp"
#include "oritube/error.hpp"

namespace oritube {

void OgdenParams::validate() const {
    if (!(mu1 > 0.0) || !std::isfinite(mu1)) throw Error(ErrorCode::InvalidMaterial, "mu1 must be positive");
    if (alpha1 == 0.0 || !std::isfinite(alpha1)) throw Error(ErrorCode::InvalidMaterial, "alpha1 must be non-zero");
    if (!(d1 >= 0.0)) throw Error(ErrorCode::InvalidMaterial, "d1 must be non-negative");
}

double uniaxial_stress(const OgdenParams& p, double lambda) {
    p.validate();
    if (p.d1 > 0.0) throw Error(ErrorCode::Unsupported, "compressible uniaxial path is not implemented");
    if (!(lambda > 0.05)) throw Error(ErrorCode::InvalidArgument, "stretch must exceed 0.05");
    const double a = p.alpha1;
    return 2.0 * p.mu1 / a * (std::pow(lambda, a - 1.0) - std::pow(lambda, -0.5 * a - 1.0));
}

double ogden_energy(const OgdenParams& p, double l1, double l2, double l3) {
    p.validate();
    if (!(l1 > 0.0 && l2 > 0.0 && l3 > 0.0)) throw Error(ErrorCode::InvalidArgument, "stretches must be positive");
    if (p.d1 == 0.0 && std::abs(l1 * l2 * l3 - 1.0) >= 1e-9) {
        std::ostringstream msg;
        msg << "J = " << l1 * l2 * l3 << " for an incompressible material";
        throw Error(ErrorCode::IncompressibilityViolated, msg.str());
    }
    const double a = p.alpha1;
    double w = 2.0 * p.mu1 / (a * a) * (std::pow(l1, a) + std::pow(l2, a) + std::pow(l3, a) - 3.0);
    if (p.d1 > 0.0) {
        const double J = l1 * l2 * l3;
        w += (J - 1.0) * (J - 1.0) / p.d1;
    }
    return w;
}

StressStrainCurve load_utm_csv(std::istream& in, const SpecimenGeometry& specimen) {
    if (!(specimen.width_mm > 0.0) || !(specimen.thickness_mm > 0.0) || !(specimen.gauge_length_mm > 0.0)) {
        throw Error(ErrorCode::NonPositiveGeometry, "specimen width, thickness and gauge length must be positive");
    }
    const detail::CsvTable table = detail::read_csv(in);
    const int ct = table.require("time_s");
    const int cf = table.require("force_N");
    const int ce = table.require("elongation_mm");
    const double area_m2 = specimen.width_mm * specimen.thickness_mm * 1e-6;

    StressStrainCurve curve;
    curve.specimen = specimen;
    for (const auto& row : table.rows) {
        if (std::isnan(row[ct]) || std::isnan(row[cf]) || std::isnan(row[ce])) {
            throw Error(ErrorCode::MalformedCsv, "empty cell in a UTM row");
        }
        const double strain = row[ce] / specimen.gauge_length_mm;
        if (strain < 0.0 || (!curve.strain.empty() && strain <= curve.strain.back())) {
            ++curve.dropped;
            continue;
        }
        curve.strain.push_back(strain);
        curve.stress.push_back(row[cf] / area_m2);
    }
    return curve;
}

StressStrainCurve load_utm_csv(const std::filesystem::path& path, const SpecimenGeometry& specimen) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return load_utm_csv(in, specimen);
}

void write_utm_csv(const StressStrainCurve& curve, std::ostream& out) {
    const auto& s = curve.specimen;
    const double area_m2 = s.width_mm * s.thickness_mm * 1e-6;
    out << "time_s,force_N,elongation_mm\n";
    char buf[128];
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double elong = curve.strain[i] * s.gauge_length_mm;
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", elong / s.speed_mm_per_min * 60.0,
                      curve.stress[i] * area_m2, elong);
        out << buf;
    }
}

StressStrainCurve synthetic_curve(const OgdenParams& p, double strain_max, int n, double noise, std::uint64_t seed,
                                  const SpecimenGeometry& specimen) {
    if (n < 2 || !(strain_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "need n >= 2 and strain_max > 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    StressStrainCurve c;
    c.specimen = specimen;
    for (int i = 0; i < n; ++i) {
        const double e = strain_max * i / (n - 1);
        c.strain.push_back(e);
        c.stress.push_back(uniaxial_stress(p, 1.0 + e) * (1.0 + noise * gauss(rng)));
    }
    return c;
}

namespace {

struct Problem {
    std::vector<double> lambda;
    std::vector<double> target;  // stress / scale
};

// Residuals and Jacobian in scaled variables (m = mu / scale, a = alpha).
void evaluate(const Problem& pr, double m, double a, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    const int n = static_cast<int>(pr.lambda.size());
    r.resize(n);
    if (J) J->resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const double l = pr.lambda[i];
        const double ll = std::log(l);
        const double p1 = std::pow(l, a - 1.0);
        const double p2 = std::pow(l, -0.5 * a - 1.0);
        const double f = p1 - p2;
        r[i] = 2.0 * m / a * f - pr.target[i];
        if (J) {
            const double df = ll * p1 + 0.5 * ll * p2;
            (*J)(i, 0) = 2.0 * f / a;
            (*J)(i, 1) = 2.0 * m * (df / a - f / (a * a));
        }
    }
}

struct LmOutcome {
    double m = 0.0, a = 0.0, cost = 0.0;
    int iterations = 0;
    bool converged = false;
};

LmOutcome levenberg_marquardt(const Problem& pr, double m, double a, int max_iter) {
    LmOutcome o;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    evaluate(pr, m, a, r, &J);
    double cost = 0.5 * r.squaredNorm();
    double damping = 1e-3;
    for (int it = 1; it <= max_iter; ++it) {
        o.iterations = it;
        const Eigen::Vector2d g = J.transpose() * r;
        if (!std::isfinite(cost)) break;
        if (g.norm() < 1e-8) {
            o.converged = true;
            break;
        }
        const Eigen::Matrix2d H = J.transpose() * J;
        bool accepted = false;
        while (damping < 1e16) {
            Eigen::Matrix2d A = H;
            A.diagonal() += damping * H.diagonal().cwiseMax(1e-12);
            const Eigen::Vector2d step = A.ldlt().solve(-g);
            const double m2 = m + step[0];
            const double a2 = a + step[1];
            Eigen::VectorXd r2;
            if (std::isfinite(m2) && std::isfinite(a2) && std::abs(a2) > 1e-8) {
                evaluate(pr, m2, a2, r2, nullptr);
                const double c2 = 0.5 * r2.squaredNorm();
                if (std::isfinite(c2) && c2 <= cost) {
                    const bool tiny = std::abs(step[0]) <= 1e-10 * (std::abs(m) + 1e-10) &&
                                      std::abs(step[1]) <= 1e-10 * (std::abs(a) + 1e-10);
                    m = m2;
                    a = a2;
                    cost = c2;
                    evaluate(pr, m, a, r, &J);
                    damping = std::max(damping / 3.0, 1e-12);
                    accepted = true;
                    if (tiny) o.converged = true;
                    break;
                }
            }
            damping *= 4.0;
        }
        if (!accepted || o.converged) {
            // A stalled damping loop at a stationary point still counts as converged.
            if (!accepted) o.converged = g.norm() < 1e-6 * std::max(1.0, std::sqrt(2.0 * cost));
            break;
        }
    }
    o.m = m;
    o.a = a;
    o.cost = cost;
    return o;
}

}  // namespace

FitResult fit_ogden(const StressStrainCurve& curve, const OgdenParams& init, const FitOptions& options) {
    if (curve.size() < 5) {
        std::ostringstream msg;
        msg << "need at least 5 samples, got " << curve.size();
        throw Error(ErrorCode::InsufficientData, msg.str());
    }
    init.validate();
    double scale = 0.0;
    for (double s : curve.stress) scale = std::max(scale, std::abs(s));
    if (scale == 0.0) scale = 1.0;
    Problem pr;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        pr.lambda.push_back(1.0 + curve.strain[i]);
        pr.target.push_back(curve.stress[i] / scale);
    }

    std::vector<std::pair<double, double>> starts{{init.mu1 / scale, init.alpha1}};
    LmOutcome best = levenberg_marquardt(pr, starts[0].first, starts[0].second, options.max_iter);
    int best_start = 0;
    int total_iter = best.iterations;
    if (!best.converged) {
        std::mt19937_64 rng(options.seed);
        std::uniform_real_distribution<double> log_m(-2.0, 2.0);
        std::uniform_real_distribution<double> alpha(0.5, 8.0);
        std::bernoulli_distribution negative(0.25);
        bool any = false;
        for (int s = 1; s <= options.restarts; ++s) {
            const double m0 = std::pow(10.0, log_m(rng));
            const double a0 = alpha(rng) * (negative(rng) ? -1.0 : 1.0);
            const LmOutcome o = levenberg_marquardt(pr, m0, a0, options.max_iter);
            total_iter += o.iterations;
            if (o.converged && (!any || o.cost < best.cost)) {
                best = o;
                best_start = s;
                any = true;
            }
        }
        if (!any) throw Error(ErrorCode::NoConvergence, "Ogden fit did not converge from any start");
    }

    FitResult fit;
    fit.params = {best.m * scale, best.a, 0.0};
    fit.iterations = total_iter;
    fit.start = best_start;
    fit.n_points = curve.size();
    Eigen::VectorXd r;
    evaluate(pr, best.m, best.a, r, nullptr);
    r *= scale;
    fit.rms_pa = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
    double mean = 0.0;
    for (double s : curve.stress) mean += s;
    mean /= static_cast<double>(curve.size());
    double ss_tot = 0.0;
    for (double s : curve.stress) ss_tot += (s - mean) * (s - mean);
    fit.r2 = ss_tot > 0.0 ? 1.0 - r.squaredNorm() / ss_tot : (r.squaredNorm() == 0.0 ? 1.0 : 0.0);
    return fit;
}

void write_fit_report(const FitResult& fit, std::ostream& out) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "mu1_pa: %.6f\nalpha1: %.8f\nd1: %.1f\nrms_pa: %.6f\nr2: %.8f\nn_points: %zu\n",
                  fit.params.mu1, fit.params.alpha1, fit.params.d1, fit.rms_pa, fit.r2, fit.n_points);
    out << buf;
}

}  // namespace oritube
