#pragma once

// One-term Ogden hyperelasticity, W = (2 mu / alpha^2) (l1^alpha + l2^alpha + l3^alpha - 3).
// With this scaling the initial shear modulus is mu and Young's modulus 3 mu.
// Stresses are in Pa, lengths in mm, forces in N.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace oritube {

struct OgdenParams {
    double mu1 = 0.0;     // Pa
    double alpha1 = 0.0;
    double d1 = 0.0;      // 1/Pa, 0 = incompressible

    /// Throws InvalidMaterial.
    void validate() const;
    double youngs_modulus() const { return 3.0 * mu1; }
};

/// Elastic resin constants used throughout the examples and defaults.
inline constexpr OgdenParams kResinOgden{708211.0002, 2.33765815, 0.0};

/// Nominal stress for incompressible uniaxial tension, lateral stretches lambda^-1/2.
/// Throws Unsupported (d1 > 0), InvalidArgument (lambda <= 0.05).
double uniaxial_stress(const OgdenParams& p, double lambda);

/// Throws IncompressibilityViolated when d1 = 0 and |l1 l2 l3 - 1| >= 1e-9,
/// InvalidArgument for non-positive stretches.
double ogden_energy(const OgdenParams& p, double l1, double l2, double l3);

/// Dumbbell specimen; defaults follow a Type IV bar.
struct SpecimenGeometry {
    double width_mm = 6.0;
    double thickness_mm = 3.2;
    double gauge_length_mm = 25.0;
    double speed_mm_per_min = 60.0;
};

struct StressStrainCurve {
    std::vector<double> strain;  // engineering
    std::vector<double> stress;  // nominal, Pa
    SpecimenGeometry specimen;
    int dropped = 0;             // samples removed to keep strain strictly increasing

    std::size_t size() const { return strain.size(); }
};

/// Columns time_s, force_N, elongation_mm. Throws MalformedCsv, MissingColumn,
/// NonPositiveGeometry.
StressStrainCurve load_utm_csv(std::istream& in, const SpecimenGeometry& specimen);
StressStrainCurve load_utm_csv(const std::filesystem::path& path, const SpecimenGeometry& specimen);

/// Inverse of load_utm_csv for a curve sampled at constant crosshead speed.
void write_utm_csv(const StressStrainCurve& curve, std::ostream& out);

/// Curve from the model at n strains evenly spaced in [0, strain_max], with
/// optional multiplicative Gaussian noise of relative size noise.
StressStrainCurve synthetic_curve(const OgdenParams& p, double strain_max, int n, double noise = 0.0,
                                  std::uint64_t seed = 1, const SpecimenGeometry& specimen = {});

struct FitOptions {
    int max_iter = 500;
    int restarts = 10;
    std::uint64_t seed = 1;
};

struct FitResult {
    OgdenParams params;
    double rms_pa = 0.0;
    double r2 = 0.0;
    int iterations = 0;
    int start = 0;         // 0 = the supplied initial guess
    std::size_t n_points = 0;
};

/// Levenberg-Marquardt over (mu1, alpha1) with d1 = 0. Falls back to seeded
/// random restarts when the first start does not converge.
/// Throws InsufficientData (< 5 samples), NoConvergence.
FitResult fit_ogden(const StressStrainCurve& curve, const OgdenParams& init = {1e5, 2.0, 0.0},
                    const FitOptions& options = {});

/// key: value lines mu1_pa, alpha1, d1, rms_pa, r2, n_points.
void write_fit_report(const FitResult& fit, std::ostream& out);

}  // namespace oritube
