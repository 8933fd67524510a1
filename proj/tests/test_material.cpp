#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oritube/error.hpp"
#include "oritube/material.hpp"

using namespace oritube;

namespace {

constexpr double kMu = 708211.0002;
constexpr double kAlpha = 2.33765815;

ErrorCode code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

// dW/dlambda along (l, l^-1/2, l^-1/2), central difference.
double energy_slope(const OgdenParams& p, double l, double h = 1e-7) {
    auto w = [&](double x) { return ogden_energy(p, x, 1.0 / std::sqrt(x), 1.0 / std::sqrt(x)); };
    return (w(l + h) - w(l - h)) / (2 * h);
}

// Independent generator: stress from the energy derivative, written without the library's stress routine.
StressStrainCurve generated_curve(double mu, double alpha, int n, double noise, std::uint64_t seed) {
    StressStrainCurve c;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        const double eps = 1.5 * i / (n - 1);
        const double l = 1.0 + eps;
        const double w_prime = 2.0 * mu / alpha * (std::pow(l, alpha - 1) - std::pow(l, -alpha / 2 - 1));
        c.strain.push_back(eps);
        c.stress.push_back(w_prime * (1.0 + noise * gauss(rng)));
    }
    return c;
}

}  // namespace

TEST(Ogden, StressMatchesEnergyDerivative) {
    const OgdenParams p{kMu, kAlpha, 0.0};
    for (int i = 0; i < 100; ++i) {
        const double l = 0.5 + 2.5 * i / 99.0;
        const double fd = energy_slope(p, l);
        EXPECT_LT(std::abs(uniaxial_stress(p, l) - fd), 1e-6 * std::abs(fd)) << "lambda=" << l;
    }
}

TEST(Ogden, ReferenceValues) {
    const OgdenParams p{kMu, kAlpha, 0.0};
    EXPECT_EQ(uniaxial_stress(p, 1.0), 0.0);
    EXPECT_NEAR(uniaxial_stress(p, 1.5), energy_slope(p, 1.5), 1e-3);
    EXPECT_NEAR(uniaxial_stress(p, 1.5) / 1e6, 0.79, 0.01);
    EXPECT_NEAR(uniaxial_stress(p, 1.0 + 1e-6), 3 * kMu * 1e-6, 0.01 * 3 * kMu * 1e-6);
    EXPECT_EQ(ogden_energy(p, 1, 1, 1), 0.0);
    const double l = 1.7, m = 1.0 / std::sqrt(1.7);
    EXPECT_EQ(ogden_energy(p, l, m, m), ogden_energy(p, m, l, m));
    EXPECT_EQ(ogden_energy(p, 2.0, 0.8, 0.625), ogden_energy(p, 0.625, 2.0, 0.8));
}

TEST(Ogden, Errors) {
    EXPECT_EQ(code_of([] { uniaxial_stress({kMu, kAlpha, 1e-6}, 1.2); }), ErrorCode::Unsupported);
    EXPECT_EQ(code_of([] { ogden_energy({kMu, kAlpha, 0.0}, 1.1, 1.0, 1.0); }), ErrorCode::IncompressibilityViolated);
    EXPECT_EQ(code_of([] { uniaxial_stress({kMu, kAlpha, 0.0}, 0.01); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { uniaxial_stress({-1.0, kAlpha, 0.0}, 1.2); }), ErrorCode::InvalidMaterial);
}

TEST(Fit, RecoversNoiselessConstants) {
    const auto fit = fit_ogden(generated_curve(kMu, kAlpha, 50, 0.0, 1));
    EXPECT_NEAR(fit.params.mu1, kMu, 1e-3 * kMu);
    EXPECT_NEAR(fit.params.alpha1, kAlpha, 1e-3 * kAlpha);
    EXPECT_EQ(fit.params.d1, 0.0);
    EXPECT_GT(fit.r2, 0.999999);
    EXPECT_LE(fit.r2, 1.0);
    EXPECT_GE(fit.rms_pa, 0.0);
    EXPECT_EQ(fit.n_points, 50u);
}

TEST(Fit, RecoversNoisyConstants) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto fit = fit_ogden(generated_curve(kMu, kAlpha, 50, 0.02, seed));
        EXPECT_NEAR(fit.params.mu1, kMu, 0.02 * kMu) << "seed " << seed;
        EXPECT_NEAR(fit.params.alpha1, kAlpha, 0.02 * kAlpha) << "seed " << seed;
        EXPECT_GT(fit.r2, 0.99);
    }
}

TEST(Fit, ScaleConsistent) {
    auto curve = generated_curve(kMu, kAlpha, 50, 0.0, 1);
    const auto base = fit_ogden(curve);
    for (auto& s : curve.stress) s *= 3.5;
    const auto scaled = fit_ogden(curve);
    EXPECT_NEAR(scaled.params.mu1, 3.5 * base.params.mu1, 1e-3 * 3.5 * base.params.mu1);
    EXPECT_NEAR(scaled.params.alpha1, base.params.alpha1, 1e-3 * base.params.alpha1);
}

TEST(Fit, FarInitialGuess) {
    const auto fit = fit_ogden(generated_curve(kMu, kAlpha, 50, 0.0, 1), {5e3, 9.0, 0.0});
    EXPECT_NEAR(fit.params.mu1, kMu, 1e-3 * kMu);
}

TEST(Fit, InsufficientData) {
    const auto curve = generated_curve(kMu, kAlpha, 3, 0.0, 1);
    EXPECT_EQ(code_of([&] { fit_ogden(curve); }), ErrorCode::InsufficientData);
}

TEST(Utm, ArithmeticAndErrors) {
    std::istringstream in("time_s,force_N,elongation_mm\n0,0,0\n1,10,2.5\n2,12,5\n");
    const auto c = load_utm_csv(in, {6.0, 2.0, 25.0, 60.0});
    ASSERT_EQ(c.size(), 3u);
    EXPECT_NEAR(c.stress[1], 10.0 / 12e-6, 1e-6);
    EXPECT_NEAR(c.strain[1], 0.1, 1e-15);

    std::istringstream missing("time_s,force_N\n0,0\n");
    EXPECT_EQ(code_of([&] { load_utm_csv(missing, {}); }), ErrorCode::MissingColumn);
    std::istringstream bad("time_s,force_N,elongation_mm\n0,abc,0\n");
    EXPECT_EQ(code_of([&] { load_utm_csv(bad, {}); }), ErrorCode::MalformedCsv);
    std::istringstream ok("time_s,force_N,elongation_mm\n0,0,0\n");
    EXPECT_EQ(code_of([&] { load_utm_csv(ok, {6.0, 0.0, 25.0, 60.0}); }), ErrorCode::NonPositiveGeometry);
}

TEST(Utm, DropsNonMonotoneTail) {
    std::istringstream in("time_s,force_N,elongation_mm\n0,0,0\n1,5,1\n2,6,2\n3,4,1.5\n4,7,3\n");
    const auto c = load_utm_csv(in, {});
    EXPECT_EQ(c.dropped, 1);
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GT(c.strain[i], c.strain[i - 1]);
}

TEST(Utm, RoundTripThroughFit) {
    const auto curve = synthetic_curve(kResinOgden, 1.5, 50);
    std::stringstream io;
    write_utm_csv(curve, io);
    const auto back = load_utm_csv(io, curve.specimen);
    ASSERT_EQ(back.size(), curve.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_NEAR(back.strain[i], curve.strain[i], 1e-9);
        EXPECT_NEAR(back.stress[i], curve.stress[i], 1e-6 * std::max(1.0, curve.stress[i]));
    }
    const auto fit = fit_ogden(back);
    EXPECT_NEAR(fit.params.mu1, kMu, 1e-3 * kMu);
    EXPECT_NEAR(fit.params.alpha1, kAlpha, 1e-3 * kAlpha);
}

TEST(Fit, ReportFields) {
    const auto fit = fit_ogden(generated_curve(kMu, kAlpha, 20, 0.0, 1));
    std::ostringstream out;
    write_fit_report(fit, out);
    for (const char* key : {"mu1_pa", "alpha1", "d1", "rms_pa", "r2", "n_points"})
        EXPECT_NE(out.str().find(key), std::string::npos) << key;
}
