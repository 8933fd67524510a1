#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "oritube/characterization.hpp"
#include "oritube/error.hpp"

using namespace oritube;
namespace fs = std::filesystem;

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

fs::path data_dir() { return default_catalog_path().parent_path(); }

ExperimentRecord displacement_record(const oracle::Trace& tr, double pressure = -50.0) {
    ExperimentRecord r;
    r.time = tr.t;
    r.displacement = tr.d;
    r.pressure.assign(tr.t.size(), pressure);
    return r;
}

ExperimentRecord shifted(ExperimentRecord r, double dt) {
    for (auto& t : r.time) t += dt;
    return r;
}

// Midpoints inserted by linear interpolation.
ExperimentRecord doubled(const ExperimentRecord& r) {
    ExperimentRecord d;
    auto mid = [](const std::vector<double>& v, std::vector<double>& out) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.push_back(v[i]);
            if (i + 1 < v.size()) out.push_back(0.5 * (v[i] + v[i + 1]));
        }
    };
    mid(r.time, d.time);
    mid(r.pressure, d.pressure);
    if (r.has_displacement()) mid(r.displacement, d.displacement);
    if (r.has_force()) mid(r.force, d.force);
    return d;
}

ExperimentRecord with_flat_tail(ExperimentRecord r, int n) {
    const double dt = r.time[1] - r.time[0];
    for (int i = 1; i <= n; ++i) {
        r.time.push_back(r.time.back() + dt);
        r.pressure.push_back(0.0);
        if (r.has_displacement()) r.displacement.push_back(r.displacement.back());
        if (r.has_force()) r.force.push_back(r.force.back());
    }
    return r;
}

void expect_same_steps(const StepMetrics& a, const StepMetrics& b, double tol) {
    EXPECT_NEAR(a.actuation_s, b.actuation_s, tol);
    EXPECT_NEAR(a.hold_s, b.hold_s, tol);
    EXPECT_NEAR(a.release_s, b.release_s, tol);
    EXPECT_NEAR(a.cycle_s, b.cycle_s, tol);
}

std::vector<ExperimentRecord> bundled_pressure_records() {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(data_dir() / "pressure_displacement")) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<ExperimentRecord> recs;
    for (const auto& f : files) recs.push_back(load_experiment_csv(f));
    return recs;
}

}  // namespace

TEST(Force, TriangleWave) {
    ExperimentRecord r;
    for (int i = 0; i <= 600; ++i) {
        const double t = i * 0.01;
        r.time.push_back(t);
        r.pressure.push_back(-10.0 * t);
        r.force.push_back(10.0 - 10.0 * std::abs(t - 3.0) / 3.0);
    }
    const auto s = force_summary(r);
    EXPECT_NEAR(s.max_force, 10.0, 1e-12);
    EXPECT_NEAR(s.time_at_max, 3.0, 1e-9);
    EXPECT_NEAR(s.pressure_at_max, -30.0, 1e-9);

    const auto tail = force_summary(with_flat_tail(r, 50));
    EXPECT_EQ(tail.max_force, s.max_force);
    EXPECT_EQ(tail.pressure_at_max, s.pressure_at_max);
    const auto moved = force_summary(shifted(r, 12.5));
    EXPECT_NEAR(moved.max_force, s.max_force, 1e-12);
    EXPECT_NEAR(moved.time_at_max, s.time_at_max + 12.5, 1e-9);
}

TEST(Force, ZeroTrace) {
    ExperimentRecord r;
    r.time = {0.5, 1.0, 1.5};
    r.pressure = {-3.0, -4.0, -5.0};
    r.force = {0.0, 0.0, 0.0};
    const auto s = force_summary(r);
    EXPECT_EQ(s.max_force, 0.0);
    EXPECT_EQ(s.pressure_at_max, -3.0);
    r.force.clear();
    r.displacement = {0.0, 0.0, 0.0};
    EXPECT_EQ(code_of([&] { force_summary(r); }), ErrorCode::MissingColumn);
}

TEST(Step, Trapezoid) {
    const double dt = 0.01;
    const auto rec = displacement_record(oracle::trapezoid(1.0, 2.0, 1.0, 2.0, 3.0, 8.0, dt));
    const auto m = step_response_metrics(rec);
    EXPECT_NEAR(m.actuation_s, 2.0, dt);
    EXPECT_NEAR(m.hold_s, 1.0, dt);
    EXPECT_NEAR(m.release_s, 2.0, dt);
    EXPECT_NEAR(m.cycle_s, 5.0, dt);
    EXPECT_NEAR(m.start_s, 1.0, dt);
    EXPECT_NEAR(m.plateau_mm, 8.0, 1e-9);

    expect_same_steps(step_response_metrics(shifted(rec, 7.25)), m, 1e-9);
    expect_same_steps(step_response_metrics(doubled(rec)), m, 0.01 * m.cycle_s);
    expect_same_steps(step_response_metrics(with_flat_tail(rec, 200)), m, 0.0);
}

TEST(Step, NegativeExcursionIsFolded) {
    auto tr = oracle::trapezoid(0.5, 1.0, 1.0, 1.0, 1.0, 4.0, 0.01);
    for (auto& d : tr.d) d = 10.0 - d;
    const auto m = step_response_metrics(displacement_record(tr));
    EXPECT_NEAR(m.actuation_s, 1.0, 0.01);
    EXPECT_NEAR(m.plateau_mm, 4.0, 1e-9);
}

TEST(Step, IdealStep) {
    const double dt = 0.02;
    const auto m = step_response_metrics(displacement_record(oracle::trapezoid(1.0, 1e-9, 2.0, 1e-9, 1.0, 5.0, dt)));
    // within one sample period, up to rounding of the sample times
    EXPECT_LE(m.actuation_s, dt + 1e-9);
    EXPECT_LE(m.release_s, dt + 1e-9);
    EXPECT_NEAR(m.hold_s, 2.0, dt + 1e-9);
}

TEST(Step, NoPlateau) {
    ExperimentRecord flat = displacement_record(oracle::trapezoid(1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.1));
    EXPECT_EQ(code_of([&] { step_response_metrics(flat); }), ErrorCode::NoPlateau);
    // rises but never comes back
    ExperimentRecord open = displacement_record(oracle::trapezoid(1.0, 1.0, 10.0, 1.0, 0.0, 3.0, 0.1));
    open.time.resize(40);
    open.displacement.resize(40);
    open.pressure.resize(40);
    EXPECT_EQ(code_of([&] { step_response_metrics(open); }), ErrorCode::NoPlateau);
}

TEST(PressureDisplacement, SaturatingCurve) {
    const double dmax = 12.0, p0 = 9.0;
    std::vector<ExperimentRecord> recs;
    double spacing = 7.5;
    for (int k = 8; k >= 1; --k) {
        const double p = -spacing * k;
        ExperimentRecord r;
        for (int i = 0; i < 40; ++i) {
            r.time.push_back(0.1 * i);
            r.pressure.push_back(p);
            r.displacement.push_back(dmax * (1.0 - std::exp(p / p0)));
        }
        recs.push_back(r);
    }
    const auto pd = pressure_displacement(recs);
    ASSERT_EQ(pd.curve.size(), 8u);
    for (std::size_t i = 1; i < pd.curve.size(); ++i)
        EXPECT_LT(std::abs(pd.curve[i - 1].pressure), std::abs(pd.curve[i].pressure));
    EXPECT_NEAR(std::abs(pd.plateau_pressure), p0 * std::log(50.0), spacing);
    EXPECT_NEAR(pd.max_displacement, dmax * (1.0 - std::exp(-60.0 / p0)), 1e-9);

    const auto one = pressure_displacement({recs[3]});
    EXPECT_EQ(one.curve.size(), 1u);
    EXPECT_EQ(one.plateau_pressure, recs[3].pressure[0]);

    EXPECT_EQ(code_of([&] { pressure_displacement({recs[0], recs[0]}); }), ErrorCode::DuplicatePressure);
    EXPECT_EQ(code_of([] { pressure_displacement({}); }), ErrorCode::InsufficientData);
}

TEST(Trajectory, OffsetAndIdentical) {
    auto round = [](int dir, int idx, double dx) {
        TrajectoryRound r;
        r.direction = dir;
        r.round = idx;
        for (int i = 0; i <= 100; ++i) {
            const double s = i / 100.0;
            r.time.push_back(s * 3.0);
            r.x.push_back(20.0 * s + dx);
            r.y.push_back(5.0 * std::sin(3.0 * s));
        }
        return r;
    };
    const auto same = trajectory_dependency({round(1, 1, 0), round(1, 2, 0), round(1, 3, 0)});
    ASSERT_EQ(same.size(), 1u);
    EXPECT_NEAR(same[0].rms_mm, 0.0, 1e-12);
    EXPECT_EQ(same[0].rounds, 3);

    const auto off = trajectory_dependency({round(2, 1, 0), round(2, 2, 1.0)});
    EXPECT_NEAR(off[0].rms_mm, 1.0, 1e-9);
    EXPECT_NEAR(off[0].normalized_pct, 100.0 / off[0].path_length_mm, 1e-9);

    const auto m = resample_arc_length(round(1, 1, 0));
    EXPECT_EQ(m.rows(), 64);
    EXPECT_NEAR(m(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(m(63, 0), 20.0, 1e-12);

    EXPECT_EQ(code_of([&] { trajectory_dependency({round(1, 1, 0)}); }), ErrorCode::InsufficientRounds);
    EXPECT_EQ(code_of([&] { trajectory_dependency({round(1, 1, 0), round(1, 2, 0), round(2, 1, 0)}); }),
              ErrorCode::InsufficientRounds);
}

TEST(Trajectory, CsvErrors) {
    std::istringstream bad_dir("time_s,x_mm,y_mm,direction,round\n0,0,0,3,1\n");
    EXPECT_EQ(code_of([&] { load_trajectory_csv(bad_dir); }), ErrorCode::MalformedCsv);
    std::istringstream back("time_s,x_mm,y_mm,direction,round\n0,0,0,1,1\n1,1,0,1,1\n0.5,2,0,1,1\n");
    EXPECT_EQ(code_of([&] { load_trajectory_csv(back); }), ErrorCode::MalformedCsv);
}

TEST(Experiment, CsvErrors) {
    std::istringstream no_signal("time_s,pressure_kPa\n0,0\n1,0\n");
    EXPECT_EQ(code_of([&] { load_experiment_csv(no_signal); }), ErrorCode::MissingColumn);
    std::istringstream back("time_s,pressure_kPa,force_N\n0,0,0\n1,0,1\n1,0,2\n");
    EXPECT_EQ(code_of([&] { load_experiment_csv(back); }), ErrorCode::MalformedCsv);
}

TEST(Catalog, BundledEntries) {
    const auto cat = read_catalog(default_catalog_path());
    ASSERT_EQ(cat.size(), 8u);
    const auto& f39 = find_material(cat, "Resinone F39 T");
    EXPECT_EQ(f39.tensile_mpa, (ValueRange{7.9, 7.9}));
    EXPECT_EQ(f39.tear_kn_per_m, (ValueRange{47.2, 47.2}));
    EXPECT_EQ(f39.elongation_pct, (ValueRange{255.1, 255.1}));
    EXPECT_EQ(f39.problems, "Hard to post-cure");
    EXPECT_EQ(f39.shore_a, (ValueRange{60, 75}));
    const auto& sil = find_material(cat, "Carbon SIL30");
    EXPECT_FALSE(sil.tensile_mpa.has_value());
    EXPECT_EQ(sil.elongation_pct, (ValueRange{350, 350}));
    EXPECT_EQ(sil.problems, "Very Expensive");
    EXPECT_EQ(format_range(find_material(cat, "LUVOSINT X92A-2").tensile_mpa), "20-15");
    EXPECT_EQ(format_range(std::nullopt), "NA");
    EXPECT_EQ(code_of([&] { find_material(cat, "Unobtainium"); }), ErrorCode::UnknownMaterial);
}

TEST(Catalog, RoundTrip) {
    const auto cat = read_catalog(default_catalog_path());
    std::stringstream io;
    write_catalog(cat, io);
    const auto back = read_catalog(io);
    EXPECT_EQ(back, cat);
}

TEST(Plot, TwoPointsAndDeterminism) {
    const std::vector<PlotSeries> s{{"a", {0.0, 1.0}, {2.0, 3.0}, false}};
    std::ostringstream a, b;
    const std::size_t n = render_plot(s, {"t", "x", "y"}, a);
    render_plot(s, {"t", "x", "y"}, b);
    EXPECT_EQ(n, a.str().size());
    EXPECT_EQ(a.str(), b.str());
    const std::string svg = a.str();
    const std::regex poly("<polyline[^>]*points=\"([^\"]*)\"");
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, poly));
    const std::string pts = m[1];
    EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 2);
    EXPECT_EQ(std::count(svg.begin(), svg.end(), '<') - std::count(svg.begin(), svg.end(), '>') , 0);
    EXPECT_EQ(svg.find("<polyline", m.position(0) + 1), std::string::npos);
}

TEST(Plot, Errors) {
    std::ostringstream out;
    EXPECT_EQ(code_of([&] { render_plot({}, {}, out); }), ErrorCode::EmptySeries);
    EXPECT_EQ(code_of([&] { render_plot({{"e", {}, {}, false}}, {}, out); }), ErrorCode::EmptySeries);
}

TEST(Plot, NiceTicks) {
    const auto t = nice_ticks(0.0, 42.3);
    ASSERT_GE(t.size(), 3u);
    EXPECT_LE(t.front(), 0.0);
    EXPECT_GE(t.back(), 42.3);
    const double step = t[1] - t[0];
    const double mant = step / std::pow(10.0, std::floor(std::log10(step)));
    EXPECT_TRUE(std::abs(mant - 1) < 1e-9 || std::abs(mant - 2) < 1e-9 || std::abs(mant - 5) < 1e-9);
}

TEST(Bundled, ForceTrace) {
    const auto rec = load_experiment_csv(data_dir() / "force_trace.csv");
    const auto s = force_summary(rec);
    EXPECT_NEAR(s.max_force, 42.0, 1.0);
    EXPECT_NEAR(s.pressure_at_max, -94.0, 2.0);
    const auto ticks = nice_ticks(0.0, s.max_force);
    EXPECT_LE(ticks.front(), 0.0);
    EXPECT_GE(ticks.back(), 42.0);

    const auto d = force_summary(doubled(rec));
    EXPECT_NEAR(d.max_force, s.max_force, 0.01 * s.max_force);
    EXPECT_EQ(force_summary(with_flat_tail(rec, 30)).max_force, s.max_force);
}

TEST(Bundled, StepResponse) {
    const auto rec = load_experiment_csv(data_dir() / "step_response.csv");
    const auto m = step_response_metrics(rec);
    EXPECT_NEAR(m.actuation_s, 2.0, 0.3);
    EXPECT_NEAR(m.release_s, 2.0, 0.3);
    EXPECT_GT(m.cycle_s, 5.0);
    EXPECT_LT(m.cycle_s, 5.3);
    EXPECT_NEAR(steady_pressure(rec), 0.0, 1.0);
    expect_same_steps(step_response_metrics(doubled(rec)), m, 0.01 * m.cycle_s);
    expect_same_steps(step_response_metrics(shifted(rec, 3.0)), m, 1e-9);
    expect_same_steps(step_response_metrics(with_flat_tail(rec, 60)), m, 0.0);
}

TEST(Bundled, PressureDisplacement) {
    const auto pd = pressure_displacement(bundled_pressure_records());
    EXPECT_EQ(pd.curve.size(), 12u);
    EXPECT_NEAR(pd.plateau_pressure, -35.0, 3.0);
}

TEST(Bundled, Trajectories) {
    const auto rounds = load_trajectory_csv(data_dir() / "trajectories.csv");
    EXPECT_EQ(rounds.size(), 8u);
    const auto dev = trajectory_dependency(rounds);
    ASSERT_EQ(dev.size(), 2u);
    for (const auto& d : dev) {
        EXPECT_EQ(d.rounds, 4);
        EXPECT_LT(d.normalized_pct, 5.0) << "direction " << d.direction;
    }
}
