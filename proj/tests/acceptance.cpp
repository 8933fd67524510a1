// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "oritube/characterization.hpp"
#include "oritube/error.hpp"
#include "oritube/export.hpp"
#include "oritube/folding.hpp"
#include "oritube/material.hpp"
#include "oritube/structural.hpp"

using namespace oritube;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("oritube-acceptance-" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

// Runs the CLI with stdout and stderr captured to files next to (not inside) out.
int run_cli(const std::string& args, const fs::path& out, const fs::path& log) {
    const std::string cmd = std::string("\"") + ORITUBE_CLI + "\" " + args + " --out \"" + out.string() + "\" >\"" +
                            log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, double> read_report(const fs::path& p) {
    std::map<std::string, double> kv;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        try {
            kv[line.substr(0, colon)] = std::stod(line.substr(colon + 1));
        } catch (const std::exception&) {
        }
    }
    return kv;
}

TubeGeometry square_tube(int units) {
    TubeSpec s;
    s.n_units = units;
    return generate_tube(s);
}

// 1
Outcome admissibility() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    std::uniform_int_distribution<int> corner(0, 3);
    const auto t0 = Clock::now();
    int n = 0, agree = 0, admissible = 0;
    while (n < 1000) {
        auto p = oracle::random_parallelogram(rng);
        if (n % 2) {
            const double scale = (n % 4 == 1) ? 1.0 : 1e-3;
            p[corner(rng)] += scale * Eigen::Vector2d(jitter(rng), jitter(rng));
        }
        std::optional<CrossSection> cs;
        try {
            cs.emplace(p);
        } catch (const Error&) {
            continue;  // perturbation made the polygon self-intersect
        }
        const bool got = check_admissible(*cs).admissible;
        agree += got == oracle::admissible(p);
        admissible += got;
        ++n;
    }
    const double dt = seconds_since(t0);
    return {agree == n && dt < 1.0, fmt("%d/%d agree, %d admissible, %.3f s", agree, n, admissible, dt)};
}

// 2
Outcome rigid_fold() {
    const auto t0 = Clock::now();
    const auto tube = square_tube(3);
    const auto states = fold_sweep(tube, 101);
    double edge = 0.0, planar = 0.0, vmax = 0.0, asym = 0.0;
    for (const auto& s : states) {
        const auto r = oracle::panel_rigidity(tube.mesh, s.mesh.vertices);
        const auto lib = rigidity_residual(tube, s);
        edge = std::max({edge, r.distance, lib.edge});
        planar = std::max({planar, r.planarity, lib.planarity});
        vmax = std::max(vmax, s.enclosed_volume);
    }
    bool inside_positive = true;
    for (std::size_t i = 1; i + 1 < states.size(); ++i) inside_positive = inside_positive && states[i].enclosed_volume > 0;
    for (std::size_t i = 0; i < states.size(); ++i)
        asym = std::max(asym, std::abs(states[i].enclosed_volume - states[states.size() - 1 - i].enclosed_volume));
    const double ends = std::max(std::abs(states.front().enclosed_volume), std::abs(states.back().enclosed_volume));
    const double dt = seconds_since(t0);
    const bool ok = edge < 1e-9 && planar < 1e-9 && ends < 1e-9 * vmax && inside_positive && asym <= 1e-6 * vmax &&
                    dt < 30.0;
    return {ok, fmt("edge %.2e planarity %.2e end volume %.2e asymmetry %.2e of max %.1f mm^3, %.2f s", edge, planar,
                    ends, asym, vmax, dt)};
}

// 3
Outcome volume_oracle() {
    const auto tube = square_tube(3);
    const auto s = fold_configuration(tube, 0.5);
    std::vector<int> first, last;
    for (int k = 0; k < tube.n_sides(); ++k) {
        first.push_back(tube.vertex_index(0, k));
        last.push_back(tube.vertex_index(tube.n_rings() - 1, k));
    }
    const double mc = oracle::monte_carlo_volume(s.mesh.vertices, s.mesh.faces, {first, last}, 1000000, 99);
    const double rel = std::abs(s.enclosed_volume - mc) / mc;
    return {rel < 0.01, fmt("mesh %.2f vs Monte-Carlo %.2f mm^3 (%.3f %%)", s.enclosed_volume, mc, 100 * rel)};
}

// 4
Outcome fit_recovery() {
    constexpr double mu = 708211.0002, alpha = 2.33765815;
    auto curve = [&](double noise) {
        StressStrainCurve c;
        std::mt19937_64 rng(42);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            const double eps = 1.5 * i / 49.0, l = 1.0 + eps;
            c.strain.push_back(eps);
            c.stress.push_back(2 * mu / alpha * (std::pow(l, alpha - 1) - std::pow(l, -alpha / 2 - 1)) *
                               (1.0 + noise * g(rng)));
        }
        return c;
    };
    const auto t0 = Clock::now();
    const auto clean = fit_ogden(curve(0.0));
    const auto noisy = fit_ogden(curve(0.02));
    const double dt = seconds_since(t0);
    const double e_mu = std::abs(clean.params.mu1 / mu - 1), e_a = std::abs(clean.params.alpha1 / alpha - 1);
    const double n_mu = std::abs(noisy.params.mu1 / mu - 1), n_a = std::abs(noisy.params.alpha1 / alpha - 1);
    const bool ok = e_mu < 1e-3 && e_a < 1e-3 && n_mu < 0.02 && n_a < 0.02 && noisy.r2 > 0.99 && dt < 5.0;
    return {ok, fmt("noiseless %.1e/%.1e, 2%% noise %.2e/%.2e R2 %.5f, %.3f s", e_mu, e_a, n_mu, n_a, noisy.r2, dt)};
}

// 5
Outcome stress_energy() {
    const OgdenParams p = kResinOgden;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double l = 0.5 + 2.5 * i / 99.0, h = 1e-7;
        auto w = [&](double x) { return ogden_energy(p, x, 1 / std::sqrt(x), 1 / std::sqrt(x)); };
        const double fd = (w(l + h) - w(l - h)) / (2 * h);
        worst = std::max(worst, std::abs(uniaxial_stress(p, l) - fd) / std::abs(fd));
    }
    return {worst < 1e-6, fmt("max relative error %.2e", worst)};
}

// 6
Outcome gradient_check() {
    const auto model = build_bar_hinge(square_tube(3), kResinOgden);
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 0.3);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd x = model.rest_positions();
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += g(rng);
        const Eigen::VectorXd an = gradient(model, x);
        const Eigen::VectorXd fd =
            oracle::central_difference([&](const Eigen::VectorXd& y) { return energy(model, y); }, x, 1e-6);
        worst = std::max(worst, (an - fd).lpNorm<Eigen::Infinity>() / an.lpNorm<Eigen::Infinity>());
    }
    return {worst < 1e-6, fmt("max relative error %.2e over 100 states", worst)};
}

// 7
Outcome simulation_sanity() {
    const auto tube = square_tube(3);
    const auto quarter = build_bar_hinge(tube, kResinOgden);
    const auto zero = tensile_sweep(quarter, end_ring_scenario(tube), {0.0});
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
    const double rel = std::abs(q[1].force - f[1].force / 4) / (f[1].force / 4);
    const bool ok = std::abs(zero[0].force) < 1e-8 && q[1].force > 0 && rel < 0.02;
    return {ok, fmt("zero-displacement force %.1e N, quarter %.6f N vs full/4 %.6f N (%.3f %%)", zero[0].force,
                    q[1].force, f[1].force / 4, 100 * rel)};
}

// 8
Outcome characterization() {
    const fs::path out = scratch_dir() / "analyze";
    const int code = run_cli("analyze", out, scratch_dir() / "analyze.log");
    if (code != 0) return {false, fmt("analyze exited %d", code)};
    auto r = read_report(out / "analysis.txt");
    const double f = r["max_force_N"], p = r["pressure_at_max_kPa"], act = r["actuation_s"], cyc = r["cycle_s"];
    const double plat = r["plateau_pressure_kPa"], d1 = r["direction_1_deviation_pct"],
                 d2 = r["direction_2_deviation_pct"];
    const bool ok = std::abs(f - 42) <= 1 && std::abs(p + 94) <= 2 && std::abs(act - 2) <= 0.3 && cyc > 5 &&
                    std::abs(plat + 35) <= 3 && r.count("direction_1_deviation_pct") &&
                    r.count("direction_2_deviation_pct") && d1 < 5 && d2 < 5;
    return {ok, fmt("%.2f N at %.1f kPa, actuation %.2f s, cycle %.2f s, plateau %.1f kPa, deviation %.2f/%.2f %%", f,
                    p, act, cyc, plat, d1, d2)};
}

// 9
Outcome export_integrity() {
    const fs::path root = scratch_dir() / "export";
    fs::create_directories(root);
    const std::vector<std::string> runs{"generate --assembly", "generate --assembly --n_units 3", "fold --frames",
                                        "fold --frames --n_units 3", "simulate --frames"};
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string name = fmt("run%zu", i);
        if (run_cli(runs[i], root / name, root / (name + ".log")) != 0) return {false, runs[i] + " failed"};
    }
    int files = 0;
    std::vector<std::string> open, size_bad, trip_bad;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.path().extension() != ".stl") continue;
        ++files;
        const std::string bytes = slurp(e.path());
        std::istringstream in(bytes);
        const auto tris = read_stl(in);
        if (bytes.size() != stl_size(tris.size())) size_bad.push_back(e.path().filename().string());
        std::ostringstream again;
        write_stl(tris, again, bytes.substr(0, 80));
        if (again.str() != bytes) trip_bad.push_back(e.path().filename().string());
        if (!edge_incidence(stl_to_mesh(tris)).closed()) open.push_back(fs::relative(e.path(), root).string());
    }
    std::sort(open.begin(), open.end());
    std::string detail = fmt("%d STL files, %zu not watertight, %zu size mismatches, %zu round-trip mismatches", files,
                             open.size(), size_bad.size(), trip_bad.size());
    if (!open.empty()) {
        detail += " (not watertight:";
        for (const auto& o : open) detail += " " + o;
        detail += ")";
    }
    return {files > 0 && open.empty() && size_bad.empty() && trip_bad.empty(), detail};
}

// 10
Outcome determinism() {
    const std::vector<std::string> commands{"check",    "generate --assembly", "fold --frames", "simulate --frames",
                                            "fit",      "analyze",             "materials",     "materials \"Carbon SIL30\""};
    int compared = 0;
    std::vector<std::string> differ;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::string listing[2], log[2];
        for (int run = 0; run < 2; ++run) {
            const fs::path out = scratch_dir() / "determinism" / fmt("cmd%zu_run%d", c, run);
            const fs::path log_path = scratch_dir() / "determinism" / fmt("cmd%zu_run%d.log", c, run);
            fs::create_directories(log_path.parent_path());
            const int code = run_cli(commands[c] + " --seed 7", out, log_path);
            log[run] = std::to_string(code) + "\n" + slurp(log_path);
            // the output directory name differs between runs
            for (std::size_t at; (at = log[run].find(out.string())) != std::string::npos;)
                log[run].replace(at, out.string().size(), "<out>");
            if (fs::exists(out)) {
                std::vector<fs::path> files;
                for (const auto& e : fs::recursive_directory_iterator(out))
                    if (e.is_regular_file()) files.push_back(e.path());
                std::sort(files.begin(), files.end());
                for (const auto& f : files) {
                    listing[run] += fs::relative(f, out).string() + "\n" + slurp(f);
                    compared += run;
                }
            }
        }
        if (listing[0] != listing[1] || log[0] != log[1]) differ.push_back(commands[c]);
    }
    std::string detail = fmt("%zu commands, %d output files compared", commands.size(), compared);
    for (const auto& d : differ) detail += ", differs: " + d;
    return {differ.empty() && compared > 0, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"admissibility agrees with slope-grouping oracle", admissibility},
        {"rigid fold validity", rigid_fold},
        {"enclosed volume vs Monte-Carlo", volume_oracle},
        {"material fit recovery", fit_recovery},
        {"stress-energy consistency", stress_energy},
        {"bar-and-hinge gradient check", gradient_check},
        {"simulation sanity", simulation_sanity},
        {"characterization pipeline", characterization},
        {"export integrity", export_integrity},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << "  " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    fs::remove_all(scratch_dir());
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
