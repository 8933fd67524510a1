// oritube: command-line front end.
//
// Exit codes: 0 ok, 1 runtime error, 2 domain verdict (inadmissible section,
// unknown material), 64 usage.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oritube/characterization.hpp"
#include "oritube/error.hpp"
#include "oritube/export.hpp"
#include "oritube/folding.hpp"
#include "oritube/geometry.hpp"
#include "oritube/material.hpp"
#include "oritube/structural.hpp"

namespace fs = std::filesystem;
using namespace oritube;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdict = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    fs::path out = "out";
    std::uint64_t seed = 1;
    bool verbose = false;

    double section_a_mm = 15.0;
    double section_b_mm = 15.0;
    double theta1_deg = 0.0;
    double theta2_deg = 90.0;
    std::string section_vertices;
    double alpha_deg = 45.0;
    double unit_length_mm = 15.0;
    int n_units = 1;
    int n_vertical = 1;
    int n_horizontal = 1;
    int pattern_x = 1;
    int pattern_y = 1;
    int pattern_z = 1;

    double thickness_mm = 1.0;
    double crease_scale = 0.01;
    double displacement_start_mm = 0.0;
    double displacement_stop_mm = 2.0;
    double displacement_steps_mm = 0.25;

    // per command
    bool assembly = false;
    int n_steps = 21;
    double t_start = 0.0;
    double t_stop = 1.0;
    bool frames = false;
    std::string scenario = "clamped";
    fs::path input;
    double specimen_width_mm = 6.0;
    double specimen_thickness_mm = 3.2;
    double gauge_length_mm = 25.0;
    double speed_mm_per_min = 60.0;
    fs::path data_dir;
    fs::path catalog;
    std::string material_name;
};

void log(const Config& cfg, const std::string& msg) {
    if (cfg.verbose) std::cerr << "[oritube] " << msg << '\n';
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

CrossSection section_from(const Config& cfg) {
    if (cfg.section_vertices.empty()) {
        return make_quad_section(cfg.section_a_mm, cfg.section_b_mm, cfg.theta1_deg, cfg.theta2_deg);
    }
    // "u,v;u,v;..."
    std::vector<Eigen::Vector2d> pts;
    std::stringstream ss(cfg.section_vertices);
    std::string item;
    while (std::getline(ss, item, ';')) {
        double u = 0.0, v = 0.0;
        char comma = 0;
        std::stringstream is(item);
        if (!(is >> u >> comma >> v) || comma != ',') throw UsageError("bad section vertex '" + item + "'");
        pts.emplace_back(u, v);
    }
    return CrossSection(std::move(pts));
}

TubeSpec tube_from(const Config& cfg) {
    TubeSpec spec{section_from(cfg), cfg.alpha_deg, cfg.unit_length_mm, cfg.n_units};
    return spec;
}

fs::path prepare_out(const Config& cfg) {
    fs::create_directories(cfg.out);
    return cfg.out;
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    return f;
}

std::string edge_report(const CrossSection& cs, const EdgeGroupReport& r) {
    std::ostringstream o;
    o << "vertices: " << cs.size() << '\n';
    o << "groups: " << r.groups.size() << '\n';
    for (std::size_t g = 0; g < r.groups.size(); ++g) {
        const auto& grp = r.groups[g];
        o << "group " << g << ": slope_deg " << fmt("%.6f", grp.slope * 180.0 / std::numbers::pi) << " edges";
        for (std::size_t i = 0; i < grp.edges.size(); ++i) o << ' ' << (grp.sign[i] > 0 ? '+' : '-') << grp.edges[i];
        o << " positive_mm " << fmt("%.6f", grp.length_positive) << " negative_mm " << fmt("%.6f", grp.length_negative)
          << '\n';
    }
    for (const auto& v : r.violations) o << "violation: " << v << '\n';
    o << "verdict: " << (r.admissible ? "admissible" : "inadmissible") << '\n';
    return o.str();
}

int cmd_check(const Config& cfg) {
    const CrossSection cs = section_from(cfg);
    const EdgeGroupReport r = check_admissible(cs);
    std::cout << edge_report(cs, r);
    return r.admissible ? kExitOk : kExitVerdict;
}

int cmd_generate(const Config& cfg) {
    const TubeSpec spec = tube_from(cfg);
    const TubeGeometry tube = generate_tube(spec);
    const fs::path out = prepare_out(cfg);
    std::ostringstream rep;
    {
        auto f = open_out(out / "tube.stl", true);
        rep << "tube_stl_bytes: " << export_closed_stl(tube.mesh, f) << '\n';
    }
    const CreasePattern2D pattern = unroll_crease_pattern(tube);
    {
        auto f = open_out(out / "pattern.svg");
        rep << "pattern_svg_bytes: " << export_svg_pattern(pattern, f) << '\n';
    }
    std::size_t kinds[4] = {0, 0, 0, 0};
    for (const auto& c : tube.creases) ++kinds[static_cast<int>(c.kind)];
    rep << "vertices: " << tube.mesh.vertices.size() << '\n'
        << "faces: " << tube.mesh.faces.size() << '\n'
        << "creases_mountain: " << kinds[0] << '\n'
        << "creases_valley: " << kinds[1] << '\n'
        << "creases_flat: " << kinds[2] << '\n'
        << "creases_boundary: " << kinds[3] << '\n'
        << "deployed_length_mm: " << fmt("%.6f", tube.deployed_length) << '\n'
        << "pattern_cells: " << pattern.cells.size() << '\n'
        << "pattern_interior_creases: " << pattern.interior_crease_count() << '\n';
    if (cfg.assembly) {
        AssemblySpec as;
        as.tube = spec;
        as.n_vertical = cfg.n_vertical;
        as.n_horizontal = cfg.n_horizontal;
        as.pattern = {cfg.pattern_x, cfg.pattern_y, cfg.pattern_z};
        log(cfg, "assembling");
        const AssemblyGeometry a = assemble_bidirectional(as);
        rep << "assembly_vertices: " << a.mesh.vertices.size() << '\n'
            << "assembly_faces: " << a.mesh.faces.size() << '\n'
            << "assembly_tubes: " << a.tubes.size() << '\n'
            << "assembly_merged_vertices: " << a.merged_vertices << '\n'
            << "assembly_contact_vertices: " << a.contact_vertices << '\n'
            << "assembly_ambiguous_edges: " << a.ambiguous_edges.size() << '\n';
        for (Channel ch : {Channel::Direction1, Channel::Direction2}) {
            if (a.count(ch) == 0) continue;
            const std::string name = std::string("assembly_") + to_string(ch) + ".stl";
            auto f = open_out(out / name, true);
            rep << "assembly_" << to_string(ch) << "_stl_bytes: " << export_closed_stl(a.channel_mesh(ch), f) << '\n';
        }
    }
    auto f = open_out(out / "geometry.txt");
    f << rep.str();
    std::cout << rep.str();
    return kExitOk;
}

int cmd_fold(const Config& cfg) {
    if (cfg.t_start > cfg.t_stop) throw UsageError("t_start must not exceed t_stop");
    if (cfg.n_steps < 1 || (cfg.n_steps == 1 && cfg.t_start != cfg.t_stop)) {
        throw UsageError("n_steps must be >= 2 for a non-empty t range");
    }
    const TubeGeometry tube = generate_tube(tube_from(cfg));
    std::vector<FoldedState> states;
    for (int i = 0; i < cfg.n_steps; ++i) {
        const double t =
            cfg.n_steps == 1 ? cfg.t_start : cfg.t_start + (cfg.t_stop - cfg.t_start) * i / (cfg.n_steps - 1);
        log(cfg, "fold t = " + fmt("%.6f", t));
        states.push_back(fold_configuration(tube, t));
    }
    const fs::path out = prepare_out(cfg);
    {
        auto f = open_out(out / "fold_sweep.csv");
        write_sweep_csv(states, f);
    }
    if (cfg.frames) {
        fs::create_directories(out / "frames");
        for (std::size_t i = 0; i < states.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "fold_%03zu.stl", i);
            auto f = open_out(out / "frames" / name, true);
            export_closed_stl(states[i].mesh, f);
        }
    }
    double vmax = 0.0;
    for (const auto& s : states) vmax = std::max(vmax, s.enclosed_volume);
    std::cout << "states: " << states.size() << '\n' << "max_volume_mm3: " << fmt("%.6f", vmax) << '\n';
    return kExitOk;
}

int cmd_simulate(const Config& cfg) {
    if (!(cfg.displacement_steps_mm > 0.0)) throw UsageError("displacement_steps_mm must be positive");
    if (cfg.displacement_stop_mm < cfg.displacement_start_mm) {
        throw UsageError("displacement_stop_mm must not be below displacement_start_mm");
    }
    std::vector<double> us;
    for (int i = 0;; ++i) {
        const double u = cfg.displacement_start_mm + i * cfg.displacement_steps_mm;
        if (u > cfg.displacement_stop_mm + 1e-9) break;
        us.push_back(std::abs(u) < 1e-12 ? 0.0 : u);
    }
    const TubeGeometry tube = generate_tube(tube_from(cfg));
    const BarHingeModel model = build_bar_hinge(tube, kResinOgden, cfg.thickness_mm, cfg.crease_scale);
    TensileScenario sc;
    if (cfg.scenario == "clamped") {
        sc = end_ring_scenario(tube);
    } else if (cfg.scenario == "quarter") {
        sc = quarter_scenario(tube, model);
    } else {
        // End rings held along the z axis only; nothing stops a sideways drift.
        sc = end_ring_scenario(tube);
        sc.fixed_axes = {false, false, true};
        sc.moved_axes = {false, false, true};
    }
    log(cfg, "sweeping " + std::to_string(us.size()) + " displacements");
    const auto curve = tensile_sweep(model, sc, us);
    const fs::path out = prepare_out(cfg);
    {
        auto f = open_out(out / "tensile.csv");
        write_tensile_csv(curve, f);
    }
    if (cfg.frames) {
        fs::create_directories(out / "frames");
        for (std::size_t i = 0; i < curve.size(); ++i) {
            QuadMesh m = tube.mesh;
            for (std::size_t v = 0; v < m.vertices.size(); ++v) m.vertices[v] = curve[i].positions.segment<3>(3 * v);
            char name[32];
            std::snprintf(name, sizeof name, "sim_%03zu.stl", i);
            auto f = open_out(out / "frames" / name, true);
            export_closed_stl(m, f);
        }
    }
    std::ostringstream rep;
    rep << "scenario: " << cfg.scenario << '\n'
        << "nodes: " << model.nodes.size() << '\n'
        << "bars: " << model.bars.size() << '\n'
        << "crease_hinges: " << model.count(HingeKind::Crease) << '\n'
        << "panel_hinges: " << model.count(HingeKind::Panel) << '\n'
        << "youngs_modulus_mpa: " << fmt("%.6f", model.youngs_modulus) << '\n';
    bool converged = true;
    for (const auto& p : curve) {
        rep << "step u_mm " << fmt("%.6f", p.displacement) << " force_N " << fmt("%.9f", p.force) << " iterations "
            << p.iterations << " gradient_ok " << (p.gradient_norm < 1e-8 ? "yes" : "no") << '\n';
        converged = converged && p.gradient_norm < 1e-8;
    }
    rep << "converged: " << (converged ? "yes" : "no") << '\n';
    auto f = open_out(out / "simulate.txt");
    f << rep.str();
    std::cout << rep.str();
    return kExitOk;
}

int cmd_fit(const Config& cfg) {
    const fs::path input = cfg.input.empty() ? default_catalog_path().parent_path() / "utm_synthetic.csv" : cfg.input;
    SpecimenGeometry sp{cfg.specimen_width_mm, cfg.specimen_thickness_mm, cfg.gauge_length_mm, cfg.speed_mm_per_min};
    const StressStrainCurve curve = load_utm_csv(input, sp);
    log(cfg, "loaded " + std::to_string(curve.size()) + " samples, dropped " + std::to_string(curve.dropped));
    FitOptions opt;
    opt.seed = cfg.seed;
    const FitResult fit = fit_ogden(curve, {1e5, 2.0, 0.0}, opt);
    const fs::path out = prepare_out(cfg);
    std::ostringstream rep;
    write_fit_report(fit, rep);
    auto f = open_out(out / "fit_report.txt");
    f << rep.str();
    std::cout << rep.str();
    return kExitOk;
}

int cmd_analyze(const Config& cfg) {
    const fs::path dir = cfg.data_dir.empty() ? default_catalog_path().parent_path() : cfg.data_dir;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::IoFailure, dir.string() + " is not a directory");
    std::ostringstream rep;
    bool any = false;
    const fs::path out = prepare_out(cfg);

    if (fs::exists(dir / "force_trace.csv")) {
        const auto rec = load_experiment_csv(dir / "force_trace.csv");
        const auto s = force_summary(rec);
        rep << "max_force_N: " << fmt("%.3f", s.max_force) << '\n'
            << "pressure_at_max_kPa: " << fmt("%.3f", s.pressure_at_max) << '\n'
            << "time_at_max_s: " << fmt("%.3f", s.time_at_max) << '\n';
        PlotSeries series{"force", rec.time, rec.force, false};
        auto f = open_out(out / "force.svg");
        render_plot({series}, {"Blocked force", "time (s)", "force (N)"}, f);
        any = true;
    }
    if (fs::exists(dir / "step_response.csv")) {
        const auto rec = load_experiment_csv(dir / "step_response.csv");
        const auto m = step_response_metrics(rec);
        rep << "actuation_s: " << fmt("%.3f", m.actuation_s) << '\n'
            << "hold_s: " << fmt("%.3f", m.hold_s) << '\n'
            << "release_s: " << fmt("%.3f", m.release_s) << '\n'
            << "cycle_s: " << fmt("%.3f", m.cycle_s) << '\n'
            << "plateau_mm: " << fmt("%.3f", m.plateau_mm) << '\n';
        PlotSeries series{"displacement", rec.time, rec.displacement, false};
        auto f = open_out(out / "step.svg");
        render_plot({series}, {"Step response", "time (s)", "displacement (mm)"}, f);
        any = true;
    }
    if (fs::is_directory(dir / "pressure_displacement")) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir / "pressure_displacement")) {
            if (e.path().extension() == ".csv") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        if (!files.empty()) {
            std::vector<ExperimentRecord> recs;
            for (const auto& p : files) recs.push_back(load_experiment_csv(p));
            const auto pd = pressure_displacement(recs);
            rep << "pressure_records: " << pd.curve.size() << '\n'
                << "plateau_pressure_kPa: " << fmt("%.3f", pd.plateau_pressure) << '\n'
                << "max_displacement_mm: " << fmt("%.3f", pd.max_displacement) << '\n';
            PlotSeries series{"steady displacement", {}, {}, true};
            auto csv = open_out(out / "pressure_displacement.csv");
            csv << "pressure_kPa,displacement_mm\n";
            for (const auto& p : pd.curve) {
                series.x.push_back(p.pressure);
                series.y.push_back(p.displacement);
                csv << fmt("%.6f", p.pressure) << ',' << fmt("%.6f", p.displacement) << '\n';
            }
            auto f = open_out(out / "pressure_displacement.svg");
            render_plot({series}, {"Pressure and displacement", "pressure (kPa)", "displacement (mm)"}, f);
            any = true;
        }
    }
    if (fs::exists(dir / "trajectories.csv")) {
        const auto rounds = load_trajectory_csv(dir / "trajectories.csv");
        const auto dev = trajectory_dependency(rounds);
        rep << "trajectory_rounds: " << rounds.size() << '\n';
        for (const auto& d : dev) {
            rep << "direction_" << d.direction << "_rms_mm: " << fmt("%.4f", d.rms_mm) << '\n'
                << "direction_" << d.direction << "_deviation_pct: " << fmt("%.4f", d.normalized_pct) << '\n';
        }
        std::vector<PlotSeries> series;
        for (const auto& r : rounds) {
            series.push_back({"D" + std::to_string(r.direction) + " R" + std::to_string(r.round), r.x, r.y, false});
        }
        auto f = open_out(out / "trajectories.svg");
        render_plot(series, {"Tip trajectories", "x (mm)", "y (mm)"}, f);
        any = true;
    }
    if (!any) throw Error(ErrorCode::InsufficientData, "no experiment files in " + dir.string());
    auto f = open_out(out / "analysis.txt");
    f << rep.str();
    std::cout << rep.str();
    return kExitOk;
}

int cmd_materials(const Config& cfg) {
    const auto catalog = read_catalog(cfg.catalog.empty() ? default_catalog_path() : cfg.catalog);
    auto print = [](const MaterialEntry& e) {
        std::cout << "name: " << e.name << '\n'
                  << "shore_a: " << format_range(e.shore_a) << '\n'
                  << "tear_kN_per_m: " << format_range(e.tear_kn_per_m) << '\n'
                  << "tensile_MPa: " << format_range(e.tensile_mpa) << '\n'
                  << "elongation_pct: " << format_range(e.elongation_pct) << '\n'
                  << "viscosity_mPa_s: " << format_range(e.viscosity_mpa_s) << '\n'
                  << "problems: " << e.problems << '\n';
    };
    if (!cfg.material_name.empty()) {
        print(find_material(catalog, cfg.material_name));
        return kExitOk;
    }
    std::cout << "entries: " << catalog.size() << '\n';
    for (const auto& e : catalog) {
        std::cout << '\n';
        print(e);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    Config cfg;
    CLI::App app{"Origami tube actuator toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key = value file with any of the long options below");
    app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Seed for randomized steps")->capture_default_str();
    app.add_flag("--verbose", cfg.verbose, "Progress on stderr");

    const std::string design = "Design";
    app.add_option("--section_a_mm", cfg.section_a_mm)->group(design)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--section_b_mm", cfg.section_b_mm)->group(design)->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--theta1_deg", cfg.theta1_deg)->group(design)->capture_default_str();
    app.add_option("--theta2_deg", cfg.theta2_deg)->group(design)->capture_default_str();
    app.add_option("--section_vertices", cfg.section_vertices, "Polygon as u,v;u,v;... (overrides a, b, theta)")
        ->group(design);
    app.add_option("--alpha_deg", cfg.alpha_deg)->group(design)->capture_default_str();
    app.add_option("--unit_length_mm", cfg.unit_length_mm)->group(design)->capture_default_str();
    app.add_option("--n_units", cfg.n_units)->group(design)->capture_default_str();
    app.add_option("--n_vertical", cfg.n_vertical)->group(design)->capture_default_str();
    app.add_option("--n_horizontal", cfg.n_horizontal)->group(design)->capture_default_str();
    app.add_option("--pattern_x", cfg.pattern_x)->group(design)->capture_default_str();
    app.add_option("--pattern_y", cfg.pattern_y)->group(design)->capture_default_str();
    app.add_option("--pattern_z", cfg.pattern_z)->group(design)->capture_default_str();

    const std::string sim = "Simulation";
    app.add_option("--thickness_mm", cfg.thickness_mm)->group(sim)->capture_default_str();
    app.add_option("--crease_scale", cfg.crease_scale)->group(sim)->capture_default_str();
    app.add_option("--displacement_start_mm", cfg.displacement_start_mm)->group(sim)->capture_default_str();
    app.add_option("--displacement_stop_mm", cfg.displacement_stop_mm)->group(sim)->capture_default_str();
    app.add_option("--displacement_steps_mm", cfg.displacement_steps_mm, "Increment between displacements")
        ->group(sim)
        ->capture_default_str();

    auto* check = app.add_subcommand("check", "Cross-section admissibility; exit 2 when inadmissible");
    auto* generate = app.add_subcommand("generate", "Tube STL, crease pattern SVG and geometry report");
    generate->add_flag("--assembly", cfg.assembly, "Also build the bi-directional assembly");
    auto* fold = app.add_subcommand("fold", "Rigid-folding sweep CSV");
    fold->add_option("--n_steps", cfg.n_steps)->capture_default_str();
    fold->add_option("--t_start", cfg.t_start)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    fold->add_option("--t_stop", cfg.t_stop)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    fold->add_flag("--frames", cfg.frames, "One STL per state");
    auto* simulate = app.add_subcommand("simulate", "Bar-and-hinge tensile sweep");
    simulate->add_option("--scenario", cfg.scenario, "clamped, quarter or axial")
        ->check(CLI::IsMember({"clamped", "quarter", "axial"}))
        ->capture_default_str();
    simulate->add_flag("--frames", cfg.frames, "One STL per displacement");
    auto* fit = app.add_subcommand("fit", "Ogden fit of a UTM CSV");
    fit->add_option("input", cfg.input, "CSV with time_s, force_N, elongation_mm (default: bundled synthetic test)");
    fit->add_option("--specimen_width_mm", cfg.specimen_width_mm)->capture_default_str();
    fit->add_option("--specimen_thickness_mm", cfg.specimen_thickness_mm)->capture_default_str();
    fit->add_option("--gauge_length_mm", cfg.gauge_length_mm)->capture_default_str();
    fit->add_option("--speed_mm_per_min", cfg.speed_mm_per_min)->capture_default_str();
    auto* analyze = app.add_subcommand("analyze", "Metrics and plots from experiment CSVs");
    analyze->add_option("data_dir", cfg.data_dir, "Directory with the experiment files (default: bundled data)");
    auto* materials = app.add_subcommand("materials", "Resin catalog; exit 2 for an unknown name");
    materials->add_option("name", cfg.material_name, "Entry to show (default: all)");
    materials->add_option("--catalog", cfg.catalog, "Catalog file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (check->parsed()) return cmd_check(cfg);
        if (generate->parsed()) return cmd_generate(cfg);
        if (fold->parsed()) return cmd_fold(cfg);
        if (simulate->parsed()) return cmd_simulate(cfg);
        if (fit->parsed()) return cmd_fit(cfg);
        if (analyze->parsed()) return cmd_analyze(cfg);
        if (materials->parsed()) return cmd_materials(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        if (e.code() == ErrorCode::UnknownMaterial) return kExitVerdict;
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitUsage;
}
