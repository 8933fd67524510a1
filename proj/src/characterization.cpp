#include "oritube/characterization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "oritube/detail/csv.hpp"
#include "oritube/error.hpp"

#ifndef ORITUBE_DATA_DIR
#define ORITUBE_DATA_DIR "data"
#endif

namespace oritube {
namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return in;
}

// Time at which s crosses `level` between samples i-1 and i.
double interpolate_crossing(const std::vector<double>& t, const std::vector<double>& s, std::size_t i,
                            double level) {
    if (i == 0 || s[i] == s[i - 1]) return t[i];
    const double f = (level - s[i - 1]) / (s[i] - s[i - 1]);
    return t[i - 1] + f * (t[i] - t[i - 1]);
}

double tail_mean(const std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t from = n - std::max<std::size_t>(1, n / 4);
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = from; i < n; ++i) {
        if (std::isnan(v[i])) continue;
        sum += v[i];
        ++count;
    }
    if (count == 0) throw Error(ErrorCode::InsufficientData, "no samples in the last quarter of the record");
    return sum / count;
}

std::string number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::optional<ValueRange> parse_range(const std::string& cell, int lineno) {
    if (cell == "NA") return std::nullopt;
    auto parse = [&](const std::string& s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !(v > 0.0)) {
            throw Error(ErrorCode::MalformedCsv,
                        "catalog line " + std::to_string(lineno) + ": '" + cell + "' is not a positive value or range");
        }
        return v;
    };
    const auto dash = cell.find('-');
    if (dash == std::string::npos) {
        const double v = parse(cell);
        return ValueRange{v, v};
    }
    return ValueRange{parse(detail::trim(cell.substr(0, dash))), parse(detail::trim(cell.substr(dash + 1)))};
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void ExperimentRecord::validate() const {
    const std::size_t n = time.size();
    if (pressure.size() != n || (has_displacement() && displacement.size() != n) || (has_force() && force.size() != n)) {
        throw Error(ErrorCode::MalformedCsv, "columns have different lengths");
    }
    if (!has_displacement() && !has_force()) {
        throw Error(ErrorCode::MissingColumn, "record needs a displacement_mm or force_N column");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(time[i])) throw Error(ErrorCode::MalformedCsv, "missing time value");
        if (i > 0 && !(time[i] > time[i - 1])) {
            throw Error(ErrorCode::MalformedCsv, "time must be strictly increasing (row " + std::to_string(i + 1) + ")");
        }
    }
}

ExperimentRecord load_experiment_csv(std::istream& in, const std::string& source) {
    const detail::CsvTable table = detail::read_csv(in);
    ExperimentRecord rec;
    rec.source = source;
    const int ct = table.require("time_s");
    const int cp = table.require("pressure_kPa");
    const int cd = table.column("displacement_mm");
    const int cf = table.column("force_N");
    for (const auto& row : table.rows) {
        rec.time.push_back(row[ct]);
        rec.pressure.push_back(row[cp]);
        if (cd >= 0) rec.displacement.push_back(row[cd]);
        if (cf >= 0) rec.force.push_back(row[cf]);
    }
    if (table.rows.empty()) throw Error(ErrorCode::InsufficientData, "record has no samples");
    if (cd < 0 && cf < 0) throw Error(ErrorCode::MissingColumn, "record needs a displacement_mm or force_N column");
    rec.validate();
    return rec;
}

ExperimentRecord load_experiment_csv(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return load_experiment_csv(in, path.filename().string());
}

ForceSummary force_summary(const ExperimentRecord& rec) {
    if (!rec.has_force()) throw Error(ErrorCode::MissingColumn, "column 'force_N' not found");
    rec.validate();
    std::size_t best = rec.size();
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (std::isnan(rec.force[i])) continue;
        if (best == rec.size() || rec.force[i] > rec.force[best]) best = i;
    }
    if (best == rec.size()) throw Error(ErrorCode::InsufficientData, "no force samples");

    ForceSummary out;
    out.max_force = rec.force[best];
    out.time_at_max = rec.time[best];
    double gap = kJoinWindow + 1e-12;
    bool found = false;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (std::isnan(rec.pressure[i])) continue;
        const double d = std::abs(rec.time[i] - out.time_at_max);
        if (d < gap) {
            gap = d;
            out.pressure_at_max = rec.pressure[i];
            found = true;
        }
    }
    if (!found) throw Error(ErrorCode::InsufficientData, "no pressure sample near the force peak");
    return out;
}

StepMetrics step_response_metrics(const ExperimentRecord& rec) {
    if (!rec.has_displacement()) throw Error(ErrorCode::MissingColumn, "column 'displacement_mm' not found");
    rec.validate();
    std::vector<double> t, s;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (std::isnan(rec.displacement[i])) continue;
        t.push_back(rec.time[i]);
        s.push_back(rec.displacement[i]);
    }
    if (s.size() < 3) throw Error(ErrorCode::NoPlateau, "fewer than 3 displacement samples");
    const double base = s.front();
    for (double& v : s) v -= base;
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    if (std::abs(*mn) > std::abs(*mx)) {
        for (double& v : s) v = -v;
    }
    const double peak = *std::max_element(s.begin(), s.end());
    if (!(peak > 0.0)) throw Error(ErrorCode::NoPlateau, "displacement never leaves its initial value");

    std::size_t a = s.size(), b = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] >= 0.95 * peak) {
            a = std::min(a, i);
            b = i;
        }
    }
    // median, so the ends of the ramps inside the window do not pull the level down
    std::vector<double> window(s.begin() + static_cast<std::ptrdiff_t>(a), s.begin() + static_cast<std::ptrdiff_t>(b) + 1);
    const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    std::nth_element(window.begin(), mid, window.end());
    const double plateau = *mid;

    const double lo = 0.1 * plateau;
    const double hi = 0.9 * plateau;
    std::size_t i10 = 0;
    while (i10 < s.size() && s[i10] < lo) ++i10;
    std::size_t i90 = i10;
    while (i90 < s.size() && s[i90] < hi) ++i90;
    std::size_t k90 = s.size(), k10 = s.size();
    for (std::size_t i = s.size(); i-- > 0;) {
        if (k90 == s.size() && s[i] >= hi) k90 = i;
        if (k10 == s.size() && s[i] >= lo) k10 = i;
    }
    if (i10 == 0 || i90 >= s.size()) throw Error(ErrorCode::NoPlateau, "no rise through 10 % and 90 % of the plateau");
    if (k10 + 1 >= s.size()) throw Error(ErrorCode::NoPlateau, "displacement does not return below 10 % of the plateau");

    const double t10 = interpolate_crossing(t, s, i10, lo);
    const double t90 = interpolate_crossing(t, s, i90, hi);
    const double f90 = interpolate_crossing(t, s, k90 + 1, hi);
    const double f10 = interpolate_crossing(t, s, k10 + 1, lo);
    StepMetrics m;
    m.plateau_mm = plateau;
    m.actuation_s = (t90 - t10) / 0.8;
    m.release_s = (f10 - f90) / 0.8;
    m.start_s = t10 - 0.1 * m.actuation_s;
    const double rise_end = t90 + 0.1 * m.actuation_s;
    const double fall_start = f90 - 0.1 * m.release_s;
    const double end = f10 + 0.1 * m.release_s;
    m.hold_s = fall_start - rise_end;
    m.cycle_s = end - m.start_s;
    return m;
}

double steady_displacement(const ExperimentRecord& rec) {
    if (!rec.has_displacement()) throw Error(ErrorCode::MissingColumn, "column 'displacement_mm' not found");
    if (rec.size() == 0) throw Error(ErrorCode::InsufficientData, "record has no samples");
    return tail_mean(rec.displacement);
}

double steady_pressure(const ExperimentRecord& rec) {
    if (rec.size() == 0) throw Error(ErrorCode::InsufficientData, "record has no samples");
    return tail_mean(rec.pressure);
}

PressureDisplacement pressure_displacement(const std::vector<ExperimentRecord>& recs) {
    if (recs.empty()) throw Error(ErrorCode::InsufficientData, "no records");
    PressureDisplacement out;
    for (const auto& r : recs) out.curve.push_back({steady_pressure(r), steady_displacement(r), r.source});
    std::stable_sort(out.curve.begin(), out.curve.end(), [](const PressurePoint& a, const PressurePoint& b) {
        return std::abs(a.pressure) < std::abs(b.pressure);
    });
    for (std::size_t i = 0; i < out.curve.size(); ++i) {
        for (std::size_t j = i + 1; j < out.curve.size(); ++j) {
            if (std::abs(out.curve[i].pressure - out.curve[j].pressure) < 1e-6) {
                throw Error(ErrorCode::DuplicatePressure, "records " + out.curve[i].source + " and " +
                                                              out.curve[j].source + " share pressure " +
                                                              number(out.curve[i].pressure) + " kPa");
            }
        }
    }
    for (const auto& p : out.curve) out.max_displacement = std::max(out.max_displacement, std::abs(p.displacement));
    for (const auto& p : out.curve) {
        if (std::abs(p.displacement) >= 0.98 * out.max_displacement) {
            out.plateau_pressure = p.pressure;
            break;
        }
    }
    return out;
}

std::vector<TrajectoryRound> load_trajectory_csv(std::istream& in) {
    const detail::CsvTable table = detail::read_csv(in);
    const int ct = table.require("time_s");
    const int cx = table.require("x_mm");
    const int cy = table.require("y_mm");
    const int cd = table.require("direction");
    const int cr = table.require("round");
    std::vector<TrajectoryRound> out;
    std::map<std::pair<int, int>, std::size_t> index;
    for (const auto& row : table.rows) {
        for (double v : row) {
            if (std::isnan(v)) throw Error(ErrorCode::MalformedCsv, "empty cell in trajectory data");
        }
        const int dir = static_cast<int>(row[cd]);
        const int round = static_cast<int>(row[cr]);
        if (row[cd] != dir || (dir != 1 && dir != 2)) throw Error(ErrorCode::MalformedCsv, "direction must be 1 or 2");
        if (row[cr] != round) throw Error(ErrorCode::MalformedCsv, "round must be an integer");
        auto [it, fresh] = index.try_emplace({dir, round}, out.size());
        if (fresh) {
            out.emplace_back();
            out.back().direction = dir;
            out.back().round = round;
        }
        auto& r = out[it->second];
        if (!r.time.empty() && !(row[ct] > r.time.back())) {
            throw Error(ErrorCode::MalformedCsv, "time must increase within a round");
        }
        r.time.push_back(row[ct]);
        r.x.push_back(row[cx]);
        r.y.push_back(row[cy]);
    }
    return out;
}

std::vector<TrajectoryRound> load_trajectory_csv(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return load_trajectory_csv(in);
}

Eigen::MatrixX2d resample_arc_length(const TrajectoryRound& r, int n) {
    if (r.x.empty() || n < 2) throw Error(ErrorCode::InsufficientData, "need a non-empty round and n >= 2");
    const std::size_t m = r.x.size();
    std::vector<double> s(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) s[i] = s[i - 1] + std::hypot(r.x[i] - r.x[i - 1], r.y[i] - r.y[i - 1]);
    Eigen::MatrixX2d out(n, 2);
    std::size_t seg = 1;
    for (int k = 0; k < n; ++k) {
        const double target = s.back() * k / (n - 1);
        while (seg < m - 1 && s[seg] < target) ++seg;
        if (m == 1 || s.back() == 0.0) {
            out.row(k) << r.x[0], r.y[0];
            continue;
        }
        const double span = s[seg] - s[seg - 1];
        const double f = span > 0.0 ? std::clamp((target - s[seg - 1]) / span, 0.0, 1.0) : 0.0;
        out.row(k) << r.x[seg - 1] + f * (r.x[seg] - r.x[seg - 1]), r.y[seg - 1] + f * (r.y[seg] - r.y[seg - 1]);
    }
    return out;
}

std::vector<DirectionDeviation> trajectory_dependency(const std::vector<TrajectoryRound>& rounds, int samples) {
    if (rounds.empty()) throw Error(ErrorCode::InsufficientRounds, "no trajectory rounds");
    std::vector<DirectionDeviation> out;
    for (int dir : {1, 2}) {
        std::vector<Eigen::MatrixX2d> paths;
        double length = 0.0;
        for (const auto& r : rounds) {
            if (r.direction != dir) continue;
            paths.push_back(resample_arc_length(r, samples));
            for (std::size_t i = 1; i < r.x.size(); ++i) length += std::hypot(r.x[i] - r.x[i - 1], r.y[i] - r.y[i - 1]);
        }
        if (paths.empty()) continue;
        if (paths.size() < 2) {
            throw Error(ErrorCode::InsufficientRounds,
                        "direction " + std::to_string(dir) + " has " + std::to_string(paths.size()) + " round");
        }
        DirectionDeviation d;
        d.direction = dir;
        d.rounds = static_cast<int>(paths.size());
        d.path_length_mm = length / static_cast<double>(paths.size());
        int pairs = 0;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            for (std::size_t j = i + 1; j < paths.size(); ++j) {
                d.rms_mm += std::sqrt((paths[i] - paths[j]).rowwise().squaredNorm().mean());
                ++pairs;
            }
        }
        d.rms_mm /= pairs;
        d.normalized_pct = d.path_length_mm > 0.0 ? 100.0 * d.rms_mm / d.path_length_mm : 0.0;
        out.push_back(d);
    }
    return out;
}

std::vector<MaterialEntry> read_catalog(std::istream& in) {
    std::vector<MaterialEntry> out;
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(detail::trim(cell));
        if (cells.size() != 7) {
            throw Error(ErrorCode::MalformedCsv, "catalog line " + std::to_string(lineno) + ": expected 7 fields");
        }
        MaterialEntry e;
        e.name = cells[0];
        const auto shore = parse_range(cells[1], lineno);
        if (!shore) throw Error(ErrorCode::MalformedCsv, "catalog line " + std::to_string(lineno) + ": shore hardness required");
        e.shore_a = *shore;
        e.tear_kn_per_m = parse_range(cells[2], lineno);
        e.tensile_mpa = parse_range(cells[3], lineno);
        e.elongation_pct = parse_range(cells[4], lineno);
        e.viscosity_mpa_s = parse_range(cells[5], lineno);
        e.problems = cells[6];
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<MaterialEntry> read_catalog(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return read_catalog(in);
}

std::string format_range(const std::optional<ValueRange>& v) {
    if (!v) return "NA";
    if (v->lo == v->hi) return number(v->lo);
    return number(v->lo) + "-" + number(v->hi);
}

void write_catalog(const std::vector<MaterialEntry>& catalog, std::ostream& out) {
    out << "name,shore_a,tear_kN_per_m,tensile_MPa,elongation_pct,viscosity_mPa_s,problems\n";
    for (const auto& e : catalog) {
        out << e.name << ',' << format_range(e.shore_a) << ',' << format_range(e.tear_kn_per_m) << ','
            << format_range(e.tensile_mpa) << ',' << format_range(e.elongation_pct) << ','
            << format_range(e.viscosity_mpa_s) << ',' << e.problems << '\n';
    }
}

const MaterialEntry& find_material(const std::vector<MaterialEntry>& catalog, const std::string& name) {
    for (const auto& e : catalog) {
        if (e.name == name) return e;
    }
    throw Error(ErrorCode::UnknownMaterial, "'" + name + "' is not in the catalog");
}

std::filesystem::path default_catalog_path() {
    if (const char* dir = std::getenv("ORITUBE_DATA_DIR")) return std::filesystem::path(dir) / "materials.csv";
    return std::filesystem::path(ORITUBE_DATA_DIR) / "materials.csv";
}

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
        lo -= pad;
        hi += pad;
    }
    const double raw = (hi - lo) / std::max(1, target - 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = 10.0 * mag;
    for (double f : {1.0, 2.0, 5.0}) {
        if (f * mag >= raw * (1.0 - 1e-12)) {
            step = f * mag;
            break;
        }
    }
    const long long k0 = static_cast<long long>(std::floor(lo / step + 1e-9));
    const long long k1 = static_cast<long long>(std::ceil(hi / step - 1e-9));
    std::vector<double> ticks;
    for (long long k = k0; k <= k1; ++k) {
        const double v = static_cast<double>(k) * step;
        ticks.push_back(v == 0.0 ? 0.0 : v);
    }
    return ticks;
}

std::size_t render_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes, std::ostream& out) {
    if (series.empty()) throw Error(ErrorCode::EmptySeries, "nothing to plot");
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size()) {
            throw Error(ErrorCode::EmptySeries, "series '" + s.label + "' has no points or mismatched lengths");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    const auto xt = nice_ticks(xmin, xmax);
    const auto yt = nice_ticks(ymin, ymax);
    const double W = 640, H = 400, left = 70, right = 160, top = 40, bottom = 55;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (x - xt.front()) / (xt.back() - xt.front()) * pw; };
    auto py = [&](double y) { return top + ph - (y - yt.front()) / (yt.back() - yt.front()) * ph; };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

    std::string svg;
    char buf[256];
    auto put = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        svg += buf;
    };
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    put("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%.0f\" height=\"%.0f\" "
        "viewBox=\"0 0 %.0f %.0f\" font-family=\"sans-serif\" font-size=\"11\">\n",
        W, H, W, H);
    put("<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n", W, H);
    svg += "<text x=\"" + number(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
           xml_escape(axes.title) + "</text>\n";
    put("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n", left, top,
        pw, ph);
    for (double v : xt) {
        put("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", px(v), top + ph, px(v),
            top + ph + 5);
        put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">%g</text>\n", px(v), top + ph + 18, v);
    }
    for (double v : yt) {
        put("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", left - 5, py(v), left,
            py(v));
        put("<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%g</text>\n", left - 8, py(v) + 4, v);
    }
    svg += "<text x=\"" + number(left + pw / 2) + "\" y=\"" + number(H - 12) + "\" text-anchor=\"middle\">" +
           xml_escape(axes.x_label) + "</text>\n";
    put("<text x=\"16\" y=\"%.2f\" text-anchor=\"middle\" transform=\"rotate(-90 16 %.2f)\">", top + ph / 2,
        top + ph / 2);
    svg += xml_escape(axes.y_label) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = palette[k % std::size(palette)];
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                put("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n", px(s.x[i]), py(s.y[i]), color);
            }
        } else {
            svg += "<polyline fill=\"none\" stroke=\"";
            svg += color;
            svg += "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                put(i == 0 ? "%.2f,%.2f" : " %.2f,%.2f", px(s.x[i]), py(s.y[i]));
            }
            svg += "\"/>\n";
        }
        const double ly = top + 12 + 18.0 * static_cast<double>(k);
        put("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"2\"/>\n",
            left + pw + 12, ly, left + pw + 32, ly, color);
        put("<text x=\"%.2f\" y=\"%.2f\">", left + pw + 38, ly + 4);
        svg += xml_escape(s.label) + "</text>\n";
    }
    svg += "</svg>\n";
    out << svg;
    return svg.size();
}

}  // namespace oritube
