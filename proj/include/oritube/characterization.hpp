#pragma once

// Analysis of actuator experiment traces: force, step response,
// pressure-displacement, trajectory repeatability. Also the resin catalog
// and a small SVG plotter.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace oritube {

/// Columns time_s, pressure_kPa (gauge, negative = vacuum) and at least one
/// of displacement_mm, force_N. Blank cells are NaN.
struct ExperimentRecord {
    std::string source;
    std::vector<double> time;
    std::vector<double> pressure;
    std::vector<double> displacement;  // empty when the column is absent
    std::vector<double> force;         // empty when the column is absent

    std::size_t size() const { return time.size(); }
    bool has_displacement() const { return !displacement.empty(); }
    bool has_force() const { return !force.empty(); }
    /// Throws MalformedCsv (time not strictly increasing, ragged columns),
    /// MissingColumn (neither displacement nor force).
    void validate() const;
};

ExperimentRecord load_experiment_csv(std::istream& in, const std::string& source = "");
ExperimentRecord load_experiment_csv(const std::filesystem::path& path);

/// Nearest-time window for joining columns sampled on different rows.
inline constexpr double kJoinWindow = 0.05;

struct ForceSummary {
    double max_force = 0.0;        // N
    double pressure_at_max = 0.0;  // kPa
    double time_at_max = 0.0;      // s
};

/// Throws MissingColumn (no force column), InsufficientData (no pressure
/// sample within kJoinWindow of the peak).
ForceSummary force_summary(const ExperimentRecord& rec);

/// Rise and fall use the 10 % / 90 % crossings of the plateau level,
/// extrapolated to the full transition: duration = (t90 - t10) / 0.8, starting
/// 0.1 duration before t10. Hold is the gap between the end of the rise and
/// the start of the fall; cycle runs from the start of the rise to the end of
/// the fall. Displacement is taken relative to the first sample, sign-folded
/// so the excursion is positive.
struct StepMetrics {
    double actuation_s = 0.0;
    double hold_s = 0.0;
    double release_s = 0.0;
    double cycle_s = 0.0;
    double start_s = 0.0;
    double plateau_mm = 0.0;
};

/// Throws MissingColumn, NoPlateau (no excursion, or no return below 10 %).
StepMetrics step_response_metrics(const ExperimentRecord& rec);

/// Mean over the last quarter of the samples.
double steady_displacement(const ExperimentRecord& rec);
double steady_pressure(const ExperimentRecord& rec);

struct PressurePoint {
    double pressure = 0.0;      // kPa
    double displacement = 0.0;  // mm
    std::string source;
};

struct PressureDisplacement {
    std::vector<PressurePoint> curve;   // sorted by |pressure|
    double plateau_pressure = 0.0;      // smallest |p| reaching 98 % of the maximum
    double max_displacement = 0.0;      // largest |displacement|
};

/// Throws DuplicatePressure (two records within 1e-6 kPa), InsufficientData (empty).
PressureDisplacement pressure_displacement(const std::vector<ExperimentRecord>& recs);

struct TrajectoryRound {
    int direction = 1;  // 1 or 2
    int round = 1;
    std::vector<double> time;
    std::vector<double> x;  // mm
    std::vector<double> y;  // mm
};

/// Columns time_s, x_mm, y_mm, direction, round; one file may hold many rounds.
/// Throws MalformedCsv (bad direction, time not increasing within a round).
std::vector<TrajectoryRound> load_trajectory_csv(std::istream& in);
std::vector<TrajectoryRound> load_trajectory_csv(const std::filesystem::path& path);

/// n points evenly spaced in arc length (n x 2).
Eigen::MatrixX2d resample_arc_length(const TrajectoryRound& r, int n = 64);

struct DirectionDeviation {
    int direction = 0;
    int rounds = 0;
    double rms_mm = 0.0;          // mean over round pairs of the pointwise RMS distance
    double path_length_mm = 0.0;  // mean path length
    double normalized_pct = 0.0;  // 100 rms / path length
};

/// Throws InsufficientRounds (a direction present with fewer than 2 rounds,
/// or no rounds at all).
std::vector<DirectionDeviation> trajectory_dependency(const std::vector<TrajectoryRound>& rounds,
                                                      int samples = 64);

/// Single value or a range as printed in a datasheet, e.g. "60-75".
struct ValueRange {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const ValueRange&) const = default;
};

struct MaterialEntry {
    std::string name;
    ValueRange shore_a;
    std::optional<ValueRange> tear_kn_per_m;
    std::optional<ValueRange> tensile_mpa;
    std::optional<ValueRange> elongation_pct;
    std::optional<ValueRange> viscosity_mpa_s;
    std::string problems;

    bool operator==(const MaterialEntry&) const = default;
};

/// Comma-separated, header name,shore_a,tear_kN_per_m,tensile_MPa,
/// elongation_pct,viscosity_mPa_s,problems; "NA" marks a missing value.
std::vector<MaterialEntry> read_catalog(std::istream& in);
std::vector<MaterialEntry> read_catalog(const std::filesystem::path& path);
void write_catalog(const std::vector<MaterialEntry>& catalog, std::ostream& out);
std::string format_range(const std::optional<ValueRange>& v);

/// Case-sensitive name lookup. Throws UnknownMaterial.
const MaterialEntry& find_material(const std::vector<MaterialEntry>& catalog, const std::string& name);

/// Catalog shipped with the sources.
std::filesystem::path default_catalog_path();

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;  // scatter instead of a polyline
};

struct PlotAxes {
    std::string title;
    std::string x_label;
    std::string y_label;
};

/// Tick positions covering [lo, hi] at a 1-2-5 step.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

/// SVG 1.1 line or scatter plot; returns the number of bytes written.
/// Throws EmptySeries when there is no series or a series has no points.
std::size_t render_plot(const std::vector<PlotSeries>& series, const PlotAxes& axes, std::ostream& out);

}  // namespace oritube
