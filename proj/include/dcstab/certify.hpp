#pragma once

#include "dcstab/decomp.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dcstab {

/// Upper edge of the band certified by a line path of total resistance r_path.
[[nodiscard]] double line_band_limit(double r_path, double y_max, double tau);
/// Lower edge of the band certified by a shunt capacitor at the load bus.
[[nodiscard]] double cap_band_limit(double c, double y_max, double tau);
/// Strict lower bound on the load-bus capacitance that closes the gap between the two bands.
[[nodiscard]] double min_stabilizing_cap(double y_max, double tau, double r_path);
/// Strict upper bound on the line-path resistance for a given capacitance; 0 if none works.
[[nodiscard]] double max_path_resistance(double y_max, double tau, double c);

struct MiddlebrookResult {
    double ratio = 0.0;  // |Z_L| / |Z_path|
    double eta = 0.0;    // attenuation factor
    bool passes = false;
};

/// Series impedance of the path, sum of 1/y_e.
[[nodiscard]] Complex path_impedance(const Network& net, const LoadPath& path, double omega);
/// Re[e^{j phi} / Z_path]: the path treated as one lumped series element.
[[nodiscard]] double lumped_path_conductance(const Network& net, const LoadPath& path, double omega, double phi);
/// Throws ModelError when the rotation makes the path non-dissipative (eta <= 0).
[[nodiscard]] MiddlebrookResult middlebrook_ratio(const Network& net, const LoadPath& path, double omega, double phi);

enum class Method { path, direct, both };
enum class Verdict { certified, not_certified, invalid_input };
enum class PointStatus { certified, passive, uncovered };

[[nodiscard]] std::string_view to_string(Method m);
[[nodiscard]] std::string_view to_string(Verdict v);
[[nodiscard]] std::string_view to_string(PointStatus s);

struct CertOptions {
    Band band{1.0, 1e6};
    int points = 2000;
    double margin = 0.02;
    Method method = Method::path;
    /// When set: only phi = 0 below it, only negative rotations from it on.
    std::optional<double> phi_switch;
    BoundMode bound_mode = BoundMode::constant_bound;
    int bound_points = 4000;
    int interior_phi = 9;
    SearchLimits limits;
    /// Off for quick runs: skips the informational path search above every crossover.
    bool probe_passive_region = true;
};

struct LoadSummary {
    std::size_t load = 0;
    std::string id;
    double y_max = 0.0;
    double argmax = 0.0;
    bool argmax_at_edge = false;
    std::optional<double> crossover;
    /// Band edges read off the best standalone paths on the grid.
    std::optional<double> omega_line;  // last grid point of the phi = 0 band starting at band.lo
    std::optional<double> omega_cap;   // first grid point of the rotated band that reaches the crossover
    bool skipped = false;
    std::string note;
};

struct MarginSample {
    double omega = 0.0;
    std::size_t load = 0;
    Method method = Method::path;
    double g_pi = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // g_pi - bound
    double phi = 0.0;
};

struct FrequencyPoint {
    double omega = 0.0;
    double phi = 0.0;
    PointStatus status = PointStatus::uncovered;
    /// Above every crossover: whether a decomposition would also cover the full bound.
    bool path_covered = false;
    bool path_ok = false;
    bool direct_ok = false;
    std::string decomposition;  // "load:bus,bus,...;..." when a path certificate was used
    // Direct method quadratic forms at the minimizing eigenvector.
    double w = 0.0;
    double w_network = 0.0;
    double w_loads = 0.0;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct CertReport {
    Verdict verdict = Verdict::invalid_input;
    Method method = Method::path;
    CertOptions options;
    std::vector<LoadSummary> loads;
    std::vector<FrequencyPoint> points;
    std::vector<MarginSample> samples;
    PhiSchedule schedule;
    std::optional<double> phi_switch;
    std::vector<Interval> gaps;              // uncovered grid runs
    std::vector<Interval> passive_uncovered; // passive runs with no full-bound decomposition
    std::vector<double> tail_uncovered;      // checked frequencies above the band that fail
    std::vector<std::string> diagnostics;
};

[[nodiscard]] CertReport certify_path_method(const Network& net, const CertOptions& options);
[[nodiscard]] CertReport certify_direct_pd(const Network& net, const CertOptions& options);
/// Dispatches on options.method; `both` accepts a grid point if either certificate holds there.
[[nodiscard]] CertReport certify(const Network& net, const CertOptions& options);

/// Smallest eigenvalue of Re[e^{j phi}(Y_N + Y_L)] with the quadratic forms at its eigenvector.
struct DissipationEig {
    double lambda_min = 0.0;
    double w_network = 0.0;
    double w_loads = 0.0;
};
[[nodiscard]] DissipationEig dissipation_eigen(const Network& net, double omega, double phi, bool include_loads = true);

void write_text_report(std::ostream& out, const Network& net, const CertReport& report);
void write_csv_report(std::ostream& out, const Network& net, const CertReport& report);

}  // namespace dcstab
