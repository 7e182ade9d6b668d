#pragma once

#include "dcstab/rational.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dcstab {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ideal constant power load linearized at its equilibrium terminal voltage.
struct CplLoad {
    double power = 0.0;    // W
    double voltage = 0.0;  // V

    [[nodiscard]] double conductance() const { return -power / (voltage * voltage); }
};

/// Averaged small-signal buck converter feeding a resistor, with a lead-lag voltage loop.
struct BuckParams {
    double v_in = 0.0;     // operating input voltage
    double r = 0.0;        // output load resistance
    double l = 0.0;
    double c = 0.0;
    double duty = 0.0;
    double gc_inf = 0.0;   // compensator midband gain
    double omega_l = 0.0;  // rad/s
    double omega_z = 0.0;  // rad/s
    double omega_p = 0.0;  // rad/s
    double h = 0.0;        // sensor gain
    double v_m = 0.0;      // PWM ramp amplitude
    double scale = 1.0;    // number of identical converters in parallel
};

struct LoopGain {
    Complex value;
    bool infinite_dc_gain = false;
};

class BuckLoad {
public:
    explicit BuckLoad(const BuckParams& p);

    [[nodiscard]] const BuckParams& params() const { return p_; }

    /// Plant gain G_0 = V/D, with V the declared converter voltage.
    [[nodiscard]] double plant_gain() const { return p_.v_in / p_.duty; }
    [[nodiscard]] double natural_frequency() const;
    [[nodiscard]] double damping() const;

    [[nodiscard]] LoopGain loop_gain(double omega) const;
    /// Closed-loop input admittance, built once as an exact polynomial ratio.
    [[nodiscard]] const RationalTF& admittance_tf() const { return y_; }
    [[nodiscard]] Complex admittance(double omega) const;

    [[nodiscard]] double z_nulled() const;
    [[nodiscard]] Complex z_open(double omega) const;
    /// DC power drawn from the bus, (D V)^2 / R per converter.
    [[nodiscard]] double power() const;

private:
    BuckParams p_;
    Polynomial loop_num_;  // T = loop_num_ / loop_den_
    Polynomial loop_den_;
    RationalTF y_;
};

struct TableSample {
    double omega = 0.0;
    Complex y;
};

/// Measured admittance, interpolated linearly in (Re, Im) against log(omega).
class TableLoad {
public:
    explicit TableLoad(std::vector<TableSample> samples);

    static TableLoad parse_csv(std::string_view text);
    static TableLoad read_csv(const std::filesystem::path& path);

    [[nodiscard]] const std::vector<TableSample>& samples() const { return samples_; }
    [[nodiscard]] bool in_range(double omega) const;
    /// Queries outside the sampled range clamp to the end samples.
    [[nodiscard]] Complex admittance(double omega) const;

private:
    std::vector<TableSample> samples_;
};

using LoadModel = std::variant<CplLoad, BuckLoad, TableLoad>;

[[nodiscard]] std::string_view load_kind_name(const LoadModel& m);

/// A load model attached to a bus.
struct Load {
    std::string id;
    std::size_t bus = 0;
    LoadModel model;
};

}  // namespace dcstab
