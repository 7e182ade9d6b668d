#pragma once

#include "dcstab/loads.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dcstab {

enum class BusKind { internal, source, ground };

struct Bus {
    std::string name;
    BusKind kind = BusKind::internal;
    double voltage = 0.0;  // set for sources
};

/// Series r-L branch between two buses.
struct Line {
    std::size_t from = 0;
    std::size_t to = 0;
    double r = 0.0;
    double l = 0.0;
};

/// Capacitor (optionally with series ESR) from a bus to the reference ground.
struct ShuntCap {
    std::size_t bus = 0;
    double c = 0.0;
    double r_esr = 0.0;
};

struct Element {
    std::string id;
    std::variant<Line, ShuntCap> kind;

    [[nodiscard]] bool is_line() const { return std::holds_alternative<Line>(kind); }
    [[nodiscard]] const Line& line() const { return std::get<Line>(kind); }
    [[nodiscard]] const ShuntCap& cap() const { return std::get<ShuntCap>(kind); }
};

/// Immutable circuit graph. Shunt capacitors terminate on an implicit reference node whose
/// index is `ground_node()`, one past the last bus.
class Network {
public:
    Network(std::vector<Bus> buses, std::vector<Element> elements, std::vector<Load> loads);

    [[nodiscard]] const std::vector<Bus>& buses() const { return buses_; }
    [[nodiscard]] const std::vector<Element>& elements() const { return elements_; }
    [[nodiscard]] const std::vector<Load>& loads() const { return loads_; }

    [[nodiscard]] std::optional<std::size_t> find_bus(std::string_view name) const;
    [[nodiscard]] std::size_t bus_index(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> find_load(std::string_view id) const;
    [[nodiscard]] std::optional<std::size_t> find_element(std::string_view id) const;

    [[nodiscard]] std::size_t ground_node() const { return buses_.size(); }
    /// Source buses, ground buses and the reference node all sit at zero small-signal voltage.
    [[nodiscard]] bool is_terminal(std::size_t node) const;
    [[nodiscard]] std::string node_name(std::size_t node) const;

    /// Buses kept in the nodal matrix, in declaration order.
    [[nodiscard]] const std::vector<std::size_t>& internal_buses() const { return internal_; }
    [[nodiscard]] std::optional<std::size_t> matrix_index(std::size_t bus) const;

    /// Largest L/r over all lines; empty when some line has r = 0. Zero with no lines.
    [[nodiscard]] std::optional<double> tau_max() const;

    [[nodiscard]] Network with_element(Element e) const;
    [[nodiscard]] Network with_load(Load l) const;

private:
    std::vector<Bus> buses_;
    std::vector<Element> elements_;
    std::vector<Load> loads_;
    std::vector<std::size_t> internal_;
    std::vector<std::optional<std::size_t>> matrix_index_;
};

class NetlistError : public std::runtime_error {
public:
    NetlistError(std::size_t line, const std::string& message);
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Parses the line-oriented netlist format. Table-load file paths resolve against `base_dir`.
[[nodiscard]] Network parse_netlist(std::string_view text, const std::filesystem::path& base_dir = {});
[[nodiscard]] Network read_netlist(const std::filesystem::path& path);

/// Parses a number with an optional engineering prefix (f p n u m k meg g t). When
/// `allow_hz` is set an optional trailing "hz" converts the value from Hz to rad/s.
[[nodiscard]] std::optional<double> parse_quantity(std::string_view token, bool allow_hz = false);

/// Empty iff the network meets the certifiability preconditions.
[[nodiscard]] std::vector<std::string> validate(const Network& net);

/// e^{j phi} (Y_N(omega) [+ Y_L(omega)]) over the internal buses.
[[nodiscard]] Eigen::MatrixXcd nodal_admittance(const Network& net, double omega, bool include_loads,
                                                double phi = 0.0);
/// Diagonal load admittances over the internal buses.
[[nodiscard]] Eigen::MatrixXcd load_admittance_matrix(const Network& net, double omega);

struct OperatingPoint {
    std::vector<double> voltages;     // per bus
    std::vector<double> load_powers;  // per load
    double residual = 0.0;            // relative
    std::vector<std::string> diagnostics;
};

class InfeasibleOperatingPoint : public ModelError {
public:
    using ModelError::ModelError;
};

/// Newton solve of the resistive DC network with constant power loads, started from the
/// highest source voltage so that the high-voltage root is selected.
[[nodiscard]] OperatingPoint solve_dc_operating_point(const Network& net);

}  // namespace dcstab
