#pragma once

#include "dcstab/netmodel.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dcstab {

/// Exact Y(s) of a load: a constant for CPLs, the composed polynomial ratio for bucks.
/// Throws ModelError for tabulated loads.
[[nodiscard]] RationalTF load_rational_realization(const LoadModel& load);

/// E x' = A x.
struct DescriptorSystem {
    Eigen::MatrixXd e;
    Eigen::MatrixXd a;
    std::vector<std::string> labels;
    std::vector<std::string> warnings;
};

/// Linear model around the operating point: line currents, bus and capacitor voltages, and a
/// controllable-canonical realization of every load. Internal buses without a capacitor get a
/// 1 nF parasitic so that algebraic loads stay well posed; each insertion is logged.
[[nodiscard]] DescriptorSystem build_state_space(const Network& net, const OperatingPoint& op);

struct EigenVerdict {
    std::vector<Complex> eigenvalues;  // finite ones, sorted by descending real part
    bool stable = false;
    double margin = 0.0;  // -max Re
};

/// Finite generalized eigenvalues of (A, E). Throws ModelError for a singular pencil.
[[nodiscard]] EigenVerdict eigen_verdict(const DescriptorSystem& sys);

struct ZeroExclusion {
    double min_abs_det = 0.0;
    /// Smallest singular value of Y_N + lambda Y_L, relative to ||Y_N|| + ||Y_L|| (Frobenius).
    double min_relative_sigma = 0.0;
    double at_lambda = 0.0;
    double at_omega = 0.0;
    bool excluded = false;
};

/// Scans Y_N(j w) + lambda Y_L(j w) over the grids, then refines around the worst grid point.
[[nodiscard]] ZeroExclusion zero_exclusion_scan(const Network& net, const std::vector<double>& lambda_grid,
                                                const std::vector<double>& omega_grid, double tolerance = 1e-6);

}  // namespace dcstab
