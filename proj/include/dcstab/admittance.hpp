#pragma once

#include "dcstab/netmodel.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace dcstab {

/// Closed frequency interval in rad/s.
struct Band {
    double lo = 1.0;
    double hi = 1e6;
};

/// `points` log-spaced frequencies from band.lo to band.hi inclusive.
[[nodiscard]] std::vector<double> log_grid(Band band, int points);

[[nodiscard]] Complex eval_element_admittance(const Element& e, double omega);
[[nodiscard]] LoopGain buck_loop_gain(const BuckLoad& b, double omega);
[[nodiscard]] Complex eval_load_admittance(const LoadModel& load, double omega);

/// Smallest omega in the window above which every grid point has Re[Y] >= 0, refined by
/// bisection. Empty when Re[Y] is still negative at window.hi.
[[nodiscard]] std::optional<double> crossover_frequency(const LoadModel& load, Band window,
                                                        int points = 4000);

enum class BoundMode { constant_bound, frequency_profile };

struct AdmittanceBound {
    double y_max = 0.0;
    double argmax = 0.0;
    Band band;
    BoundMode mode = BoundMode::constant_bound;
    bool argmax_at_edge = false;
    std::vector<std::pair<double, double>> profile;  // (omega, |y|)
};

/// Sup of |y| over a log grid, refined by golden-section search around the grid argmax.
[[nodiscard]] AdmittanceBound admittance_bound(const LoadModel& load, Band band, int points = 4000);

}  // namespace dcstab
