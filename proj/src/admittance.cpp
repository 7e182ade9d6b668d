#include "dcstab/admittance.hpp"

#include <algorithm>
#include <cmath>

namespace dcstab {

std::vector<double> log_grid(Band band, int points) {
    if (points < 1 || !(band.lo > 0.0) || !(band.hi >= band.lo))
        throw ModelError("invalid frequency grid");
    std::vector<double> grid(static_cast<std::size_t>(points));
    if (points == 1) {
        grid[0] = band.lo;
        return grid;
    }
    const double a = std::log(band.lo);
    const double b = std::log(band.hi);
    for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
    grid.front() = band.lo;
    grid.back() = band.hi;
    return grid;
}

Complex eval_element_admittance(const Element& e, double omega) {
    if (e.is_line()) {
        const Line& l = e.line();
        return 1.0 / Complex(l.r, omega * l.l);
    }
    const ShuntCap& c = e.cap();
    if (omega == 0.0) return {0.0, 0.0};
    if (c.r_esr == 0.0) return {0.0, omega * c.c};
    return 1.0 / Complex(c.r_esr, -1.0 / (omega * c.c));
}

LoopGain buck_loop_gain(const BuckLoad& b, double omega) { return b.loop_gain(omega); }

Complex eval_load_admittance(const LoadModel& load, double omega) {
    struct Visitor {
        double omega;
        Complex operator()(const CplLoad& c) const { return {c.conductance(), 0.0}; }
        Complex operator()(const BuckLoad& b) const { return b.admittance(omega); }
        Complex operator()(const TableLoad& t) const { return t.admittance(omega); }
    };
    return std::visit(Visitor{omega}, load);
}

std::optional<double> crossover_frequency(const LoadModel& load, Band window, int points) {
    const auto grid = log_grid(window, std::max(points, 2));
    std::optional<std::size_t> last_negative;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (eval_load_admittance(load, grid[i]).real() < 0.0) last_negative = i;
    if (!last_negative) return window.lo;
    if (*last_negative + 1 == grid.size()) return std::nullopt;

    double lo = grid[*last_negative];
    double hi = grid[*last_negative + 1];
    while (hi - lo > 1e-6 * hi) {
        const double mid = std::sqrt(lo * hi);
        if (eval_load_admittance(load, mid).real() < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

AdmittanceBound admittance_bound(const LoadModel& load, Band band, int points) {
    AdmittanceBound out;
    out.band = band;
    const auto grid = log_grid(band, std::max(points, 2));
    out.profile.reserve(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double mag = std::abs(eval_load_admittance(load, grid[i]));
        out.profile.emplace_back(grid[i], mag);
        if (mag > out.profile[best].second) best = i;
    }
    out.y_max = out.profile[best].second;
    out.argmax = grid[best];
    out.argmax_at_edge = best == 0 || best + 1 == grid.size();

    // Golden-section on log(omega) over the bracketing grid cells.
    double a = std::log(grid[best == 0 ? 0 : best - 1]);
    double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
    auto mag_at = [&](double x) { return std::abs(eval_load_admittance(load, std::exp(x))); };
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - ratio * (b - a);
    double x2 = a + ratio * (b - a);
    double f1 = mag_at(x1);
    double f2 = mag_at(x2);
    while (b - a > 1e-6) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = mag_at(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = mag_at(x1);
        }
    }
    for (auto [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
        if (f > out.y_max) {
            out.y_max = f;
            out.argmax = std::exp(x);
        }
    }
    return out;
}

}  // namespace dcstab
