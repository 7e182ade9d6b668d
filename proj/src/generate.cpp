#include "dcstab/generate.hpp"

#include <cmath>

namespace dcstab {

BuckParams reference_buck(double scale) {
    BuckParams p;
    p.v_in = 28.0;
    p.r = 3.0;
    p.l = 50e-6;
    p.c = 500e-6;
    p.duty = 0.536;
    p.gc_inf = 3.7;
    p.omega_l = 2.0 * M_PI * 500.0;
    p.omega_z = 2.0 * M_PI * 1700.0;
    p.omega_p = 2.0 * M_PI * 14500.0;
    p.h = 1.0 / 3.0;
    p.v_m = 4.0;
    p.scale = scale;
    return p;
}

Network random_network(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, unit(rng)); };
    const int n = std::uniform_int_distribution<int>(2, 5)(rng);

    std::vector<Bus> buses;
    for (int i = 0; i < n; ++i) buses.push_back({"b" + std::to_string(i + 1), BusKind::internal, 0.0});
    buses[0].kind = BusKind::source;
    buses[0].voltage = 28.0;
    if (n >= 4 && unit(rng) < 0.3) {
        buses[static_cast<std::size_t>(n - 1)].kind = BusKind::source;
        buses[static_cast<std::size_t>(n - 1)].voltage = 28.0;
    }

    std::vector<Element> elements;
    auto add_line = [&](int a, int b) {
        const double r = log_uniform(0.01, 1.0);
        const double tau = log_uniform(1e-4, 2e-3);
        elements.push_back({"line" + std::to_string(elements.size()),
                            Line{static_cast<std::size_t>(a), static_cast<std::size_t>(b), r, r * tau}});
    };
    for (int i = 1; i < n; ++i) add_line(std::uniform_int_distribution<int>(0, i - 1)(rng), i);
    if (n >= 3 && unit(rng) < 0.4) {
        const int a = std::uniform_int_distribution<int>(0, n - 2)(rng);
        const int b = std::uniform_int_distribution<int>(a + 1, n - 1)(rng);
        add_line(a, b);
    }
    for (int i = 1; i < n; ++i) {
        if (buses[static_cast<std::size_t>(i)].kind != BusKind::internal || unit(rng) > 0.7) continue;
        const double resr = unit(rng) < 0.3 ? log_uniform(1e-3, 0.1) : 0.0;
        elements.push_back({"cap" + std::to_string(elements.size()),
                            ShuntCap{static_cast<std::size_t>(i), log_uniform(50e-6, 3e-3), resr}});
    }

    std::vector<Load> loads;
    const int count = std::uniform_int_distribution<int>(1, 2)(rng);
    for (int k = 0; k < count; ++k) {
        const auto bus = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, n - 1)(rng));
        LoadModel model = unit(rng) < 0.5 ? LoadModel(CplLoad{log_uniform(1.0, 200.0), 28.0})
                                          : LoadModel(BuckLoad(reference_buck(log_uniform(0.05, 1.5))));
        loads.push_back({"load" + std::to_string(k + 1), bus, std::move(model)});
    }

    // Linearize constant power loads at the operating point, halving their power until one exists.
    for (int attempt = 0;; ++attempt) {
        Network net(buses, elements, loads);
        try {
            const OperatingPoint op = solve_dc_operating_point(net);
            if (!op.diagnostics.empty()) throw InfeasibleOperatingPoint("low-voltage root");
            for (Load& l : loads)
                if (auto* cpl = std::get_if<CplLoad>(&l.model)) cpl->voltage = op.voltages[l.bus];
            return Network(std::move(buses), std::move(elements), std::move(loads));
        } catch (const InfeasibleOperatingPoint&) {
            if (attempt > 20) throw;
            for (Load& l : loads)
                if (auto* cpl = std::get_if<CplLoad>(&l.model)) cpl->power *= 0.5;
        }
    }
}

}  // namespace dcstab
