// Acceptance gate: one PASS/FAIL line per criterion, with timing and the measured values.

#include "dcstab/certify.hpp"
#include "dcstab/generate.hpp"
#include "dcstab/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace dcstab;

namespace {

std::filesystem::path data_file(const std::string& name) { return std::filesystem::path(DCSTAB_DATA_DIR) / name; }

struct Outcome {
    bool pass = false;
    std::string detail;
};

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

std::string fmt(double v, int precision = 6) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

const BuckLoad& reference() {
    static const BuckLoad buck(reference_buck());
    return buck;
}

Outcome admittance_bound_check() {
    const AdmittanceBound b = admittance_bound(reference(), {1.0, 1e6});
    const double err = std::abs(b.y_max - 0.1016) / 0.1016;
    return {err <= 0.02, "Y_max = " + fmt(b.y_max) + " S at " + fmt(b.argmax) + " rad/s, rel. error " + fmt(err, 3) +
                             " (limit 0.02)"};
}

Outcome crossover_check() {
    const auto wc = crossover_frequency(reference(), {1.0, 1e6});
    if (!wc) return {false, "no crossover found"};
    const double err = std::abs(*wc - 30160.0) / 30160.0;
    return {err <= 0.02, "crossover = " + fmt(*wc) + " rad/s, rel. error " + fmt(err, 3) + " (limit 0.02)"};
}

/// Every grid point below each load's crossover is certified; low band on phi = 0 line paths,
/// top of the active band on rotated capacitor paths.
bool covers_active_band(const CertReport& r, std::string& why) {
    for (const LoadSummary& l : r.loads) {
        if (!l.crossover) {
            why = "load " + l.id + " has no crossover";
            return false;
        }
    }
    const FrequencyPoint* first = nullptr;
    const FrequencyPoint* last_active = nullptr;
    for (const FrequencyPoint& p : r.points) {
        bool active = false;
        for (const LoadSummary& l : r.loads) active = active || p.omega < *l.crossover;
        if (!active) continue;
        if (p.status != PointStatus::certified) {
            why = "uncovered at " + fmt(p.omega) + " rad/s";
            return false;
        }
        if (!first) first = &p;
        last_active = &p;
    }
    if (!first || first->phi != 0.0 || first->decomposition.find("gnd") != std::string::npos) {
        why = "low band is not certified by phi = 0 line paths";
        return false;
    }
    if (!last_active || !(last_active->phi < 0.0) || last_active->decomposition.find("gnd") == std::string::npos) {
        why = "top of the active band is not certified by rotated capacitor paths";
        return false;
    }
    return true;
}

Outcome multi_microgrid_check() {
    const Network net = read_netlist(data_file("multi_microgrid.net"));
    CertOptions o;
    const CertReport r = certify_path_method(net, o);
    std::string why;
    if (r.verdict != Verdict::certified) return {false, "automatic switch: " + std::string(to_string(r.verdict))};
    if (!covers_active_band(r, why)) return {false, "automatic switch: " + why};
    if (!r.phi_switch) return {false, "no switch frequency chosen"};
    for (const LoadSummary& l : r.loads) {
        if (!l.omega_cap || !l.omega_line || *r.phi_switch < *l.omega_cap || *r.phi_switch > *l.omega_line)
            return {false, "switch " + fmt(*r.phi_switch) + " outside the band overlap of load " + l.id};
    }
    o.phi_switch = 9000.0;
    const CertReport m = certify_path_method(net, o);
    if (m.verdict != Verdict::certified || !covers_active_band(m, why))
        return {false, "override 9000 rad/s: " + (why.empty() ? std::string(to_string(m.verdict)) : why)};
    std::string edges;
    for (const LoadSummary& l : r.loads)
        edges += "; load " + l.id + " line band to " + fmt(*l.omega_line) + ", cap band from " + fmt(*l.omega_cap);
    return {true, "certified, automatic switch " + fmt(*r.phi_switch) + " rad/s, override 9000 rad/s certified" + edges};
}

Outcome added_load_check() {
    const Network net = read_netlist(data_file("multi_microgrid_load3.net"));
    const std::size_t k3 = *net.find_load("III");
    const double y3 = admittance_bound(net.loads()[k3].model, {1.0, 1e6}).y_max;
    CertOptions o;
    o.probe_passive_region = false;
    const CertReport r = certify_path_method(net, o);
    std::string why;
    const bool covered = r.verdict == Verdict::certified && covers_active_band(r, why);

    // Decompositions at one low and one high frequency, straight from the search.
    std::map<std::size_t, double> demands;
    for (const LoadSummary& l : r.loads) demands[l.load] = l.y_max * (1.0 + o.margin);
    const auto low = find_decomposition(net, 100.0, 0.0, demands);
    const double w_high = 2e4;
    const auto high = find_decomposition(net, w_high, admissible_phi_interval(net, w_high).lo, demands);

    // Informational: largest parallel count of the third converter that still certifies.
    const Network base(net.buses(), net.elements(), {net.loads()[0], net.loads()[1]});
    const std::size_t bus3 = net.loads()[k3].bus;
    CertOptions q = o;
    q.points = 400;
    auto supports = [&](double scale) {
        const Network trial = base.with_load({"III", bus3, BuckLoad(reference_buck(scale))});
        return certify_path_method(trial, q).verdict == Verdict::certified;
    };
    double lo = 0.0, hi = 0.25;
    while (supports(hi) && hi < 64.0) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (supports(mid) ? lo : hi) = mid;
    }
    const double y_sup = lo * admittance_bound(reference(), {1.0, 1e6}).y_max;

    const bool pass = y3 >= 0.010 && covered && low && high;
    std::string detail = "load III Y_max = " + fmt(y3) + " S, " + (covered ? "certified" : "not certified: " + why) +
                         ", decompositions at 100 and 2e4 rad/s " + (low && high ? "found" : "missing") +
                         "; largest supported third load ~" + fmt(y_sup, 4) + " S (400-point grid)";
    return {pass, detail};
}

Outcome formula_identity_check() {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double y = log_uniform(rng, 1e-3, 10.0);
        const double tau = log_uniform(rng, 1e-5, 1e-2);
        const double r = (0.001 + 0.998 * unit(rng)) / y;
        const double c = min_stabilizing_cap(y, tau, r);
        const double a = cap_band_limit(c, y, tau);
        const double b = line_band_limit(r, y, tau);
        worst = std::max(worst, std::abs(a - b) / b);
    }
    return {worst <= 1e-9, "worst relative mismatch " + fmt(worst, 3) + " over 1000 draws (limit 1e-9)"};
}

Outcome placement_check() {
    const Network net = read_netlist(data_file("cap_placement.net"));
    CertOptions o;
    const CertReport r = certify_path_method(net, o);
    const auto& load = r.loads.at(0);

    bool below = load.crossover.has_value();
    std::string gap;
    for (const FrequencyPoint& p : r.points) {
        if (load.crossover && p.omega < *load.crossover && p.status != PointStatus::certified) {
            below = false;
        }
    }
    for (const Interval& g : r.gaps) gap += " [" + fmt(g.lo) + ", " + fmt(g.hi) + "]";

    const bool passive_region = load.crossover && !r.passive_uncovered.empty() &&
                                r.passive_uncovered.front().lo >= *load.crossover &&
                                r.passive_uncovered.front().lo <= *load.crossover * 1.05;

    // Closed-form targets, evaluated independently.
    const double y = 0.1016, tau = 1e-3, rp = 1.0;
    const double line_ref = std::sqrt(1.0 / (rp * y) - 1.0) / tau;
    const double cap_ref = y * tau / std::sqrt(1.0 - rp * y);
    const double line_err = std::abs(line_band_limit(rp, y, tau) - line_ref) / line_ref;
    const double cap_err = std::abs(min_stabilizing_cap(y, tau, rp) - cap_ref) / cap_ref;
    const bool formulas = line_err <= 1e-6 && cap_err <= 1e-6;

    std::string detail = std::string("certified below crossover: ") + (below ? "yes" : "no, gaps" + gap) +
                         "; uncertified-but-passive region " +
                         (r.passive_uncovered.empty() ? std::string("none")
                                                      : "from " + fmt(r.passive_uncovered.front().lo) + " rad/s") +
                         " (crossover " + fmt(load.crossover.value_or(0.0)) + ")" + (passive_region ? " ok" : " missing") +
                         "; line band " + fmt(line_band_limit(rp, y, tau), 7) + " rad/s, C_min " +
                         fmt(min_stabilizing_cap(y, tau, rp) * 1e6, 6) + " uF" + (formulas ? " ok" : " mismatch");
    return {below && passive_region && formulas, detail};
}

Outcome path_power_check() {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    int draws = 0, violations = 0;
    while (draws < 10000) {
        const Network net = random_network(rng);
        const double w = log_uniform(rng, 1.0, 1e6);
        const PhiInterval iv = admissible_phi_interval(net, w);
        const double phi = iv.lo + unit(rng) * (iv.hi - iv.lo);
        const auto g = element_conductances(net, w, phi);
        for (std::size_t k = 0; k < net.loads().size() && draws < 10000; ++k) {
            for (const LoadPath& p : structural_paths(net, k, net.buses().size())) {
                std::vector<double> ge;
                for (const PathEdge& e : p.edges) ge.push_back(g[e.element]);
                if (std::any_of(ge.begin(), ge.end(), [](double x) { return !(x > 0.0); })) continue;
                std::vector<std::complex<double>> v;
                for (std::size_t i = 0; i <= ge.size(); ++i) v.emplace_back(10.0 * sym(rng), 10.0 * sym(rng));
                double power = 0.0;
                for (std::size_t i = 0; i < ge.size(); ++i) power += ge[i] * std::norm(v[i + 1] - v[i]);
                const double bound = path_conductance(g, p) * std::norm(v.back() - v.front());
                if (power < bound * (1.0 - 1e-12)) ++violations;
                if (++draws == 10000) break;
            }
        }
    }
    return {violations == 0, std::to_string(draws) + " draws, " + std::to_string(violations) + " violations"};
}

Outcome soundness_check() {
    std::mt19937_64 rng(20240611);
    CertOptions o;
    o.probe_passive_region = false;
    int path = 0, direct = 0, unstable = 0, violations = 0;
    for (int i = 0; i < 100; ++i) {
        const Network net = random_network(rng);
        o.method = Method::path;
        const bool p = certify(net, o).verdict == Verdict::certified;
        o.method = Method::direct;
        const bool d = certify(net, o).verdict == Verdict::certified;
        const bool stable = eigen_verdict(build_state_space(net, solve_dc_operating_point(net))).stable;
        path += p;
        direct += d;
        unstable += !stable;
        if ((p || d) && !stable) ++violations;
    }
    return {violations == 0, "100 networks: " + std::to_string(path) + " path-certified, " + std::to_string(direct) +
                                 " direct-certified, " + std::to_string(unstable) + " oracle-unstable, " +
                                 std::to_string(violations) + " violations"};
}

std::string cpl_chain(double r, double l, double c, double g) {
    const double vs = 100.0;
    const double v = vs / (1.0 + r * g);
    std::ostringstream s;
    s.precision(17);
    s << "bus s\nbus a\nsource s v=" << vs << "\nline s a r=" << r << " l=" << l << "\ncap a c=" << c
      << "\nload cpl a p=" << g * v * v << " v=" << v << "\n";
    return s.str();
}

bool oracle_stable(const Network& net) {
    return eigen_verdict(build_state_space(net, solve_dc_operating_point(net))).stable;
}

Outcome oracle_analytic_check() {
    const Network rlc = parse_netlist("bus s\nbus a\nsource s v=10\nline s a r=1 l=1m\ncap a c=1m");
    const EigenVerdict v = eigen_verdict(build_state_space(rlc, solve_dc_operating_point(rlc)));
    const double im = std::sqrt(1e6 - 25e4);
    double worst = v.eigenvalues.size() == 2 ? 0.0 : 1.0;
    for (std::complex<double> l : v.eigenvalues) {
        const std::complex<double> expect(-500.0, l.imag() > 0 ? im : -im);
        worst = std::max(worst, std::abs(l - expect) / std::abs(expect));
    }

    // Bisection on g with the oracle alone; the Routh-Hurwitz boundary is g = rC/L.
    const double r = 0.1, l = 1e-3, c = 1e-3, target = r * c / l;
    double lo = 0.2 * target, hi = 5.0 * target;
    const bool bracket = oracle_stable(parse_netlist(cpl_chain(r, l, c, lo))) &&
                         !oracle_stable(parse_netlist(cpl_chain(r, l, c, hi)));
    while (hi / lo > 1.001) {
        const double mid = std::sqrt(lo * hi);
        (oracle_stable(parse_netlist(cpl_chain(r, l, c, mid))) ? lo : hi) = mid;
    }
    const double found = std::sqrt(lo * hi);
    const double boundary_err = std::abs(found - target) / target;
    return {worst <= 1e-9 && bracket && boundary_err <= 0.01,
            "RLC eigenvalue rel. error " + fmt(worst, 3) + " (limit 1e-9); CPL boundary g = " + fmt(found) +
                " vs rC/L = " + fmt(target) + ", rel. error " + fmt(boundary_err, 3) + " (limit 0.01)"};
}

Outcome closed_form_check() {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double r = log_uniform(rng, 1e-3, 10.0);
        const double l = log_uniform(rng, 1e-6, 1e-1);
        const double c = log_uniform(rng, 1e-6, 1e-1);
        const double w = log_uniform(rng, 1e-1, 1e7);
        const double phi = angle(rng);
        const std::complex<double> yl = 1.0 / std::complex<double>(r, w * l);
        const std::complex<double> yc = 1.0 / std::complex<double>(r, -1.0 / (w * c));
        const std::complex<double> ys = yl + std::complex<double>(0.0, w * c);
        const auto generic = [&](std::complex<double> y) { return (std::polar(1.0, phi) * y).real(); };
        worst = std::max(worst, std::abs(inductive_G(r, l, w, phi) - generic(yl)) / std::abs(yl));
        worst = std::max(worst, std::abs(capacitive_G(r, c, w, phi) - generic(yc)) / std::abs(yc));
        worst = std::max(worst, std::abs(shunt_combo_G(r, l, c, w, phi) - generic(ys)) / std::abs(ys));
    }
    return {worst <= 1e-12, "worst mismatch " + fmt(worst, 3) + " relative to |y| over 10000 draws (limit 1e-12)"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;  // 0 when no runtime limit applies
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "buck admittance bound", 1.0, admittance_bound_check},
        {2, "crossover frequency", 1.0, crossover_check},
        {3, "multi-microgrid certification", 10.0, multi_microgrid_check},
        {4, "added-load decomposition", 30.0, added_load_check},
        {5, "band formula identity", 0.0, formula_identity_check},
        {6, "capacitor placement", 0.0, placement_check},
        {7, "path power bound", 0.0, path_power_check},
        {8, "oracle soundness", 60.0, soundness_check},
        {9, "oracle analytic checks", 0.0, oracle_analytic_check},
        {10, "closed-form equivalence", 0.0, closed_form_check},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool pass = o.pass;
        if (c.budget_s > 0.0 && seconds > c.budget_s) {
            pass = false;
            o.detail += "; over the " + fmt(c.budget_s) + " s budget";
        }
        failed += !pass;
        std::printf("%s %2d %-30s %8.3f s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, seconds, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
