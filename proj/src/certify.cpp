#include "dcstab/certify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace dcstab {

double line_band_limit(double r_path, double y_max, double tau) {
    const double ry = r_path * y_max;
    if (ry >= 1.0) throw ModelError("line path cannot certify even DC");
    if (y_max <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(1.0 / ry - 1.0) / tau;
}

double cap_band_limit(double c, double y_max, double tau) {
    const double yt = y_max * tau;
    if (c <= yt) throw ModelError("capacitor too small at any frequency");
    return y_max / std::sqrt(c * c - yt * yt);
}

double min_stabilizing_cap(double y_max, double tau, double r_path) {
    const double ry = r_path * y_max;
    if (ry >= 1.0) throw ModelError("no capacitor suffices with this path resistance");
    return y_max * tau / std::sqrt(1.0 - ry);
}

double max_path_resistance(double y_max, double tau, double c) {
    const double yt = y_max * tau;
    if (c <= yt) return 0.0;
    return (c * c - yt * yt) / (y_max * c * c);
}

Complex path_impedance(const Network& net, const LoadPath& path, double omega) {
    Complex z(0.0, 0.0);
    for (const PathEdge& e : path.edges) z += 1.0 / eval_element_admittance(net.elements().at(e.element), omega);
    return z;
}

double lumped_path_conductance(const Network& net, const LoadPath& path, double omega, double phi) {
    return augmented_conductance(1.0 / path_impedance(net, path, omega), phi);
}

MiddlebrookResult middlebrook_ratio(const Network& net, const LoadPath& path, double omega, double phi) {
    const Complex z = path_impedance(net, path, omega);
    const double mag = std::abs(z);
    if (!(mag > 0.0) || !std::isfinite(mag)) throw ModelError("path impedance is zero or undefined");
    MiddlebrookResult out;
    out.eta = (z.real() * std::cos(phi) + z.imag() * std::sin(phi)) / mag;
    if (out.eta <= 0.0) throw ModelError("rotation drives path non-dissipative");
    const Complex y_load = eval_load_admittance(net.loads().at(path.load).model, omega);
    out.ratio = std::abs(y_load) > 0.0 ? 1.0 / (std::abs(y_load) * mag) : std::numeric_limits<double>::infinity();
    out.passes = out.ratio > 1.0 / out.eta;
    return out;
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::path: return "path";
        case Method::direct: return "direct";
        case Method::both: return "both";
    }
    return "?";
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::certified: return "certified";
        case Verdict::not_certified: return "not_certified";
        case Verdict::invalid_input: return "invalid_input";
    }
    return "?";
}

std::string_view to_string(PointStatus s) {
    switch (s) {
        case PointStatus::certified: return "certified";
        case PointStatus::passive: return "passive";
        case PointStatus::uncovered: return "uncovered";
    }
    return "?";
}

DissipationEig dissipation_eigen(const Network& net, double omega, double phi, bool include_loads) {
    const Eigen::MatrixXd m_net = nodal_admittance(net, omega, false, phi).real();
    if (m_net.rows() == 0) return {std::numeric_limits<double>::infinity(), 0.0, 0.0};
    Eigen::MatrixXd m_load = Eigen::MatrixXd::Zero(m_net.rows(), m_net.cols());
    if (include_loads) m_load = (std::polar(1.0, phi) * load_admittance_matrix(net, omega)).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m_net + m_load);
    const Eigen::VectorXd x = eig.eigenvectors().col(0);
    return {eig.eigenvalues()(0), x.dot(m_net * x), x.dot(m_load * x)};
}

namespace {

struct Prepared {
    std::vector<LoadSummary> loads;
    std::vector<std::size_t> active;  // loads that take part in the certificate
    std::vector<std::string> diagnostics;
    bool invalid = false;
    bool defective = false;  // a load that no network can stabilize
};

bool options_valid(const CertOptions& o) {
    return o.band.lo > 0.0 && o.band.hi > o.band.lo && o.points >= 2 && o.margin >= 0.0 && o.interior_phi >= 0 &&
           (!o.phi_switch || *o.phi_switch > 0.0);
}

Prepared prepare(const Network& net, const CertOptions& o) {
    Prepared p;
    if (!options_valid(o)) {
        p.invalid = true;
        p.diagnostics.push_back("invalid options: need 0 < wmin < wmax, points >= 2, margin >= 0");
        return p;
    }
    for (auto& d : validate(net)) p.diagnostics.push_back(std::move(d));
    if (!p.diagnostics.empty()) {
        p.invalid = true;
        return p;
    }
    for (std::size_t k = 0; k < net.loads().size(); ++k) {
        const Load& load = net.loads()[k];
        LoadSummary s;
        s.load = k;
        s.id = load.id;
        if (net.is_terminal(load.bus)) {
            s.skipped = true;
            s.note = "on a source/ground bus; its voltage is held by the source";
            p.loads.push_back(std::move(s));
            continue;
        }
        if (const auto* buck = std::get_if<BuckLoad>(&load.model)) {
            for (const Complex& r : buck->admittance_tf().denominator.roots()) {
                if (r.real() > 1e-9 * std::max(1.0, std::abs(r))) {
                    s.note = "admittance has right-half-plane poles (converter unstable on an ideal source)";
                    p.defective = true;
                    break;
                }
            }
        }
        if (const auto* table = std::get_if<TableLoad>(&load.model)) {
            if (!table->in_range(o.band.lo) || !table->in_range(o.band.hi))
                p.diagnostics.push_back("load '" + load.id + "': table does not span the band; end samples are held");
        }
        try {
            const AdmittanceBound b = admittance_bound(load.model, o.band, o.bound_points);
            s.y_max = b.y_max;
            s.argmax = b.argmax;
            s.argmax_at_edge = b.argmax_at_edge;
            s.crossover = crossover_frequency(load.model, o.band, o.bound_points);
        } catch (const ModelError& e) {
            s.note = e.what();
            p.defective = true;
        }
        if (s.note.empty()) {
            const bool has_cap = std::any_of(net.elements().begin(), net.elements().end(), [&](const Element& e) {
                return !e.is_line() && e.cap().bus == load.bus;
            });
            const bool passive_at_top =
                s.crossover && *s.crossover <= o.band.hi &&
                eval_load_admittance(load.model, o.band.hi * 1e6).real() >= 0.0;
            if (!has_cap && !passive_at_top) {
                s.note = "no capacitor on the load bus while the load stays active at high frequency";
                p.defective = true;
            }
        }
        if (!s.note.empty()) p.diagnostics.push_back("load '" + load.id + "': " + s.note);
        if (s.argmax_at_edge)
            p.diagnostics.push_back("load '" + load.id + "': admittance peak sits at the band edge");
        p.active.push_back(k);
        p.loads.push_back(std::move(s));
    }
    return p;
}

std::vector<double> phi_candidates(const PhiInterval& iv, int interior) {
    std::vector<double> out{0.0};
    if (iv.lo < 0.0) out.push_back(iv.lo);
    for (int j = 1; j <= interior; ++j) {
        const double phi = iv.lo + (iv.hi - iv.lo) * j / (interior + 1);
        if (phi != 0.0) out.push_back(phi);
    }
    return out;
}

std::string describe(const Network& net, const PathDecomposition& d) {
    std::ostringstream out;
    bool first = true;
    for (const auto& [load, path] : d.paths) {
        out << (first ? "" : "; ") << net.loads()[load].id << ": " << path.describe(net);
        first = false;
        for (const PathEdge& e : path.edges) {
            const double a = d.allocation.fraction(e.element, load);
            if (a < 1.0 - 1e-12)
                out << " [" << net.elements()[e.element].id << " x" << std::fixed << std::setprecision(3) << a
                    << std::defaultfloat << "]";
        }
    }
    return out.str();
}

/// Outcome of the path certificate at one (omega, phi).
struct Trial {
    bool feasible = false;
    bool all_passive = false;
    double phi = 0.0;
    double score = -std::numeric_limits<double>::infinity();  // min relative margin
    std::map<std::size_t, double> g_pi;
    std::map<std::size_t, double> bound;
    std::string decomposition;
};

void append_runs(std::vector<Interval>& out, const std::vector<double>& grid, const std::vector<bool>& flag) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!flag[i]) continue;
        std::size_t j = i;
        while (j + 1 < grid.size() && flag[j + 1]) ++j;
        out.push_back({grid[i], grid[j]});
        i = j;
    }
}

void finish(CertReport& r) {
    std::vector<double> grid;
    std::vector<bool> uncovered, passive_gap;
    for (const auto& pt : r.points) {
        grid.push_back(pt.omega);
        uncovered.push_back(pt.status == PointStatus::uncovered);
        passive_gap.push_back(pt.status == PointStatus::passive && !pt.path_covered);
    }
    r.gaps.clear();
    r.passive_uncovered.clear();
    append_runs(r.gaps, grid, uncovered);
    append_runs(r.passive_uncovered, grid, passive_gap);
    if (r.verdict != Verdict::invalid_input)
        r.verdict = r.gaps.empty() && r.tail_uncovered.empty() ? Verdict::certified : Verdict::not_certified;
}

CertReport start_report(const Network& net, const CertOptions& o, Method m, Prepared& prep) {
    CertReport r;
    r.method = m;
    r.options = o;
    prep = prepare(net, o);
    r.loads = prep.loads;
    r.diagnostics = prep.diagnostics;
    r.verdict = prep.invalid ? Verdict::invalid_input : Verdict::not_certified;
    return r;
}

}  // namespace

namespace {

struct PointTrials {
    bool valid = false;
    PhiInterval interval;
    Trial zero;
    Trial rotated;
    bool covered_full = false;
    std::map<std::size_t, bool> low_ok;  // best phi = 0 path meets the full bound
    std::map<std::size_t, bool> cap_ok;  // best path at the most negative rotation does
};

class PathEvaluator {
public:
    PathEvaluator(const Network& net, const CertOptions& o, const Prepared& prep, const std::vector<LoadSummary>& loads)
        : net_(net), o_(o), prep_(prep), loads_(loads), search_(net, o.limits), scale_(1.0 + o.margin) {}

    PointTrials evaluate(double omega) const {
        PointTrials out;
        try {
            out.interval = admissible_phi_interval(net_, omega);
        } catch (const ModelError&) {
            return out;
        }
        out.valid = true;
        std::map<std::size_t, Complex> y;
        for (std::size_t k : prep_.active) y[k] = eval_load_admittance(net_.loads()[k].model, omega);
        const bool beyond_all = std::all_of(prep_.active.begin(), prep_.active.end(),
                                            [&](std::size_t k) { return crossed(k, omega); });

        for (double phi : phi_candidates(out.interval, o_.interior_phi)) {
            const auto g = element_conductances(net_, omega, phi);
            // Band edges describe the network itself, so they ignore the switch override.
            for (std::size_t k : prep_.active) {
                const bool edge = phi == 0.0 || (phi == out.interval.lo && out.interval.lo < 0.0);
                if (!edge) continue;
                const bool ok = search_.best_single(g, k) >= loads_[k].y_max * scale_;
                (phi == 0.0 ? out.low_ok : out.cap_ok)[k] = ok;
            }
            if (o_.phi_switch && ((omega < *o_.phi_switch) != (phi == 0.0))) continue;
            Trial t;
            t.phi = phi;
            std::map<std::size_t, double> demands;
            for (std::size_t k : prep_.active) {
                const double rot = augmented_conductance(y[k], phi);
                double bound = 0.0;
                if (o_.bound_mode == BoundMode::frequency_profile)
                    bound = rot < 0.0 ? std::abs(y[k]) : 0.0;
                else
                    bound = (!crossed(k, omega) || rot < 0.0) ? loads_[k].y_max : 0.0;
                t.bound[k] = bound;
                if (bound > 0.0) demands[k] = bound * scale_;
            }
            if (demands.empty()) {
                t.feasible = t.all_passive = true;
                t.score = std::numeric_limits<double>::infinity();
            } else if (auto d = search_.find(g, demands)) {
                t.feasible = true;
                t.g_pi = d->g_pi;
                t.decomposition = describe(net_, *d);
                t.score = std::numeric_limits<double>::infinity();
                for (const auto& [k, need] : demands) t.score = std::min(t.score, t.g_pi[k] / (need / scale_) - 1.0);
            }
            for (std::size_t k : prep_.active)
                if (!t.g_pi.count(k)) t.g_pi[k] = search_.best_single(g, k);

            Trial& slot = phi == 0.0 ? out.zero : out.rotated;
            const bool better = (t.feasible && !slot.feasible) ||
                                (t.feasible == slot.feasible && t.score > slot.score) || slot.bound.empty();
            if (better) slot = std::move(t);

            if (beyond_all && o_.probe_passive_region && !out.covered_full) {
                std::map<std::size_t, double> full;
                for (std::size_t k : prep_.active)
                    if (loads_[k].y_max > 0.0) full[k] = loads_[k].y_max * scale_;
                out.covered_full = search_.find(g, full).has_value();
            }
        }
        return out;
    }

private:
    bool crossed(std::size_t k, double omega) const {
        const auto& c = loads_[k].crossover;
        return c && omega >= *c;
    }

    const Network& net_;
    const CertOptions& o_;
    const Prepared& prep_;
    const std::vector<LoadSummary>& loads_;
    DecompositionSearch search_;
    double scale_;
};

/// Frequencies above the band where the certificate must still hold: an unloaded network has
/// no dynamics at infinity, so a load that stays active there needs support all the way up.
std::vector<double> tail_frequencies(const CertOptions& o) {
    std::vector<double> out;
    for (int k = 1; k <= 6; ++k) out.push_back(o.band.hi * std::pow(10.0, k));
    return out;
}

void note_tail(CertReport& r, const std::vector<double>& failed) {
    if (failed.empty()) return;
    r.tail_uncovered = failed;
    std::ostringstream msg;
    msg << "no certificate above the band (first failure at " << std::setprecision(6) << failed.front()
        << " rad/s); an active load needs capacitive support at high frequency";
    r.diagnostics.push_back(msg.str());
}

}  // namespace

CertReport certify_path_method(const Network& net, const CertOptions& o) {
    Prepared prep;
    CertReport report = start_report(net, o, Method::path, prep);
    if (prep.invalid) return report;

    const auto grid = log_grid(o.band, o.points);
    const PathEvaluator evaluator(net, o, prep, report.loads);

    std::vector<Trial> zero(grid.size()), rotated(grid.size());
    std::vector<bool> covered_full(grid.size(), false);
    std::vector<std::vector<bool>> low_ok(net.loads().size(), std::vector<bool>(grid.size(), false));
    auto cap_ok = low_ok;
    std::vector<PhiInterval> intervals(grid.size());

    for (std::size_t i = 0; i < grid.size(); ++i) {
        PointTrials t = evaluator.evaluate(grid[i]);
        if (!t.valid) continue;
        intervals[i] = t.interval;
        zero[i] = std::move(t.zero);
        rotated[i] = std::move(t.rotated);
        covered_full[i] = t.covered_full;
        for (const auto& [k, ok] : t.low_ok) low_ok[k][i] = ok;
        for (const auto& [k, ok] : t.cap_ok) cap_ok[k][i] = ok;
    }
    std::vector<double> tail_failed;
    for (double omega : tail_frequencies(o)) {
        const PointTrials t = evaluator.evaluate(omega);
        if (!t.zero.feasible && !t.rotated.feasible) tail_failed.push_back(omega);
    }

    // Band edges from the standalone best paths.
    for (std::size_t k : prep.active) {
        LoadSummary& s = report.loads[k];
        std::size_t i = 0;
        while (i < grid.size() && low_ok[k][i]) ++i;
        if (i > 0) s.omega_line = grid[i - 1];
        std::size_t end = grid.size();
        if (s.crossover) end = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), *s.crossover) - grid.begin());
        std::size_t j = end;
        while (j > 0 && cap_ok[k][j - 1]) --j;
        if (j < end) s.omega_cap = grid[j];
    }

    // Switch frequency: phi = 0 below it, rotated from it on.
    std::optional<std::size_t> switch_index;
    bool zero_everywhere = false;
    if (o.phi_switch) {
        switch_index = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), *o.phi_switch) - grid.begin());
    } else {
        std::vector<bool> prefix_ok(grid.size() + 1, true), suffix_ok(grid.size() + 1, true);
        for (std::size_t i = 0; i < grid.size(); ++i) prefix_ok[i + 1] = prefix_ok[i] && zero[i].feasible;
        for (std::size_t i = grid.size(); i-- > 0;) suffix_ok[i] = suffix_ok[i + 1] && rotated[i].feasible;
        zero_everywhere = prefix_ok[grid.size()];
        // Keep phi = 0 for as long as it works: the last point where both certificates hold.
        for (std::size_t i = grid.size(); !zero_everywhere && i-- > 0;) {
            if (prefix_ok[i] && suffix_ok[i] && zero[i].feasible) {
                switch_index = i;
                break;
            }
        }
        if (!zero_everywhere && !switch_index && suffix_ok[0]) switch_index = 0;
    }
    if (o.phi_switch)
        report.phi_switch = o.phi_switch;
    else if (switch_index && *switch_index < grid.size())
        report.phi_switch = grid[*switch_index];

    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Trial* chosen = nullptr;
        if (zero_everywhere)
            chosen = &zero[i];
        else if (switch_index)
            chosen = i < *switch_index ? &zero[i] : &rotated[i];
        else
            chosen = (rotated[i].feasible && (!zero[i].feasible || rotated[i].score > zero[i].score)) ? &rotated[i]
                                                                                                     : &zero[i];
        FrequencyPoint pt;
        pt.omega = grid[i];
        pt.phi = chosen->phi;
        pt.path_ok = chosen->feasible;
        pt.status = !chosen->feasible ? PointStatus::uncovered
                                      : (chosen->all_passive ? PointStatus::passive : PointStatus::certified);
        pt.path_covered = chosen->feasible && !chosen->all_passive ? true : covered_full[i];
        pt.decomposition = chosen->decomposition;
        report.points.push_back(pt);
        report.schedule.samples.push_back({grid[i], chosen->phi, intervals[i]});
        for (std::size_t k : prep.active) {
            MarginSample m;
            m.omega = grid[i];
            m.load = k;
            m.method = Method::path;
            auto g_it = chosen->g_pi.find(k);
            auto b_it = chosen->bound.find(k);
            m.g_pi = g_it == chosen->g_pi.end() ? 0.0 : g_it->second;
            m.bound = b_it == chosen->bound.end() ? 0.0 : b_it->second;
            m.margin = m.g_pi - m.bound;
            m.phi = chosen->phi;
            report.samples.push_back(m);
        }
    }
    note_tail(report, tail_failed);
    finish(report);
    if (prep.defective) report.verdict = Verdict::not_certified;
    return report;
}

CertReport certify_direct_pd(const Network& net, const CertOptions& o) {
    Prepared prep;
    CertReport report = start_report(net, o, Method::direct, prep);
    if (prep.invalid) return report;

    struct DirectPoint {
        double best = -std::numeric_limits<double>::infinity();
        DissipationEig eig;
        double phi = 0.0;
        PhiInterval interval;
        double threshold = 0.0;
    };
    auto evaluate = [&](double omega) {
        DirectPoint p;
        try {
            p.interval = admissible_phi_interval(net, omega);
        } catch (const ModelError&) {
            return p;
        }
        double y_scale = 0.0;
        for (std::size_t k : prep.active)
            y_scale = std::max(y_scale, std::abs(eval_load_admittance(net.loads()[k].model, omega)));
        p.threshold = o.margin * y_scale;
        for (double phi : phi_candidates(p.interval, o.interior_phi)) {
            if (o.phi_switch && ((omega < *o.phi_switch) != (phi == 0.0))) continue;
            const DissipationEig e = dissipation_eigen(net, omega, phi);
            if (e.lambda_min - p.threshold > p.best) {
                p.best = e.lambda_min - p.threshold;
                p.eig = e;
                p.phi = phi;
            }
        }
        return p;
    };

    for (double omega : log_grid(o.band, o.points)) {
        const DirectPoint p = evaluate(omega);
        FrequencyPoint pt;
        pt.omega = omega;
        pt.phi = p.phi;
        pt.direct_ok = p.best > 0.0;
        pt.status = pt.direct_ok ? PointStatus::certified : PointStatus::uncovered;
        pt.w = p.eig.lambda_min;
        pt.w_network = p.eig.w_network;
        pt.w_loads = p.eig.w_loads;
        report.points.push_back(pt);
        report.schedule.samples.push_back({omega, p.phi, p.interval});
        report.samples.push_back({omega, net.loads().size(), Method::direct, p.eig.lambda_min, p.threshold, p.best,
                                  p.phi});
    }
    std::vector<double> tail_failed;
    for (double omega : tail_frequencies(o))
        if (!(evaluate(omega).best > 0.0)) tail_failed.push_back(omega);
    note_tail(report, tail_failed);
    finish(report);
    if (prep.defective) report.verdict = Verdict::not_certified;
    return report;
}

CertReport certify(const Network& net, const CertOptions& o) {
    if (o.method == Method::path) return certify_path_method(net, o);
    if (o.method == Method::direct) return certify_direct_pd(net, o);
    CertReport path = certify_path_method(net, o);
    if (path.verdict == Verdict::invalid_input) {
        path.method = Method::both;
        return path;
    }
    const CertReport direct = certify_direct_pd(net, o);
    path.method = Method::both;
    for (std::size_t i = 0; i < path.points.size(); ++i) {
        FrequencyPoint& pt = path.points[i];
        const FrequencyPoint& d = direct.points[i];
        pt.direct_ok = d.direct_ok;
        pt.w = d.w;
        pt.w_network = d.w_network;
        pt.w_loads = d.w_loads;
        if (pt.status == PointStatus::uncovered && d.direct_ok) {
            pt.status = PointStatus::certified;
            pt.phi = d.phi;
            path.schedule.samples[i].phi = d.phi;
        }
    }
    path.samples.insert(path.samples.end(), direct.samples.begin(), direct.samples.end());
    std::vector<double> tail;
    for (double w : path.tail_uncovered)
        if (std::find(direct.tail_uncovered.begin(), direct.tail_uncovered.end(), w) != direct.tail_uncovered.end())
            tail.push_back(w);
    path.tail_uncovered = tail;
    const bool defective = path.verdict == Verdict::not_certified &&
                           std::any_of(path.loads.begin(), path.loads.end(), [](const LoadSummary& s) {
                               return !s.skipped && !s.note.empty();
                           });
    finish(path);
    if (defective) path.verdict = Verdict::not_certified;
    return path;
}

namespace {

std::string fmt(double v, int precision = 6) {
    std::ostringstream out;
    out << std::setprecision(precision) << v;
    return out.str();
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string("none"); }

/// Decomposition text without the split fractions, so runs group by path choice.
std::string paths_only(const std::string& d) {
    std::string out;
    bool skip = false;
    for (char ch : d) {
        if (ch == '[') skip = true;
        if (!skip) out += ch;
        if (ch == ']') skip = false;
    }
    return out;
}

}  // namespace

void write_text_report(std::ostream& out, const Network& net, const CertReport& r) {
    out << "verdict: " << to_string(r.verdict) << "\n";
    out << "method: " << to_string(r.method) << "\n";
    out << "grid: " << r.options.points << " log-spaced points over [" << fmt(r.options.band.lo) << ", "
        << fmt(r.options.band.hi) << "] rad/s; margin " << fmt(r.options.margin * 100.0) << "%\n";
    out << "bound mode: " << (r.options.bound_mode == BoundMode::constant_bound ? "constant" : "frequency profile")
        << "\n";
    out << "note: the certificate holds at the grid points only\n";
    for (const LoadSummary& s : r.loads) {
        out << "load " << s.id << " (" << load_kind_name(net.loads()[s.load].model) << " at bus "
            << net.buses()[net.loads()[s.load].bus].name << ")";
        if (s.skipped) {
            out << ": skipped, " << s.note << "\n";
            continue;
        }
        out << ": Y_max " << fmt(s.y_max) << " S at " << fmt(s.argmax) << " rad/s"
            << (s.argmax_at_edge ? " (band edge)" : "") << "; crossover " << fmt_opt(s.crossover)
            << "; line band to " << fmt_opt(s.omega_line) << "; cap band from " << fmt_opt(s.omega_cap) << "\n";
        if (!s.note.empty()) out << "  " << s.note << "\n";
    }
    if (r.method != Method::direct) {
        out << "phi switch: " << fmt_opt(r.phi_switch)
            << (r.options.phi_switch ? " (override)" : " (automatic)") << "\n";
    }

    out << "coverage:\n";
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const FrequencyPoint& p = r.points[i];
        std::size_t j = i;
        auto same = [&](const FrequencyPoint& q) {
            return q.status == p.status && (q.phi == 0.0) == (p.phi == 0.0) && (q.phi < 0.0) == (p.phi < 0.0) &&
                   paths_only(q.decomposition) == paths_only(p.decomposition) &&
                   q.path_covered == p.path_covered;
        };
        while (j + 1 < r.points.size() && same(r.points[j + 1])) ++j;
        out << "  [" << fmt(p.omega) << ", " << fmt(r.points[j].omega) << "] " << to_string(p.status);
        if (p.status != PointStatus::uncovered) out << (p.phi == 0.0 ? ", phi = 0" : (p.phi < 0.0 ? ", phi < 0" : ", phi > 0"));
        if (p.status == PointStatus::passive)
            out << (p.path_covered ? ", also path-covered" : ", no decomposition covers the full bound");
        if (!p.decomposition.empty()) out << ", " << p.decomposition;
        out << "\n";
        i = j;
    }
    for (const Interval& g : r.gaps) out << "gap: [" << fmt(g.lo) << ", " << fmt(g.hi) << "] rad/s uncovered\n";
    for (const Interval& g : r.passive_uncovered)
        out << "uncertified but passive: [" << fmt(g.lo) << ", " << fmt(g.hi) << "] rad/s\n";
    for (const std::string& d : r.diagnostics) out << "diagnostic: " << d << "\n";
}

void write_csv_report(std::ostream& out, const Network& net, const CertReport& r) {
    out << "omega_rad_s,load,method,g_pi,bound,margin,phi\n";
    out << std::setprecision(10);
    for (const MarginSample& m : r.samples) {
        out << m.omega << ',' << (m.load < net.loads().size() ? net.loads()[m.load].id : std::string("all")) << ','
            << to_string(m.method) << ',' << m.g_pi << ',' << m.bound << ',' << m.margin << ',' << m.phi << '\n';
    }
}

}  // namespace dcstab
