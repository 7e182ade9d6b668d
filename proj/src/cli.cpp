#include "dcstab/cli.hpp"

#include "dcstab/certify.hpp"
#include "dcstab/generate.hpp"
#include "dcstab/oracle.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace dcstab {

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string netlist;
    std::string wmin = "1";
    std::string wmax = "1e6";
    int points = 2000;
    double margin = 0.02;
    std::string method = "path";
    std::string phi_switch;
    std::string out;
    std::uint64_t seed = 20240611;
    std::string bound = "constant";
};

void add_common(CLI::App* app, RunConfig& cfg) {
    app->add_option("--wmin", cfg.wmin, "Lowest frequency, rad/s (suffix hz for Hz)");
    app->add_option("--wmax", cfg.wmax, "Highest frequency, rad/s (suffix hz for Hz)");
    app->add_option("--points", cfg.points, "Number of log-spaced grid points")->check(CLI::Range(2, 10000000));
    app->add_option("--margin", cfg.margin, "Relative strictness margin")->check(CLI::NonNegativeNumber);
    app->add_option("--method", cfg.method, "Certificate: path, direct or both")
        ->check(CLI::IsMember({"path", "direct", "both"}));
    app->add_option("--phi-switch", cfg.phi_switch, "Frequency where the negative rotation starts");
    app->add_option("--out", cfg.out, "Output file");
    app->add_option("--seed", cfg.seed, "Seed for randomized runs");
    app->add_option("--bound", cfg.bound, "Load bound: constant or profile")
        ->check(CLI::IsMember({"constant", "profile"}));
}

double frequency(const std::string& text, const char* flag) {
    auto v = parse_quantity(text, true);
    if (!v || !(*v > 0.0)) throw UsageError(std::string("bad frequency for ") + flag + ": '" + text + "'");
    return *v;
}

CertOptions options_from(const RunConfig& cfg) {
    CertOptions o;
    o.band = {frequency(cfg.wmin, "--wmin"), frequency(cfg.wmax, "--wmax")};
    if (!(o.band.hi > o.band.lo)) throw UsageError("--wmax must exceed --wmin");
    o.points = cfg.points;
    o.margin = cfg.margin;
    o.method = cfg.method == "direct" ? Method::direct : (cfg.method == "both" ? Method::both : Method::path);
    if (!cfg.phi_switch.empty()) o.phi_switch = frequency(cfg.phi_switch, "--phi-switch");
    o.bound_mode = cfg.bound == "profile" ? BoundMode::frequency_profile : BoundMode::constant_bound;
    return o;
}

std::size_t load_index(const Network& net, const std::string& id) {
    if (net.loads().empty()) throw UsageError("network has no loads");
    if (id.empty()) return 0;
    if (auto k = net.find_load(id)) return *k;
    throw UsageError("unknown load '" + id + "'");
}

/// "2,3,gnd": node names from the load bus to the path end.
LoadPath parse_path(const Network& net, std::size_t load, const std::string& text) {
    std::vector<std::string> names;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) names.push_back(item);
    if (names.size() < 2) throw UsageError("path needs at least two nodes");
    auto node = [&](const std::string& name) {
        if (name == "gnd") return net.ground_node();
        if (auto b = net.find_bus(name)) return *b;
        throw UsageError("unknown path node '" + name + "'");
    };
    LoadPath path{load, {}};
    if (node(names.front()) != net.loads()[load].bus) throw UsageError("path must start at the load bus");
    for (std::size_t i = 0; i + 1 < names.size(); ++i) {
        const std::size_t a = node(names[i]);
        const std::size_t b = node(names[i + 1]);
        std::optional<std::size_t> found;
        for (std::size_t e = 0; e < net.elements().size() && !found; ++e) {
            const Element& el = net.elements()[e];
            bool used = std::any_of(path.edges.begin(), path.edges.end(), [&](const PathEdge& p) { return p.element == e; });
            if (used) continue;
            if (el.is_line() && ((el.line().from == a && el.line().to == b) || (el.line().from == b && el.line().to == a)))
                found = e;
            if (!el.is_line() && el.cap().bus == a && b == net.ground_node()) found = e;
        }
        if (!found) throw UsageError("no element between '" + names[i] + "' and '" + names[i + 1] + "'");
        path.edges.push_back({*found, a, b});
    }
    return path;
}

/// "0", a number of radians, or "max" for the most negative admissible rotation.
double phi_at(const Network& net, const std::string& spec, double omega) {
    if (spec == "max") return admissible_phi_interval(net, omega).lo;
    try {
        std::size_t used = 0;
        const double v = std::stod(spec, &used);
        if (used == spec.size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("bad --phi '" + spec + "'");
}

class Output {
public:
    Output(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw UsageError("cannot write '" + path + "'");
            out_ = &file_;
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::ofstream file_;
    std::ostream* out_;
};

int exit_for(Verdict v) {
    switch (v) {
        case Verdict::certified: return exit_ok;
        case Verdict::not_certified: return exit_negative;
        case Verdict::invalid_input: return exit_invalid;
    }
    return exit_invalid;
}

int cmd_certify(const RunConfig& cfg, std::ostream& out) {
    const Network net = read_netlist(cfg.netlist);
    const CertReport report = certify(net, options_from(cfg));
    write_text_report(out, net, report);
    if (!cfg.out.empty()) {
        Output csv(cfg.out, out);
        write_csv_report(csv.stream(), net, report);
        std::filesystem::path text_path(cfg.out);
        text_path.replace_extension(".txt");
        Output text(text_path.string(), out);
        write_text_report(text.stream(), net, report);
    }
    return exit_for(report.verdict);
}

struct SweepArgs {
    std::string what;
    std::string load;
    std::string path;
    std::string phi = "0";
    bool unloaded = false;
};

int cmd_sweep(const RunConfig& cfg, const SweepArgs& args, std::ostream& out) {
    const Network net = read_netlist(cfg.netlist);
    const CertOptions o = options_from(cfg);
    const auto grid = log_grid(o.band, o.points);
    Output sink(cfg.out, out);
    std::ostream& csv = sink.stream();
    csv << std::setprecision(10);

    if (args.what == "load_adm") {
        const Load& load = net.loads().at(load_index(net, args.load));
        csv << "omega_rad_s,re_y,im_y\n";
        for (double w : grid) {
            const Complex y = eval_load_admittance(load.model, w);
            csv << w << ',' << y.real() << ',' << y.imag() << '\n';
        }
        return exit_ok;
    }
    if (args.what == "pd_eig") {
        csv << "omega_rad_s,phi,lambda_min,w_network,w_loads\n";
        for (double w : grid) {
            const double phi = phi_at(net, args.phi, w);
            const DissipationEig e = dissipation_eigen(net, w, phi, !args.unloaded);
            csv << w << ',' << phi << ',' << e.lambda_min << ',' << e.w_network << ',' << e.w_loads << '\n';
        }
        return exit_ok;
    }

    const std::size_t k = load_index(net, args.load);
    if (args.what == "path_g") {
        std::optional<LoadPath> fixed;
        if (!args.path.empty()) fixed = parse_path(net, k, args.path);
        const DecompositionSearch search(net);
        csv << "omega_rad_s,phi,g_pi,load_abs_y\n";
        for (double w : grid) {
            const double phi = phi_at(net, args.phi, w);
            const auto g = element_conductances(net, w, phi);
            double gp = 0.0;
            if (fixed) {
                try {
                    gp = path_conductance(g, *fixed);
                } catch (const PathInactive&) {
                    gp = 0.0;
                }
            } else {
                gp = search.best_single(g, k);
            }
            csv << w << ',' << phi << ',' << gp << ',' << std::abs(eval_load_admittance(net.loads()[k].model, w))
                << '\n';
        }
        return exit_ok;
    }
    // middlebrook
    if (args.path.empty()) throw UsageError("middlebrook needs --path");
    const LoadPath path = parse_path(net, k, args.path);
    csv << "omega_rad_s,phi,ratio,eta,passes\n";
    std::size_t passing = 0;
    for (double w : grid) {
        const double phi = phi_at(net, args.phi, w);
        csv << w << ',' << phi << ',';
        try {
            const MiddlebrookResult m = middlebrook_ratio(net, path, w, phi);
            csv << m.ratio << ',' << m.eta << ',' << (m.passes ? 1 : 0) << '\n';
            passing += m.passes ? 1 : 0;
        } catch (const ModelError&) {
            csv << "nan,nan,0\n";
        }
    }
    return passing == grid.size() ? exit_ok : exit_negative;
}

struct SizeCapArgs {
    std::string load;
    std::string cap_bus;
};

/// Network with every shunt capacitor at `bus` replaced by one ideal capacitor of value c.
Network with_cap(const Network& net, std::size_t bus, double c) {
    std::vector<Element> elements;
    for (const Element& e : net.elements())
        if (e.is_line() || e.cap().bus != bus) elements.push_back(e);
    elements.push_back({"sized_cap", ShuntCap{bus, c, 0.0}});
    return Network(net.buses(), std::move(elements), net.loads());
}

int cmd_size_cap(const RunConfig& cfg, const SizeCapArgs& args, std::ostream& out) {
    const Network net = read_netlist(cfg.netlist);
    CertOptions o = options_from(cfg);
    o.method = Method::path;
    o.probe_passive_region = false;
    const std::size_t k = load_index(net, args.load);
    const std::size_t load_bus = net.loads()[k].bus;
    const std::size_t cap_bus = args.cap_bus.empty() ? load_bus : net.bus_index(args.cap_bus);
    if (net.is_terminal(cap_bus)) throw UsageError("capacitor bus must be an internal bus");

    const auto diags = validate(net);
    if (!diags.empty()) {
        for (const auto& d : diags) out << "diagnostic: " << d << "\n";
        return exit_invalid;
    }
    const AdmittanceBound bound = admittance_bound(net.loads()[k].model, o.band, o.bound_points);
    const auto crossover = crossover_frequency(net.loads()[k].model, o.band, o.bound_points);
    const double tau = net.tau_max().value_or(0.0);

    // Smallest total resistance over line-only paths from the load to a source or ground.
    std::optional<double> r_path;
    for (const LoadPath& p : structural_paths(net, k, net.buses().size())) {
        double r = 0.0;
        bool lines_only = true;
        for (const PathEdge& e : p.edges) {
            const Element& el = net.elements()[e.element];
            if (!el.is_line()) {
                lines_only = false;
                break;
            }
            r += el.line().r;
        }
        if (lines_only && (!r_path || r < *r_path)) r_path = r;
    }

    out << std::setprecision(7);
    out << "load " << net.loads()[k].id << " at bus " << net.buses()[load_bus].name << "\n";
    out << "Y_max: " << bound.y_max << " S at " << bound.argmax << " rad/s\n";
    if (crossover)
        out << "crossover: " << *crossover << " rad/s\n";
    else
        out << "crossover: none in the band\n";
    out << "tau_max: " << tau << " s\n";
    if (r_path) {
        out << "line path resistance: " << *r_path << " ohm\n";
        try {
            out << "line band limit: " << line_band_limit(*r_path, bound.y_max, tau) << " rad/s\n";
            out << "capacitance bound at the load bus: C > " << min_stabilizing_cap(bound.y_max, tau, *r_path) << " F\n";
        } catch (const ModelError& e) {
            out << "capacitance bound at the load bus: none (" << e.what() << ")\n";
        }
    } else {
        out << "line path resistance: no line-only path to a source\n";
    }

    double existing = 0.0;
    for (const Element& e : net.elements())
        if (!e.is_line() && e.cap().bus == cap_bus) existing += e.cap().c;
    if (existing > 0.0) {
        out << "existing capacitance at bus " << net.buses()[cap_bus].name << ": " << existing << " F\n";
        if (cap_bus == load_bus) {
            try {
                out << "cap band limit: " << cap_band_limit(existing, bound.y_max, tau) << " rad/s\n";
            } catch (const ModelError& e) {
                out << "cap band limit: none (" << e.what() << ")\n";
            }
            out << "largest admissible path resistance: " << max_path_resistance(bound.y_max, tau, existing) << " ohm\n";
        }
        const CertReport r = certify_path_method(net, o);
        out << "existing network: " << to_string(r.verdict) << "\n";
        for (const Interval& g : r.gaps) out << "  gap: [" << g.lo << ", " << g.hi << "] rad/s\n";
        CertOptions probe = o;
        probe.probe_passive_region = true;
        const CertReport rp = certify_path_method(net, probe);
        for (const Interval& g : rp.passive_uncovered)
            out << "  uncertified but passive: [" << g.lo << ", " << g.hi << "] rad/s\n";
    }

    auto works = [&](double c) { return certify_path_method(with_cap(net, cap_bus, c), o).verdict == Verdict::certified; };
    double lo = std::max(bound.y_max * tau, 1e-9);
    double hi = 1.0;
    if (!works(hi)) {
        out << "numeric sizing: infeasible, no capacitance up to 1 F at bus " << net.buses()[cap_bus].name
            << " certifies the network\n";
        return exit_negative;
    }
    while (hi / lo > 1.01) {
        const double mid = std::sqrt(lo * hi);
        (works(mid) ? hi : lo) = mid;
    }
    out << "numeric sizing: C = " << hi << " F at bus " << net.buses()[cap_bus].name << " (1% resolution)\n";
    const Network sized = with_cap(net, cap_bus, hi);
    try {
        const EigenVerdict v = eigen_verdict(build_state_space(sized, solve_dc_operating_point(sized)));
        out << "oracle at sized C: " << (v.stable ? "stable" : "unstable") << ", margin " << v.margin << " 1/s\n";
    } catch (const ModelError& e) {
        out << "oracle at sized C: unavailable (" << e.what() << ")\n";
    }
    return exit_ok;
}

struct OracleArgs {
    int fuzz = 0;
};

int cmd_fuzz(const RunConfig& cfg, int count, std::ostream& out) {
    CertOptions o = options_from(cfg);
    o.probe_passive_region = false;
    std::mt19937_64 rng(cfg.seed);
    int violations = 0;
    out << "index,buses,loads,path,direct,stable,margin\n" << std::setprecision(6);
    for (int i = 0; i < count; ++i) {
        const Network net = random_network(rng);
        o.method = Method::path;
        const bool path = certify(net, o).verdict == Verdict::certified;
        o.method = Method::direct;
        const bool direct = certify(net, o).verdict == Verdict::certified;
        const EigenVerdict v = eigen_verdict(build_state_space(net, solve_dc_operating_point(net)));
        if ((path || direct) && !v.stable) ++violations;
        out << i << ',' << net.buses().size() << ',' << net.loads().size() << ',' << path << ',' << direct << ','
            << v.stable << ',' << v.margin << '\n';
    }
    out << "# violations: " << violations << "\n";
    return violations == 0 ? exit_ok : exit_negative;
}

int cmd_oracle(const RunConfig& cfg, const OracleArgs& args, std::ostream& out) {
    if (args.fuzz > 0) return cmd_fuzz(cfg, args.fuzz, out);
    const Network net = read_netlist(cfg.netlist);
    const CertOptions o = options_from(cfg);
    const OperatingPoint op = solve_dc_operating_point(net);
    const DescriptorSystem sys = build_state_space(net, op);
    const EigenVerdict v = eigen_verdict(sys);
    std::vector<double> lambdas;
    for (int i = 0; i <= 20; ++i) lambdas.push_back(i / 20.0);
    const ZeroExclusion z = zero_exclusion_scan(net, lambdas, log_grid(o.band, std::min(o.points, 400)));

    std::ostringstream summary;
    summary << std::setprecision(7);
    summary << "# verdict: " << (v.stable ? "stable" : "unstable") << "\n";
    summary << "# states: " << sys.a.rows() << ", finite eigenvalues: " << v.eigenvalues.size() << "\n";
    summary << "# margin: " << v.margin << " 1/s\n";
    summary << "# zero exclusion: " << (z.excluded ? "excluded" : "not excluded") << ", min relative sigma "
            << z.min_relative_sigma << " at lambda " << z.at_lambda << ", omega " << z.at_omega << " rad/s; min |det| "
            << z.min_abs_det << "\n";
    for (const auto& w : sys.warnings) summary << "# warning: " << w << "\n";
    for (const auto& d : op.diagnostics) summary << "# warning: " << d << "\n";

    Output sink(cfg.out, out);
    out << summary.str();
    std::ostream& csv = sink.stream();
    csv << "re,im\n" << std::setprecision(12);
    for (Complex l : v.eigenvalues) csv << l.real() << ',' << l.imag() << '\n';
    return v.stable ? exit_ok : exit_negative;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small-signal stability certificates for DC microgrids", "dcstab"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto* certify_cmd = app.add_subcommand("certify", "Certify a netlist (exit 0 certified, 1 not, 2 invalid)");
    certify_cmd->add_option("netlist", cfg.netlist, "Netlist file")->required();
    add_common(certify_cmd, cfg);

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Frequency sweep as CSV");
    sweep_cmd->add_option("what", sweep.what, "load_adm, path_g, pd_eig or middlebrook")
        ->required()
        ->check(CLI::IsMember({"load_adm", "path_g", "pd_eig", "middlebrook"}));
    sweep_cmd->add_option("netlist", cfg.netlist, "Netlist file")->required();
    sweep_cmd->add_option("--load", sweep.load, "Load id (default: first load)");
    sweep_cmd->add_option("--path", sweep.path, "Comma-separated nodes from the load bus, e.g. 2,3,gnd");
    sweep_cmd->add_option("--phi", sweep.phi, "Rotation in radians, or 'max' for the most negative admissible");
    sweep_cmd->add_flag("--unloaded", sweep.unloaded, "pd_eig without the loads");
    add_common(sweep_cmd, cfg);

    SizeCapArgs size;
    auto* size_cmd = app.add_subcommand("size-cap", "Capacitor sizing for one load");
    size_cmd->add_option("netlist", cfg.netlist, "Netlist file")->required();
    size_cmd->add_option("--load", size.load, "Load id (default: first load)");
    size_cmd->add_option("--cap-bus", size.cap_bus, "Bus carrying the capacitor (default: the load bus)");
    add_common(size_cmd, cfg);

    OracleArgs oracle;
    auto* oracle_cmd = app.add_subcommand("oracle", "State-space eigenvalues (exit 0 stable, 1 unstable)");
    oracle_cmd->add_option("netlist", cfg.netlist, "Netlist file");
    oracle_cmd->add_option("--fuzz", oracle.fuzz, "Check certificates against the oracle on N random networks");
    add_common(oracle_cmd, cfg);

    SweepArgs mb;
    mb.what = "middlebrook";
    auto* mb_cmd = app.add_subcommand("middlebrook", "Impedance-ratio criterion along one path, as CSV");
    mb_cmd->add_option("netlist", cfg.netlist, "Netlist file")->required();
    mb_cmd->add_option("--load", mb.load, "Load id (default: first load)");
    mb_cmd->add_option("--path", mb.path, "Comma-separated nodes from the load bus")->required();
    mb_cmd->add_option("--phi", mb.phi, "Rotation in radians, or 'max'");
    add_common(mb_cmd, cfg);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_invalid;
    }

    try {
        if (*certify_cmd) return cmd_certify(cfg, out);
        if (*sweep_cmd) return cmd_sweep(cfg, sweep, out);
        if (*size_cmd) return cmd_size_cap(cfg, size, out);
        if (*oracle_cmd) {
            if (oracle.fuzz <= 0 && cfg.netlist.empty()) throw UsageError("oracle needs a netlist or --fuzz");
            return cmd_oracle(cfg, oracle, out);
        }
        if (*mb_cmd) return cmd_sweep(cfg, mb, out);
    } catch (const NetlistError& e) {
        err << "error: " << cfg.netlist << ": " << e.what() << "\n";
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
    }
    return exit_invalid;
}

}  // namespace dcstab
