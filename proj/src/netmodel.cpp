#include "dcstab/netmodel.hpp"

#include "dcstab/admittance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace dcstab {

Network::Network(std::vector<Bus> buses, std::vector<Element> elements, std::vector<Load> loads)
    : buses_(std::move(buses)), elements_(std::move(elements)), loads_(std::move(loads)) {
    std::set<std::string> names;
    for (const Bus& b : buses_) {
        if (b.name.empty()) throw ModelError("bus with empty name");
        if (b.name == "gnd") throw ModelError("bus name 'gnd' is reserved for the reference node");
        if (!names.insert(b.name).second) throw ModelError("duplicate bus '" + b.name + "'");
    }
    std::set<std::string> ids;
    for (const Element& e : elements_) {
        if (!ids.insert(e.id).second) throw ModelError("duplicate element id '" + e.id + "'");
        if (e.is_line()) {
            const Line& l = e.line();
            if (l.from >= buses_.size() || l.to >= buses_.size())
                throw ModelError("line '" + e.id + "' references an unknown bus");
            if (l.from == l.to) throw ModelError("line '" + e.id + "' is a self-loop");
            if (!(l.r >= 0.0) || !(l.l >= 0.0))
                throw ModelError("line '" + e.id + "' needs r >= 0 and l >= 0");
        } else {
            const ShuntCap& c = e.cap();
            if (c.bus >= buses_.size()) throw ModelError("cap '" + e.id + "' references an unknown bus");
            if (!(c.c > 0.0)) throw ModelError("cap '" + e.id + "' needs c > 0");
            if (!(c.r_esr >= 0.0)) throw ModelError("cap '" + e.id + "' needs resr >= 0");
        }
    }
    for (const Load& l : loads_) {
        if (!ids.insert(l.id).second) throw ModelError("duplicate element id '" + l.id + "'");
        if (l.bus >= buses_.size()) throw ModelError("load '" + l.id + "' references an unknown bus");
    }
    matrix_index_.assign(buses_.size(), std::nullopt);
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        if (buses_[i].kind == BusKind::internal) {
            matrix_index_[i] = internal_.size();
            internal_.push_back(i);
        }
    }
}

std::optional<std::size_t> Network::find_bus(std::string_view name) const {
    for (std::size_t i = 0; i < buses_.size(); ++i)
        if (buses_[i].name == name) return i;
    return std::nullopt;
}

std::size_t Network::bus_index(std::string_view name) const {
    if (auto i = find_bus(name)) return *i;
    throw ModelError("unknown bus '" + std::string(name) + "'");
}

std::optional<std::size_t> Network::find_load(std::string_view id) const {
    for (std::size_t i = 0; i < loads_.size(); ++i)
        if (loads_[i].id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> Network::find_element(std::string_view id) const {
    for (std::size_t i = 0; i < elements_.size(); ++i)
        if (elements_[i].id == id) return i;
    return std::nullopt;
}

bool Network::is_terminal(std::size_t node) const {
    return node >= buses_.size() || buses_[node].kind != BusKind::internal;
}

std::string Network::node_name(std::size_t node) const {
    return node >= buses_.size() ? std::string("gnd") : buses_[node].name;
}

std::optional<std::size_t> Network::matrix_index(std::size_t bus) const {
    return bus < matrix_index_.size() ? matrix_index_[bus] : std::nullopt;
}

std::optional<double> Network::tau_max() const {
    double tau = 0.0;
    for (const Element& e : elements_) {
        if (!e.is_line()) continue;
        const Line& l = e.line();
        if (l.r == 0.0) return std::nullopt;
        tau = std::max(tau, l.l / l.r);
    }
    return tau;
}

Network Network::with_element(Element e) const {
    auto elements = elements_;
    elements.push_back(std::move(e));
    return Network(buses_, std::move(elements), loads_);
}

Network Network::with_load(Load l) const {
    auto loads = loads_;
    loads.push_back(std::move(l));
    return Network(buses_, elements_, std::move(loads));
}

// ---------------------------------------------------------------------------
// Netlist parsing

NetlistError::NetlistError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

std::optional<double> parse_quantity(std::string_view token, bool allow_hz) {
    if (token.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) return std::nullopt;
    std::string suffix(ptr, end);
    std::transform(suffix.begin(), suffix.end(), suffix.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    // "M" (mega) and "m" (milli) differ only by case, so resolve mega before lowering.
    const std::string_view raw(ptr, static_cast<std::size_t>(end - ptr));
    bool hz = false;
    if (allow_hz && suffix.size() >= 2 && suffix.compare(suffix.size() - 2, 2, "hz") == 0) {
        hz = true;
        suffix.resize(suffix.size() - 2);
    }
    double mult = 1.0;
    if (suffix.empty()) {
        mult = 1.0;
    } else if (suffix == "meg" || (!raw.empty() && raw.front() == 'M')) {
        mult = 1e6;
        if (suffix != "meg" && suffix != "m") return std::nullopt;
    } else if (suffix == "t") {
        mult = 1e12;
    } else if (suffix == "g") {
        mult = 1e9;
    } else if (suffix == "k") {
        mult = 1e3;
    } else if (suffix == "m") {
        mult = 1e-3;
    } else if (suffix == "u") {
        mult = 1e-6;
    } else if (suffix == "n") {
        mult = 1e-9;
    } else if (suffix == "p") {
        mult = 1e-12;
    } else if (suffix == "f") {
        mult = 1e-15;
    } else {
        return std::nullopt;
    }
    value *= mult;
    if (hz) value *= 2.0 * M_PI;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

namespace {

struct PendingBus {
    std::string name;
    BusKind kind;
    std::size_t line;
};

struct Directive {
    std::size_t line = 0;
    std::vector<std::string> positional;
    std::map<std::string, std::string> keys;
};

Directive tokenize(std::string_view text, std::size_t line_no) {
    Directive d;
    d.line = line_no;
    std::istringstream in{std::string(text)};
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            if (!d.keys.empty()) throw NetlistError(line_no, "positional argument '" + tok + "' after key=value");
            d.positional.push_back(tok);
        } else {
            std::string key = tok.substr(0, eq);
            std::transform(key.begin(), key.end(), key.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
            if (key.empty() || eq + 1 == tok.size())
                throw NetlistError(line_no, "malformed key=value '" + tok + "'");
            if (!d.keys.emplace(key, tok.substr(eq + 1)).second)
                throw NetlistError(line_no, "repeated key '" + key + "'");
        }
    }
    return d;
}

class KeyReader {
public:
    KeyReader(const Directive& d, std::set<std::string> allowed) : d_(d) {
        for (const auto& [k, v] : d.keys)
            if (!allowed.count(k)) throw NetlistError(d.line, "unknown key '" + k + "'");
    }

    double number(const std::string& key, bool allow_hz = false) const {
        auto it = d_.keys.find(key);
        if (it == d_.keys.end()) throw NetlistError(d_.line, "missing " + key + "=");
        auto v = parse_quantity(it->second, allow_hz);
        if (!v) throw NetlistError(d_.line, "bad number for " + key + ": '" + it->second + "'");
        return *v;
    }

    double number_or(const std::string& key, double fallback) const {
        return d_.keys.count(key) ? number(key) : fallback;
    }

    std::optional<std::string> text(const std::string& key) const {
        auto it = d_.keys.find(key);
        if (it == d_.keys.end()) return std::nullopt;
        return it->second;
    }

private:
    const Directive& d_;
};

void expect_positional(const Directive& d, std::size_t n, const char* usage) {
    if (d.positional.size() != n) throw NetlistError(d.line, std::string("usage: ") + usage);
}

std::string unique_id(std::map<std::string, int>& seen, const std::string& base) {
    const int n = ++seen[base];
    return n == 1 ? base : base + "#" + std::to_string(n);
}

}  // namespace

Network parse_netlist(std::string_view text, const std::filesystem::path& base_dir) {
    std::vector<PendingBus> bus_decls;
    struct PendingSource {
        std::string bus;
        double v;
        std::size_t line;
    };
    std::vector<PendingSource> sources;
    struct PendingLine {
        std::string id, a, b;
        double r, l;
        std::size_t line;
    };
    std::vector<PendingLine> lines;
    struct PendingCap {
        std::string id, bus;
        double c, r_esr;
        std::size_t line;
    };
    std::vector<PendingCap> caps;
    struct PendingLoad {
        std::string id, bus;
        LoadModel model;
        std::size_t line;
    };
    std::vector<PendingLoad> loads;

    std::map<std::string, int> auto_ids;
    std::set<std::string> explicit_ids;
    auto take_id = [&](const KeyReader& keys, const Directive& d, const std::string& base) {
        if (auto id = keys.text("id")) {
            if (!explicit_ids.insert(*id).second) throw NetlistError(d.line, "duplicate element id '" + *id + "'");
            return *id;
        }
        return unique_id(auto_ids, base);
    };

    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        Directive d = tokenize(raw, line_no);
        if (d.positional.empty()) {
            if (!d.keys.empty()) throw NetlistError(line_no, "missing directive");
            continue;
        }
        const std::string kw = d.positional.front();
        if (kw == "bus" || kw == "ground") {
            expect_positional(d, 2, "bus|ground <name>");
            KeyReader keys(d, {});
            bus_decls.push_back({d.positional[1], kw == "bus" ? BusKind::internal : BusKind::ground, line_no});
        } else if (kw == "source") {
            expect_positional(d, 2, "source <bus> v=<volts>");
            KeyReader keys(d, {"v"});
            sources.push_back({d.positional[1], keys.number("v"), line_no});
        } else if (kw == "line") {
            expect_positional(d, 3, "line <busA> <busB> r=<ohms> l=<henries>");
            if (d.positional[1] == d.positional[2]) throw NetlistError(line_no, "self-loop on bus '" + d.positional[1] + "'");
            KeyReader keys(d, {"r", "l", "id"});
            const double r = keys.number("r");
            const double l = keys.number("l");
            if (r < 0.0 || l < 0.0) throw NetlistError(line_no, "line needs r >= 0 and l >= 0");
            lines.push_back({take_id(keys, d, "line:" + d.positional[1] + "-" + d.positional[2]),
                             d.positional[1], d.positional[2], r, l, line_no});
        } else if (kw == "cap") {
            expect_positional(d, 2, "cap <bus> c=<farads> [resr=<ohms>]");
            KeyReader keys(d, {"c", "resr", "id"});
            const double c = keys.number("c");
            const double resr = keys.number_or("resr", 0.0);
            if (c <= 0.0) throw NetlistError(line_no, "cap needs c > 0");
            if (resr < 0.0) throw NetlistError(line_no, "cap needs resr >= 0");
            caps.push_back({take_id(keys, d, "cap:" + d.positional[1]), d.positional[1], c, resr, line_no});
        } else if (kw == "load") {
            if (d.positional.size() != 3) throw NetlistError(line_no, "usage: load cpl|buck|table <bus> key=value...");
            const std::string& kind = d.positional[1];
            const std::string& bus = d.positional[2];
            try {
                if (kind == "cpl") {
                    KeyReader keys(d, {"p", "v", "id"});
                    CplLoad cpl{keys.number("p"), keys.number("v")};
                    if (!(cpl.power > 0.0) || !(cpl.voltage > 0.0))
                        throw NetlistError(line_no, "cpl needs p > 0 and v > 0");
                    loads.push_back({take_id(keys, d, "load:" + bus), bus, cpl, line_no});
                } else if (kind == "buck") {
                    KeyReader keys(d, {"vin", "r", "l", "c", "d", "gcinf", "wl", "wz", "wp", "h", "vm", "scale", "id"});
                    BuckParams p;
                    p.v_in = keys.number("vin");
                    p.r = keys.number("r");
                    p.l = keys.number("l");
                    p.c = keys.number("c");
                    p.duty = keys.number("d");
                    p.gc_inf = keys.number("gcinf");
                    p.omega_l = keys.number("wl", true);
                    p.omega_z = keys.number("wz", true);
                    p.omega_p = keys.number("wp", true);
                    p.h = keys.number("h");
                    p.v_m = keys.number("vm");
                    p.scale = keys.number_or("scale", 1.0);
                    loads.push_back({take_id(keys, d, "load:" + bus), bus, BuckLoad(p), line_no});
                } else if (kind == "table") {
                    KeyReader keys(d, {"file", "id"});
                    auto file = keys.text("file");
                    if (!file) throw NetlistError(line_no, "missing file=");
                    std::filesystem::path path(*file);
                    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
                    loads.push_back({take_id(keys, d, "load:" + bus), bus, TableLoad::read_csv(path), line_no});
                } else {
                    throw NetlistError(line_no, "unknown load kind '" + kind + "'");
                }
            } catch (const NetlistError&) {
                throw;
            } catch (const ModelError& e) {
                throw NetlistError(line_no, e.what());
            }
        } else {
            throw NetlistError(line_no, "unknown directive '" + kw + "'");
        }
    }

    if (bus_decls.empty()) throw NetlistError(0, "no buses");

    std::vector<Bus> buses;
    std::map<std::string, std::size_t> index;
    for (const PendingBus& b : bus_decls) {
        if (b.name == "gnd") throw NetlistError(b.line, "bus name 'gnd' is reserved");
        if (!index.emplace(b.name, buses.size()).second)
            throw NetlistError(b.line, "duplicate bus '" + b.name + "'");
        buses.push_back({b.name, b.kind, 0.0});
    }
    auto resolve = [&](const std::string& name, std::size_t line) {
        auto it = index.find(name);
        if (it == index.end()) throw NetlistError(line, "dangling bus reference '" + name + "'");
        return it->second;
    };
    for (const PendingSource& s : sources) {
        Bus& b = buses[resolve(s.bus, s.line)];
        if (b.kind != BusKind::internal) throw NetlistError(s.line, "bus '" + s.bus + "' is already a source or ground");
        b.kind = BusKind::source;
        b.voltage = s.v;
    }

    std::vector<Element> elements;
    std::set<std::string> used_ids;
    auto claim = [&](const std::string& id, std::size_t line) {
        if (!used_ids.insert(id).second) throw NetlistError(line, "duplicate element id '" + id + "'");
    };
    for (const PendingLine& l : lines) {
        claim(l.id, l.line);
        elements.push_back({l.id, Line{resolve(l.a, l.line), resolve(l.b, l.line), l.r, l.l}});
    }
    for (const PendingCap& c : caps) {
        claim(c.id, c.line);
        elements.push_back({c.id, ShuntCap{resolve(c.bus, c.line), c.c, c.r_esr}});
    }
    std::vector<Load> resolved_loads;
    for (PendingLoad& l : loads) {
        claim(l.id, l.line);
        resolved_loads.push_back({l.id, resolve(l.bus, l.line), std::move(l.model)});
    }
    return Network(std::move(buses), std::move(elements), std::move(resolved_loads));
}

Network read_netlist(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open netlist '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_netlist(ss.str(), path.parent_path());
}

// ---------------------------------------------------------------------------

std::vector<std::string> validate(const Network& net) {
    std::vector<std::string> diags;
    const auto& buses = net.buses();
    if (std::none_of(buses.begin(), buses.end(), [](const Bus& b) { return b.kind != BusKind::internal; }))
        diags.push_back("no source or ground bus");

    for (const Element& e : net.elements()) {
        if (!e.is_line()) continue;
        if (e.line().r == 0.0) diags.push_back("line '" + e.id + "': zero resistance, tau undefined");
    }

    // DC reachability through lines from any source or ground bus.
    std::vector<std::vector<std::size_t>> adj(buses.size());
    for (const Element& e : net.elements()) {
        if (!e.is_line()) continue;
        adj[e.line().from].push_back(e.line().to);
        adj[e.line().to].push_back(e.line().from);
    }
    std::vector<bool> reached(buses.size(), false);
    std::queue<std::size_t> q;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].kind != BusKind::internal) {
            reached[i] = true;
            q.push(i);
        }
    }
    while (!q.empty()) {
        const std::size_t u = q.front();
        q.pop();
        for (std::size_t v : adj[u]) {
            if (!reached[v]) {
                reached[v] = true;
                q.push(v);
            }
        }
    }
    std::set<std::size_t> load_buses;
    for (const Load& l : net.loads()) {
        load_buses.insert(l.bus);
        if (!reached[l.bus])
            diags.push_back("load '" + l.id + "' on bus '" + buses[l.bus].name + "': no path to source/ground");
    }
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (!reached[i] && !load_buses.count(i))
            diags.push_back("bus '" + buses[i].name + "': no path to source/ground");
    }
    return diags;
}

Eigen::MatrixXcd nodal_admittance(const Network& net, double omega, bool include_loads, double phi) {
    const auto n = static_cast<Eigen::Index>(net.internal_buses().size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const Element& e : net.elements()) {
        const Complex ye = eval_element_admittance(e, omega);
        if (e.is_line()) {
            const auto a = net.matrix_index(e.line().from);
            const auto b = net.matrix_index(e.line().to);
            if (a) y(static_cast<Eigen::Index>(*a), static_cast<Eigen::Index>(*a)) += ye;
            if (b) y(static_cast<Eigen::Index>(*b), static_cast<Eigen::Index>(*b)) += ye;
            if (a && b) {
                y(static_cast<Eigen::Index>(*a), static_cast<Eigen::Index>(*b)) -= ye;
                y(static_cast<Eigen::Index>(*b), static_cast<Eigen::Index>(*a)) -= ye;
            }
        } else if (auto a = net.matrix_index(e.cap().bus)) {
            y(static_cast<Eigen::Index>(*a), static_cast<Eigen::Index>(*a)) += ye;
        }
    }
    if (include_loads) y += load_admittance_matrix(net, omega);
    if (phi != 0.0) y *= std::polar(1.0, phi);
    return y;
}

Eigen::MatrixXcd load_admittance_matrix(const Network& net, double omega) {
    const auto n = static_cast<Eigen::Index>(net.internal_buses().size());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const Load& l : net.loads()) {
        if (auto a = net.matrix_index(l.bus)) {
            const auto i = static_cast<Eigen::Index>(*a);
            y(i, i) += eval_load_admittance(l.model, omega);
        }
    }
    return y;
}

namespace {

double dc_power(const LoadModel& m) {
    if (const auto* cpl = std::get_if<CplLoad>(&m)) return cpl->power;
    if (const auto* buck = std::get_if<BuckLoad>(&m)) return buck->power();
    return 0.0;  // tabulated loads carry no equilibrium information
}

}  // namespace

OperatingPoint solve_dc_operating_point(const Network& net) {
    const auto& buses = net.buses();
    const auto& internal = net.internal_buses();
    const auto n = static_cast<Eigen::Index>(internal.size());

    OperatingPoint op;
    op.voltages.assign(buses.size(), 0.0);
    double v_start = 0.0;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (buses[i].kind == BusKind::source) {
            op.voltages[i] = buses[i].voltage;
            v_start = std::max(v_start, buses[i].voltage);
        }
    }
    for (const Element& e : net.elements())
        if (e.is_line() && e.line().r == 0.0) throw InfeasibleOperatingPoint("line '" + e.id + "' has zero resistance");

    std::vector<double> power_at(buses.size(), 0.0);
    for (const Load& l : net.loads()) {
        const double p = dc_power(l.model);
        op.load_powers.push_back(p);
        power_at[l.bus] += p;
    }
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind != BusKind::internal && power_at[i] > 0.0 && op.voltages[i] <= 0.0)
            throw InfeasibleOperatingPoint("load on grounded bus '" + buses[i].name + "'");

    if (n == 0) return op;
    if (v_start <= 0.0) {
        if (std::any_of(internal.begin(), internal.end(), [&](std::size_t b) { return power_at[b] > 0.0; }))
            throw InfeasibleOperatingPoint("no feasible operating point: no source supplies the loads");
        return op;
    }

    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, v_start);
    auto full_voltage = [&](const Eigen::VectorXd& x, std::size_t bus) {
        auto k = net.matrix_index(bus);
        return k ? x(static_cast<Eigen::Index>(*k)) : op.voltages[bus];
    };
    // Current leaving each internal bus; scale is the sum of magnitudes of its terms.
    auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& f, Eigen::VectorXd& scale) {
        f = Eigen::VectorXd::Zero(n);
        scale = Eigen::VectorXd::Zero(n);
        for (const Element& e : net.elements()) {
            if (!e.is_line()) continue;
            const Line& l = e.line();
            const double i = (full_voltage(x, l.from) - full_voltage(x, l.to)) / l.r;
            if (auto a = net.matrix_index(l.from)) {
                f(static_cast<Eigen::Index>(*a)) += i;
                scale(static_cast<Eigen::Index>(*a)) += std::abs(i);
            }
            if (auto b = net.matrix_index(l.to)) {
                f(static_cast<Eigen::Index>(*b)) -= i;
                scale(static_cast<Eigen::Index>(*b)) += std::abs(i);
            }
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            const double p = power_at[internal[static_cast<std::size_t>(k)]];
            f(k) += p / x(k);
            scale(k) += std::abs(p / x(k));
        }
    };
    auto rel_norm = [&](const Eigen::VectorXd& f, const Eigen::VectorXd& scale) {
        const double s = std::max(scale.maxCoeff(), 1e-300);
        return f.cwiseAbs().maxCoeff() / s;
    };

    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(n, n);
    for (const Element& e : net.elements()) {
        if (!e.is_line()) continue;
        const Line& l = e.line();
        const double g = 1.0 / l.r;
        auto a = net.matrix_index(l.from);
        auto b = net.matrix_index(l.to);
        if (a) laplacian(static_cast<Eigen::Index>(*a), static_cast<Eigen::Index>(*a)) += g;
        if (b) laplacian(static_cast<Eigen::Index>(*b), static_cast<Eigen::Index>(*b)) += g;
        if (a && b) {
            laplacian(static_cast<Eigen::Index>(*a), static_cast<Eigen::Index>(*b)) -= g;
            laplacian(static_cast<Eigen::Index>(*b), static_cast<Eigen::Index>(*a)) -= g;
        }
    }

    Eigen::VectorXd f, scale;
    residual(v, f, scale);
    bool converged = rel_norm(f, scale) < 1e-9;
    Eigen::MatrixXd jac;
    for (int iter = 0; iter < 100 && !converged; ++iter) {
        jac = laplacian;
        for (Eigen::Index k = 0; k < n; ++k)
            jac(k, k) -= power_at[internal[static_cast<std::size_t>(k)]] / (v(k) * v(k));
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) break;
        const Eigen::VectorXd step = lu.solve(-f);
        double t = 1.0;
        Eigen::VectorXd next = v + step;
        while (next.minCoeff() <= 0.0 && t > 1e-6) {
            t *= 0.5;
            next = v + t * step;
        }
        if (next.minCoeff() <= 0.0) break;
        v = next;
        residual(v, f, scale);
        converged = rel_norm(f, scale) < 1e-9;
    }
    if (!converged) throw InfeasibleOperatingPoint("no feasible operating point");
    for (Eigen::Index k = 0; k < n; ++k) op.voltages[internal[static_cast<std::size_t>(k)]] = v(k);
    op.residual = rel_norm(f, scale);

    jac = laplacian;
    for (Eigen::Index k = 0; k < n; ++k) jac(k, k) -= power_at[internal[static_cast<std::size_t>(k)]] / (v(k) * v(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0.0)
        op.diagnostics.push_back("operating point is on the low-voltage branch");
    return op;
}

}  // namespace dcstab
