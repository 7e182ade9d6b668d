#include "dcstab/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace dcstab {

std::vector<std::string> LoadPath::node_names(const Network& net) const {
    std::vector<std::string> names;
    if (edges.empty()) return names;
    names.push_back(net.node_name(edges.front().from));
    for (const PathEdge& e : edges) names.push_back(net.node_name(e.to));
    return names;
}

std::string LoadPath::describe(const Network& net) const {
    std::ostringstream out;
    const auto names = node_names(net);
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    return out.str();
}

double SplitAllocation::fraction(std::size_t element, std::size_t load) const {
    auto it = alpha_.find({element, load});
    return it == alpha_.end() ? 0.0 : it->second;
}

double SplitAllocation::element_total(std::size_t element) const {
    double total = 0.0;
    for (const auto& [key, a] : alpha_)
        if (key.first == element) total += a;
    return total;
}

double series_conductance(const std::vector<double>& g) {
    if (g.empty()) throw PathInactive("empty path");
    double inv = 0.0;
    for (double x : g) {
        if (!(x > 0.0)) throw PathInactive("path inactive at omega");
        inv += 1.0 / x;
    }
    return 1.0 / inv;
}

double path_conductance(const std::vector<double>& g_elements, const LoadPath& path, const SplitAllocation* alloc) {
    std::vector<double> g;
    g.reserve(path.edges.size());
    for (const PathEdge& e : path.edges) {
        const double a = alloc ? alloc->fraction(e.element, path.load) : 1.0;
        g.push_back(a * g_elements.at(e.element));
    }
    return series_conductance(g);
}

double path_conductance(const Network& net, const LoadPath& path, double omega, double phi) {
    return path_conductance(element_conductances(net, omega, phi), path);
}

double path_conductance(const Network& net, const LoadPath& path, double omega, double phi,
                        const SplitAllocation& alloc) {
    return path_conductance(element_conductances(net, omega, phi), path, &alloc);
}

std::vector<LoadPath> structural_paths(const Network& net, std::size_t load, std::size_t max_len) {
    std::vector<LoadPath> out;
    const std::size_t start = net.loads().at(load).bus;
    if (net.is_terminal(start) || max_len == 0) return out;

    const std::size_t nodes = net.buses().size() + 1;
    std::vector<std::vector<PathEdge>> adj(nodes);
    for (std::size_t i = 0; i < net.elements().size(); ++i) {
        const Element& e = net.elements()[i];
        if (e.is_line()) {
            adj[e.line().from].push_back({i, e.line().from, e.line().to});
            adj[e.line().to].push_back({i, e.line().to, e.line().from});
        } else {
            adj[e.cap().bus].push_back({i, e.cap().bus, net.ground_node()});
        }
    }

    std::vector<bool> visited(nodes, false);
    LoadPath current{load, {}};
    std::function<void(std::size_t)> dfs = [&](std::size_t node) {
        visited[node] = true;
        for (const PathEdge& edge : adj[node]) {
            if (visited[edge.to]) continue;
            current.edges.push_back(edge);
            if (net.is_terminal(edge.to))
                out.push_back(current);
            else if (current.edges.size() < max_len)
                dfs(edge.to);
            current.edges.pop_back();
        }
        visited[node] = false;
    };
    dfs(start);
    return out;
}

std::vector<LoadPath> enumerate_paths(const Network& net, std::size_t load, double omega, double phi,
                                      std::size_t max_len) {
    const auto g = element_conductances(net, omega, phi);
    std::vector<std::pair<double, LoadPath>> scored;
    for (LoadPath& p : structural_paths(net, load, max_len)) {
        if (std::any_of(p.edges.begin(), p.edges.end(), [&](const PathEdge& e) { return !(g[e.element] > 0.0); }))
            continue;
        const double gp = path_conductance(g, p);
        scored.emplace_back(gp, std::move(p));
    }
    std::stable_sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second.node_names(net) < b.second.node_names(net);
    });
    std::vector<LoadPath> out;
    for (auto& s : scored) out.push_back(std::move(s.second));
    return out;
}

SplitResult split_allocate(const Network& net, const std::map<std::size_t, LoadPath>& paths, double omega,
                           double phi, const std::map<std::size_t, double>& demands) {
    return split_allocate(element_conductances(net, omega, phi), paths, demands);
}

SplitResult split_allocate(const std::vector<double>& g, const std::map<std::size_t, LoadPath>& paths,
                           const std::map<std::size_t, double>& demands) {
    SplitResult result;
    struct Active {
        std::size_t load;
        const LoadPath* path;
        double demand;
    };
    std::vector<Active> active;
    for (const auto& [load, d] : demands) {
        if (!(d > 0.0)) continue;
        auto it = paths.find(load);
        if (it == paths.end() || it->second.edges.empty()) return result;
        active.push_back({load, &it->second, d});
    }

    // Standalone check: no split can beat using every element whole.
    for (const Active& a : active) {
        std::size_t weakest = a.path->edges.front().element;
        double inv = 0.0;
        for (const PathEdge& e : a.path->edges) {
            if (!(g[e.element] > 0.0)) {
                result.bottleneck = {e.element};
                return result;
            }
            inv += 1.0 / g[e.element];
            if (g[e.element] < g[weakest]) weakest = e.element;
        }
        if (1.0 / inv < a.demand) {
            result.bottleneck = {weakest};
            return result;
        }
    }

    std::map<std::size_t, std::vector<std::size_t>> users;  // element -> positions in `active`
    for (std::size_t i = 0; i < active.size(); ++i)
        for (const PathEdge& e : active[i].path->edges) {
            auto& u = users[e.element];
            if (u.empty() || u.back() != i) u.push_back(i);
        }

    std::vector<double> w(active.size(), 1.0);
    std::vector<double> t(active.size(), 0.0);
    std::vector<double> gpi(active.size(), 0.0);
    std::map<std::size_t, double> weight_sum;
    auto evaluate = [&] {
        for (auto& [e, u] : users) {
            double s = 0.0;
            for (std::size_t i : u) s += w[i];
            weight_sum[e] = s;
        }
        for (std::size_t i = 0; i < active.size(); ++i) {
            double inv = 0.0;
            for (const PathEdge& e : active[i].path->edges) inv += weight_sum[e.element] / (w[i] * g[e.element]);
            gpi[i] = 1.0 / inv;
            t[i] = gpi[i] / active[i].demand;
        }
    };

    bool feasible = false;
    for (int iter = 0; iter < 1000; ++iter) {
        evaluate();
        const double t_min = *std::min_element(t.begin(), t.end());
        if (t_min >= 1.0) {
            feasible = true;
            break;
        }
        const double t_max = *std::max_element(t.begin(), t.end());
        if (t_max <= t_min * (1.0 + 1e-10)) break;
        double log_mean = 0.0;
        for (double x : t) log_mean += std::log(x);
        log_mean /= static_cast<double>(t.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] *= std::sqrt(std::exp(log_mean) / t[i]);
    }

    if (!feasible) {
        const auto worst = static_cast<std::size_t>(std::min_element(t.begin(), t.end()) - t.begin());
        for (const PathEdge& e : active[worst].path->edges)
            if (users[e.element].size() > 1) result.bottleneck.push_back(e.element);
        if (result.bottleneck.empty()) result.bottleneck.push_back(active[worst].path->edges.front().element);
        return result;
    }
    result.feasible = true;
    for (std::size_t i = 0; i < active.size(); ++i) {
        for (const PathEdge& e : active[i].path->edges)
            result.allocation.set(e.element, active[i].load, w[i] / weight_sum[e.element]);
        result.g_pi[active[i].load] = gpi[i];
    }
    return result;
}

DecompositionSearch::DecompositionSearch(const Network& net, SearchLimits limits) : net_(&net), limits_(limits) {
    if (limits_.max_len == 0) limits_.max_len = net.buses().size();
    for (std::size_t k = 0; k < net.loads().size(); ++k) {
        structural_.push_back(structural_paths(net, k, limits_.max_len));
        std::vector<std::string> names;
        for (const LoadPath& p : structural_.back()) {
            std::string joined;
            for (const auto& n : p.node_names(net)) joined += n + '\x1f';
            names.push_back(std::move(joined));
        }
        names_.push_back(std::move(names));
    }
}

double DecompositionSearch::best_single(const std::vector<double>& g, std::size_t load) const {
    double best = 0.0;
    for (const LoadPath& p : structural_[load]) {
        double inv = 0.0;
        bool ok = true;
        for (const PathEdge& e : p.edges) {
            if (!(g[e.element] > 0.0)) {
                ok = false;
                break;
            }
            inv += 1.0 / g[e.element];
        }
        if (ok) best = std::max(best, 1.0 / inv);
    }
    return best;
}

std::optional<PathDecomposition> DecompositionSearch::find(double omega, double phi,
                                                           const std::map<std::size_t, double>& demands) const {
    auto d = find(element_conductances(*net_, omega, phi), demands);
    if (d) d->frequency_range = {omega, omega};
    return d;
}

std::optional<PathDecomposition> DecompositionSearch::find(const std::vector<double>& g,
                                                           const std::map<std::size_t, double>& demands) const {
    std::vector<std::size_t> loads;
    std::vector<std::vector<std::size_t>> lists;  // candidate structural indices per load
    for (const auto& [load, d] : demands) {
        if (!(d > 0.0)) continue;
        std::vector<std::pair<double, std::size_t>> scored;
        const auto& paths = structural_.at(load);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            double inv = 0.0;
            bool ok = true;
            for (const PathEdge& e : paths[i].edges) {
                if (!(g[e.element] > 0.0)) {
                    ok = false;
                    break;
                }
                inv += 1.0 / g[e.element];
            }
            if (ok && 1.0 / inv >= d) scored.emplace_back(1.0 / inv, i);
        }
        if (scored.empty()) return std::nullopt;
        const auto& names = names_[load];
        std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return names[a.second] < names[b.second];
        });
        if (scored.size() > limits_.max_candidates) scored.resize(limits_.max_candidates);
        std::vector<std::size_t> idx;
        for (const auto& s : scored) idx.push_back(s.second);
        loads.push_back(load);
        lists.push_back(std::move(idx));
    }

    PathDecomposition out;
    if (loads.empty()) return out;

    std::size_t max_rank = 0;
    for (const auto& l : lists) max_rank += l.size() - 1;
    std::vector<std::size_t> choice(loads.size(), 0);
    std::size_t tried = 0;
    std::optional<PathDecomposition> found;

    // Visit all tuples with the given rank sum, lexicographically.
    std::function<bool(std::size_t, std::size_t)> visit = [&](std::size_t pos, std::size_t remaining) -> bool {
        if (pos + 1 == loads.size()) {
            if (remaining >= lists[pos].size()) return false;
            choice[pos] = remaining;
            if (++tried > limits_.max_combinations) return true;
            std::map<std::size_t, LoadPath> paths;
            for (std::size_t i = 0; i < loads.size(); ++i) paths[loads[i]] = structural_[loads[i]][lists[i][choice[i]]];
            SplitResult split = split_allocate(g, paths, demands);
            if (split.feasible) {
                found = PathDecomposition{std::move(paths), std::move(split.allocation), std::move(split.g_pi), {}};
                return true;
            }
            return false;
        }
        for (std::size_t r = 0; r <= remaining && r < lists[pos].size(); ++r) {
            choice[pos] = r;
            if (visit(pos + 1, remaining - r)) return true;
        }
        return false;
    };
    for (std::size_t s = 0; s <= max_rank; ++s)
        if (visit(0, s)) break;
    return found;
}

std::optional<PathDecomposition> find_decomposition(const Network& net, double omega, double phi,
                                                    const std::map<std::size_t, double>& demands,
                                                    SearchLimits limits) {
    return DecompositionSearch(net, limits).find(omega, phi, demands);
}

}  // namespace dcstab
