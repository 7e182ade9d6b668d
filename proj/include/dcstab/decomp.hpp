#pragma once

#include "dcstab/admittance.hpp"
#include "dcstab/augment.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dcstab {

/// One element traversed in a fixed direction. Node indices follow Network: bus indices,
/// plus ground_node() for the far side of a shunt capacitor.
struct PathEdge {
    std::size_t element = 0;
    std::size_t from = 0;
    std::size_t to = 0;
};

struct LoadPath {
    std::size_t load = 0;  // index into Network::loads()
    std::vector<PathEdge> edges;

    [[nodiscard]] std::size_t start() const { return edges.front().from; }
    [[nodiscard]] std::size_t end() const { return edges.back().to; }
    /// Node names along the path, starting at the load bus.
    [[nodiscard]] std::vector<std::string> node_names(const Network& net) const;
    [[nodiscard]] std::string describe(const Network& net) const;
};

class PathInactive : public ModelError {
public:
    using ModelError::ModelError;
};

/// Fraction of each element's admittance handed to each load.
class SplitAllocation {
public:
    void set(std::size_t element, std::size_t load, double alpha) { alpha_[{element, load}] = alpha; }
    /// Zero for pairs that were never assigned.
    [[nodiscard]] double fraction(std::size_t element, std::size_t load) const;
    [[nodiscard]] double element_total(std::size_t element) const;
    [[nodiscard]] const std::map<std::pair<std::size_t, std::size_t>, double>& entries() const { return alpha_; }

private:
    std::map<std::pair<std::size_t, std::size_t>, double> alpha_;
};

/// Series combination 1 / sum(1/g). Throws PathInactive if any g <= 0.
[[nodiscard]] double series_conductance(const std::vector<double>& g);

/// Aggregate conductance of the path with every element used whole.
[[nodiscard]] double path_conductance(const Network& net, const LoadPath& path, double omega, double phi);
/// Aggregate conductance with the allocated fraction of each element.
[[nodiscard]] double path_conductance(const Network& net, const LoadPath& path, double omega, double phi,
                                      const SplitAllocation& alloc);
/// Same, from precomputed per-element conductances (see element_conductances).
[[nodiscard]] double path_conductance(const std::vector<double>& g_elements, const LoadPath& path,
                                      const SplitAllocation* alloc = nullptr);

/// Every vertex-simple path from the load bus to a source bus, ground bus, or (through a shunt
/// capacitor) the reference node, with at most max_len edges. Intermediate nodes are internal.
[[nodiscard]] std::vector<LoadPath> structural_paths(const Network& net, std::size_t load, std::size_t max_len);

/// structural_paths restricted to edges with G_e(omega, phi) > 0, sorted by descending
/// standalone conductance, ties broken by the node-name sequence.
[[nodiscard]] std::vector<LoadPath> enumerate_paths(const Network& net, std::size_t load, double omega, double phi,
                                                    std::size_t max_len);

struct SplitResult {
    bool feasible = false;
    SplitAllocation allocation;
    std::map<std::size_t, double> g_pi;    // per load, with the allocation applied
    std::vector<std::size_t> bottleneck;   // element indices, when infeasible
};

/// Finds fractions meeting every demand, if the fixed paths allow it. The optimum of the
/// max-min problem has alpha(e, k) proportional to a per-load weight, so the weights are
/// rebalanced until the demand ratios are equal within each group of coupled loads.
[[nodiscard]] SplitResult split_allocate(const Network& net, const std::map<std::size_t, LoadPath>& paths,
                                         double omega, double phi, const std::map<std::size_t, double>& demands);
[[nodiscard]] SplitResult split_allocate(const std::vector<double>& g_elements,
                                         const std::map<std::size_t, LoadPath>& paths,
                                         const std::map<std::size_t, double>& demands);

struct PathDecomposition {
    std::map<std::size_t, LoadPath> paths;  // loads with zero demand have no entry
    SplitAllocation allocation;
    std::map<std::size_t, double> g_pi;
    Band frequency_range;
};

struct SearchLimits {
    std::size_t max_len = 0;              // 0 means the number of buses
    std::size_t max_candidates = 64;      // per load
    std::size_t max_combinations = 1024;
};

/// Caches structural paths so repeated searches over a frequency grid stay cheap.
class DecompositionSearch {
public:
    explicit DecompositionSearch(const Network& net, SearchLimits limits = {});

    [[nodiscard]] const std::vector<LoadPath>& candidates(std::size_t load) const { return structural_[load]; }

    /// Tries path combinations in order of increasing rank sum and returns the first one that
    /// split_allocate can satisfy. Loads absent from `demands` or with demand <= 0 need no path.
    [[nodiscard]] std::optional<PathDecomposition> find(double omega, double phi,
                                                        const std::map<std::size_t, double>& demands) const;
    [[nodiscard]] std::optional<PathDecomposition> find(const std::vector<double>& g_elements,
                                                        const std::map<std::size_t, double>& demands) const;

    /// Best standalone path conductance for one load, 0 if none is active.
    [[nodiscard]] double best_single(const std::vector<double>& g_elements, std::size_t load) const;

private:
    const Network* net_;
    SearchLimits limits_;
    std::vector<std::vector<LoadPath>> structural_;
    std::vector<std::vector<std::string>> names_;  // node names per structural path, for tie-breaks
};

[[nodiscard]] std::optional<PathDecomposition> find_decomposition(const Network& net, double omega, double phi,
                                                                  const std::map<std::size_t, double>& demands,
                                                                  SearchLimits limits = {});

}  // namespace dcstab
