#pragma once

#include "dcstab/netmodel.hpp"

#include <random>

namespace dcstab {

/// Buck converter with the reference design values; `scale` parallels identical units.
[[nodiscard]] BuckParams reference_buck(double scale = 1.0);

/// Random small network: 2-5 buses with a source at the first, a random spanning tree of
/// RL lines plus an occasional extra line, shunt capacitors on some internal buses, and one
/// or two CPL or buck loads.
[[nodiscard]] Network random_network(std::mt19937_64& rng);

}  // namespace dcstab
