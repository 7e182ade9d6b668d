#pragma once

#include "dcstab/netmodel.hpp"

#include <vector>

namespace dcstab {

/// Re[e^{j phi} y].
[[nodiscard]] double augmented_conductance(Complex y, double phi);

/// Closed form for a series r-L element. Throws ModelError when r = L = 0.
[[nodiscard]] double inductive_G(double r, double l, double omega, double phi);
/// Closed form for a series r-C element; zero at omega = 0.
[[nodiscard]] double capacitive_G(double r, double c, double omega, double phi);
/// r-L line in parallel with an ideal shunt capacitor.
[[nodiscard]] double shunt_combo_G(double r, double l, double c, double omega, double phi);

[[nodiscard]] double element_G(const Element& e, double omega, double phi);
/// element_G for every element of the network, in element order.
[[nodiscard]] std::vector<double> element_conductances(const Network& net, double omega, double phi);

struct PhiInterval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double phi) const { return phi >= lo && phi <= hi; }
};

/// Rotations for which every network element has G_e >= 0. Each element contributes the arc
/// [-arg y - pi/2, -arg y + pi/2]; elements with y = 0 impose nothing. Throws ModelError
/// ("no admissible rotation") when the intersection is empty.
[[nodiscard]] PhiInterval admissible_phi_interval(const Network& net, double omega);

struct PhiSample {
    double omega = 0.0;
    double phi = 0.0;
    PhiInterval admissible;
};

/// Frequency-pointwise rotation; nothing is claimed between samples.
struct PhiSchedule {
    std::vector<PhiSample> samples;

    [[nodiscard]] bool valid() const;
};

}  // namespace dcstab
