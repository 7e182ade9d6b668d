#include "dcstab/augment.hpp"

#include "dcstab/admittance.hpp"

#include <algorithm>
#include <cmath>

namespace dcstab {

double augmented_conductance(Complex y, double phi) {
    return y.real() * std::cos(phi) - y.imag() * std::sin(phi);
}

double inductive_G(double r, double l, double omega, double phi) {
    const double x = omega * l;
    const double den = r * r + x * x;
    if (den == 0.0) throw ModelError("inductive element with r = L = 0");
    return (r * std::cos(phi) + x * std::sin(phi)) / den;
}

double capacitive_G(double r, double c, double omega, double phi) {
    if (omega == 0.0) return 0.0;
    const double wc = omega * c;
    const double wrc = wc * r;
    return wc * (wrc * std::cos(phi) - std::sin(phi)) / (1.0 + wrc * wrc);
}

double shunt_combo_G(double r, double l, double c, double omega, double phi) {
    return inductive_G(r, l, omega, phi) - omega * c * std::sin(phi);
}

double element_G(const Element& e, double omega, double phi) {
    if (e.is_line()) return inductive_G(e.line().r, e.line().l, omega, phi);
    return capacitive_G(e.cap().r_esr, e.cap().c, omega, phi);
}

std::vector<double> element_conductances(const Network& net, double omega, double phi) {
    std::vector<double> g;
    g.reserve(net.elements().size());
    for (const Element& e : net.elements()) g.push_back(element_G(e, omega, phi));
    return g;
}

PhiInterval admissible_phi_interval(const Network& net, double omega) {
    PhiInterval out{-M_PI, M_PI};
    for (const Element& e : net.elements()) {
        const Complex y = eval_element_admittance(e, omega);
        if (y == Complex(0.0, 0.0)) continue;
        const double theta = std::arg(y);
        out.lo = std::max(out.lo, -theta - M_PI / 2.0);
        out.hi = std::min(out.hi, -theta + M_PI / 2.0);
    }
    if (out.lo > out.hi) throw ModelError("no admissible rotation");
    return out;
}

bool PhiSchedule::valid() const {
    return std::all_of(samples.begin(), samples.end(),
                       [](const PhiSample& s) { return s.admissible.contains(s.phi); });
}

}  // namespace dcstab
