#pragma once

// Independent reference computations shared by the tests. Nothing here calls into the
// library's evaluation code, so agreement with it is meaningful.

#include "dcstab/netmodel.hpp"

#include <complex>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>

namespace testsupport {

using Complex = std::complex<double>;

inline std::filesystem::path data_file(const std::string& name) {
    return std::filesystem::path(DCSTAB_DATA_DIR) / name;
}

/// Buck input admittance by direct complex arithmetic on the block diagram.
inline Complex buck_chained(const dcstab::BuckParams& p, double omega) {
    const Complex s(0.0, omega);
    const double d2 = p.duty * p.duty;
    const double g0 = p.v_in / p.duty;
    const double w0 = 1.0 / std::sqrt(p.l * p.c);
    const double zeta = std::sqrt(p.l / p.c) / (2.0 * p.r);
    const Complex gvd = g0 * w0 * w0 / (s * s + 2.0 * zeta * w0 * s + w0 * w0);
    const Complex gc = p.gc_inf * (1.0 + p.omega_l / s) * (1.0 + s / p.omega_z) / (1.0 + s / p.omega_p);
    const Complex t = gvd * p.h * gc / p.v_m;
    const Complex zn = -p.r / d2;
    const Complex zd = (p.r / d2) * (1.0 + s * p.l / p.r + s * s * p.l * p.c) / (1.0 + s * p.r * p.c);
    return p.scale * ((1.0 / zn) * t / (1.0 + t) + (1.0 / zd) / (1.0 + t));
}

inline Complex buck_zd(const dcstab::BuckParams& p, double omega) {
    const Complex s(0.0, omega);
    const double d2 = p.duty * p.duty;
    return (p.r / d2) * (1.0 + s * p.l / p.r + s * s * p.l * p.c) / (1.0 + s * p.r * p.c);
}

/// Full nodal matrix over all buses plus the reference node, assembled branch by branch,
/// then reduced by deleting terminal rows and columns.
inline Eigen::MatrixXcd brute_nodal(const dcstab::Network& net, double omega) {
    const std::size_t n = net.buses().size() + 1;
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& e : net.elements()) {
        std::size_t a = 0, b = 0;
        Complex y;
        if (e.is_line()) {
            a = e.line().from;
            b = e.line().to;
            y = 1.0 / Complex(e.line().r, omega * e.line().l);
        } else {
            a = e.cap().bus;
            b = n - 1;
            const Complex zc = Complex(e.cap().r_esr, 0.0) + 1.0 / Complex(0.0, omega * e.cap().c);
            y = 1.0 / zc;
        }
        full(a, a) += y;
        full(b, b) += y;
        full(a, b) -= y;
        full(b, a) -= y;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (net.buses()[i].kind == dcstab::BusKind::internal) keep.push_back(i);
    Eigen::MatrixXcd out(keep.size(), keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i)
        for (std::size_t j = 0; j < keep.size(); ++j) out(i, j) = full(keep[i], keep[j]);
    return out;
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(rng));
}

/// Source at `vs`, one line to a bus with shunt C and a CPL of incremental conductance -g.
inline std::string cpl_chain(double r, double l, double c, double g, double vs = 100.0) {
    const double v = vs / (1.0 + r * g);
    const double p = g * v * v;
    std::ostringstream s;
    s.precision(17);
    s << "bus s\nbus a\nsource s v=" << vs << "\nline s a r=" << r << " l=" << l << "\n";
    if (c > 0.0) s << "cap a c=" << c << "\n";
    s << "load cpl a p=" << p << " v=" << v << "\n";
    return s.str();
}

}  // namespace testsupport
