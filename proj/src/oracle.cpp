#include "dcstab/oracle.hpp"

#include "dcstab/admittance.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcstab {

RationalTF load_rational_realization(const LoadModel& load) {
    if (const auto* cpl = std::get_if<CplLoad>(&load)) return {Polynomial{cpl->conductance()}, Polynomial{1.0}};
    if (const auto* buck = std::get_if<BuckLoad>(&load)) return buck->admittance_tf();
    throw ModelError("oracle requires rational model");
}

namespace {

constexpr double kParasiticCap = 1e-9;

struct Builder {
    std::vector<double> e_diag;
    std::vector<std::tuple<std::size_t, std::size_t, double>> a_entries;
    std::vector<std::string> labels;

    std::size_t add_state(double e, std::string label) {
        e_diag.push_back(e);
        labels.push_back(std::move(label));
        return e_diag.size() - 1;
    }
    void add(std::size_t row, std::size_t col, double v) {
        if (v != 0.0) a_entries.emplace_back(row, col, v);
    }
};

}  // namespace

DescriptorSystem build_state_space(const Network& net, const OperatingPoint& op) {
    DescriptorSystem sys;
    Builder b;
    const auto& buses = net.buses();

    std::vector<double> cap_at(buses.size(), 0.0);
    for (const Element& e : net.elements())
        if (!e.is_line() && e.cap().r_esr == 0.0) cap_at[e.cap().bus] += e.cap().c;

    std::vector<std::optional<std::size_t>> v_state(buses.size());
    for (std::size_t bus : net.internal_buses()) {
        double c = cap_at[bus];
        if (c == 0.0) {
            c = kParasiticCap;
            sys.warnings.push_back("bus '" + buses[bus].name + "': inserted 1 nF parasitic capacitor");
        }
        v_state[bus] = b.add_state(c, "v_" + buses[bus].name);
    }

    for (const Element& e : net.elements()) {
        if (e.is_line()) {
            const Line& l = e.line();
            const std::size_t i = b.add_state(l.l, "i_" + e.id);
            b.add(i, i, -l.r);
            if (v_state[l.from]) {
                b.add(i, *v_state[l.from], 1.0);
                b.add(*v_state[l.from], i, -1.0);
            }
            if (v_state[l.to]) {
                b.add(i, *v_state[l.to], -1.0);
                b.add(*v_state[l.to], i, 1.0);
            }
        } else if (e.cap().r_esr > 0.0 && v_state[e.cap().bus]) {
            // Internal capacitor voltage vc, branch current (v - vc)/r.
            const ShuntCap& c = e.cap();
            const std::size_t vb = *v_state[c.bus];
            const std::size_t vc = b.add_state(c.c, "vc_" + e.id);
            const double g = 1.0 / c.r_esr;
            b.add(vc, vc, -g);
            b.add(vc, vb, g);
            b.add(vb, vb, -g);
            b.add(vb, vc, g);
        }
    }

    for (std::size_t k = 0; k < net.loads().size(); ++k) {
        const Load& load = net.loads()[k];
        if (!v_state[load.bus]) continue;  // held by a source or ground
        if (const auto* cpl = std::get_if<CplLoad>(&load.model)) {
            const double v_op = op.voltages.at(load.bus);
            if (std::abs(v_op - cpl->voltage) > 0.01 * cpl->voltage)
                sys.warnings.push_back("load '" + load.id + "': declared voltage differs from the operating point");
        }
        const RationalTF y = load_rational_realization(load.model);
        if (!y.is_proper()) throw ModelError("load '" + load.id + "': improper admittance");
        const std::size_t vb = *v_state[load.bus];
        const auto& den = y.denominator.coeffs();
        const int n = y.denominator.degree();
        const double lead = den[static_cast<std::size_t>(n)];
        std::vector<double> a(den.begin(), den.end());
        for (double& x : a) x /= lead;
        std::vector<double> num(static_cast<std::size_t>(n) + 1, 0.0);
        const auto& nc = y.numerator.coeffs();
        for (std::size_t i = 0; i < nc.size() && i <= static_cast<std::size_t>(n); ++i) num[i] = nc[i] / lead;
        const double d = num[static_cast<std::size_t>(n)];
        b.add(vb, vb, -d);
        if (n == 0) continue;

        // Frequency scale so the companion entries are all of order omega_s.
        double omega_s = 0.0;
        for (int j = 0; j < n; ++j)
            omega_s = std::max(omega_s, std::pow(std::abs(a[static_cast<std::size_t>(j)]), 1.0 / (n - j)));
        if (!(omega_s > 0.0)) omega_s = 1.0;

        std::vector<std::size_t> x;
        for (int j = 0; j < n; ++j) x.push_back(b.add_state(1.0, "x" + std::to_string(j + 1) + "_" + load.id));
        for (int j = 0; j + 1 < n; ++j) b.add(x[static_cast<std::size_t>(j)], x[static_cast<std::size_t>(j) + 1], omega_s);
        for (int j = 0; j < n; ++j)
            b.add(x.back(), x[static_cast<std::size_t>(j)], -a[static_cast<std::size_t>(j)] * std::pow(omega_s, j - n + 1));
        // i_load = sum (num_j - d a_j) s^j / den applied to v; leaves the bus. The input and
        // output gains are balanced so neither is tiny or huge.
        std::vector<double> out(static_cast<std::size_t>(n));
        double out_max = 0.0;
        for (int j = 0; j < n; ++j) {
            const auto jj = static_cast<std::size_t>(j);
            out[jj] = (num[jj] - d * a[jj]) * std::pow(omega_s, j);
            out_max = std::max(out_max, std::abs(out[jj]));
        }
        const double in = std::pow(omega_s, 1 - n);
        const double gain = out_max > 0.0 ? std::sqrt(out_max / in) : 1.0;
        b.add(x.back(), vb, in * gain);
        for (int j = 0; j < n; ++j) b.add(vb, x[static_cast<std::size_t>(j)], -out[static_cast<std::size_t>(j)] / gain);
    }

    const auto dim = static_cast<Eigen::Index>(b.e_diag.size());
    sys.e = Eigen::MatrixXd::Zero(dim, dim);
    sys.a = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) sys.e(i, i) = b.e_diag[static_cast<std::size_t>(i)];
    for (const auto& [r, c, v] : b.a_entries) sys.a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += v;
    sys.labels = std::move(b.labels);
    return sys;
}

EigenVerdict eigen_verdict(const DescriptorSystem& sys) {
    EigenVerdict out;
    const Eigen::Index n = sys.a.rows();
    if (n == 0) {
        out.stable = true;
        out.margin = std::numeric_limits<double>::infinity();
        return out;
    }
    // A regular pencil has det(A - sE) != 0 for generic s.
    bool regular = false;
    for (const Complex s : {Complex(0.731, 1.913), Complex(-37.1, 523.9), Complex(1.7e4, -2.9e4)}) {
        Eigen::MatrixXcd m = sys.a.cast<Complex>() - s * sys.e.cast<Complex>();
        // Equilibrate rows then columns so that unit choices do not masquerade as rank loss.
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double r = m.row(i).cwiseAbs().maxCoeff();
                if (r > 0.0) m.row(i) /= r;
                const double c = m.col(i).cwiseAbs().maxCoeff();
                if (c > 0.0) m.col(i) /= c;
            }
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        const auto& sv = svd.singularValues();
        if (sv(n - 1) > 1e-12 * sv(0)) {
            regular = true;
            break;
        }
    }
    if (!regular) throw ModelError("ill-posed model");

    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(sys.a, sys.e, false);
    if (ges.info() != Eigen::Success) throw ModelError("generalized eigenvalue solver failed");
    const auto alphas = ges.alphas();
    const auto betas = ges.betas();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (betas(i) == 0.0) continue;
        const Complex lambda = alphas(i) / betas(i);
        if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()) || std::abs(lambda) > 1e12) continue;
        out.eigenvalues.push_back(lambda);
    }
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    if (out.eigenvalues.empty()) {
        out.stable = true;
        out.margin = std::numeric_limits<double>::infinity();
        return out;
    }
    // Each mode is judged against its own magnitude, so stiff parasitic modes do not widen
    // the tolerance for slow ones.
    out.stable = true;
    out.margin = std::numeric_limits<double>::infinity();
    for (Complex l : out.eigenvalues) {
        out.margin = std::min(out.margin, -l.real());
        if (l.real() >= -1e-9 * std::max(std::abs(l), 1.0)) out.stable = false;
    }
    return out;
}

namespace {

struct ScanPoint {
    double sigma = std::numeric_limits<double>::infinity();
    double det = std::numeric_limits<double>::infinity();
};

ScanPoint scan_point(const Network& net, double lambda, double omega) {
    const Eigen::MatrixXcd yn = nodal_admittance(net, omega, false);
    const Eigen::MatrixXcd yl = load_admittance_matrix(net, omega);
    if (yn.rows() == 0) return {};
    const Eigen::MatrixXcd m = yn + lambda * yl;
    const double scale = yn.norm() + yl.norm();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    ScanPoint p;
    p.sigma = scale > 0.0 ? svd.singularValues()(m.rows() - 1) / scale : 0.0;
    p.det = std::abs(m.determinant());
    return p;
}

}  // namespace

ZeroExclusion zero_exclusion_scan(const Network& net, const std::vector<double>& lambda_grid,
                                  const std::vector<double>& omega_grid, double tolerance) {
    if (lambda_grid.empty() || omega_grid.empty()) throw ModelError("zero exclusion scan needs nonempty grids");
    ZeroExclusion out;
    out.min_abs_det = std::numeric_limits<double>::infinity();
    out.min_relative_sigma = std::numeric_limits<double>::infinity();
    for (double lambda : lambda_grid) {
        for (double omega : omega_grid) {
            const ScanPoint p = scan_point(net, lambda, omega);
            out.min_abs_det = std::min(out.min_abs_det, p.det);
            if (p.sigma < out.min_relative_sigma) {
                out.min_relative_sigma = p.sigma;
                out.at_lambda = lambda;
                out.at_omega = omega;
            }
        }
    }

    // Pattern search in (lambda, log omega) from the worst grid point.
    if (out.at_omega > 0.0 && std::isfinite(out.min_relative_sigma)) {
        const auto [lmin, lmax] = std::minmax_element(lambda_grid.begin(), lambda_grid.end());
        const auto [wmin, wmax] = std::minmax_element(omega_grid.begin(), omega_grid.end());
        double step_l = lambda_grid.size() > 1 ? (*lmax - *lmin) / static_cast<double>(lambda_grid.size() - 1) : 0.0;
        double step_w = omega_grid.size() > 1 ? std::log(*wmax / *wmin) / static_cast<double>(omega_grid.size() - 1) : 0.0;
        double lambda = out.at_lambda;
        double logw = std::log(out.at_omega);
        for (int iter = 0; iter < 200 && (step_l > 1e-12 || step_w > 1e-12); ++iter) {
            bool moved = false;
            const double cand[4][2] = {{step_l, 0}, {-step_l, 0}, {0, step_w}, {0, -step_w}};
            for (const auto& c : cand) {
                const double l2 = std::clamp(lambda + c[0], *lmin, *lmax);
                const double w2 = std::clamp(logw + c[1], std::log(*wmin), std::log(*wmax));
                if (l2 == lambda && w2 == logw) continue;
                const ScanPoint p = scan_point(net, l2, std::exp(w2));
                out.min_abs_det = std::min(out.min_abs_det, p.det);
                if (p.sigma < out.min_relative_sigma) {
                    out.min_relative_sigma = p.sigma;
                    lambda = l2;
                    logw = w2;
                    moved = true;
                }
            }
            if (!moved) {
                step_l *= 0.5;
                step_w *= 0.5;
            }
        }
        out.at_lambda = lambda;
        out.at_omega = std::exp(logw);
    }
    out.excluded = out.min_relative_sigma > tolerance;
    return out;
}

}  // namespace dcstab
