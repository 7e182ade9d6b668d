#include "dcstab/rational.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcstab {

Polynomial::Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) {
    if (c_.empty()) c_.push_back(0.0);
    trim();
}

Polynomial::Polynomial(std::initializer_list<double> ascending)
    : Polynomial(std::vector<double>(ascending)) {}

void Polynomial::trim() {
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::from_roots(const std::vector<Complex>& roots, double lead) {
    std::vector<Complex> acc{Complex(lead, 0.0)};
    for (const Complex& r : roots) {
        std::vector<Complex> next(acc.size() + 1, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < acc.size(); ++i) {
            next[i + 1] += acc[i];
            next[i] -= r * acc[i];
        }
        acc = std::move(next);
    }
    // Roots come in conjugate pairs, so the imaginary parts are rounding noise.
    std::vector<double> real(acc.size());
    std::transform(acc.begin(), acc.end(), real.begin(), [](Complex z) { return z.real(); });
    return Polynomial(std::move(real));
}

int Polynomial::degree() const { return static_cast<int>(c_.size()) - 1; }

bool Polynomial::is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }

double Polynomial::leading() const { return c_.back(); }

Complex Polynomial::operator()(Complex s) const {
    Complex acc(0.0, 0.0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double Polynomial::operator()(double s) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

std::vector<Complex> Polynomial::roots() const {
    const int n = degree();
    if (n < 1) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -c_[static_cast<std::size_t>(i)] / leading();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(solver.eigenvalues()(i));
    return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (rhs.c_.size() > c_.size()) c_.resize(rhs.c_.size(), 0.0);
    for (std::size_t i = 0; i < rhs.c_.size(); ++i) c_[i] += rhs.c_[i];
    trim();
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
    if (rhs.c_.size() > c_.size()) c_.resize(rhs.c_.size(), 0.0);
    for (std::size_t i = 0; i < rhs.c_.size(); ++i) c_[i] -= rhs.c_[i];
    trim();
    return *this;
}

Polynomial& Polynomial::operator*=(double k) {
    for (double& x : c_) x *= k;
    trim();
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(out));
}

namespace {

// Number of exact trailing factors of s (leading zeros in ascending storage).
std::size_t zero_root_multiplicity(const Polynomial& p) {
    if (p.is_zero()) return 0;
    std::size_t k = 0;
    while (k < p.coeffs().size() && p.coeffs()[k] == 0.0) ++k;
    return k;
}

Polynomial drop_low(const Polynomial& p, std::size_t k) {
    return Polynomial(std::vector<double>(p.coeffs().begin() + static_cast<std::ptrdiff_t>(k),
                                          p.coeffs().end()));
}

}  // namespace

RationalTF RationalTF::cancel_common_roots(double rel_tol) const {
    if (numerator.is_zero()) return {Polynomial{0.0}, Polynomial{1.0}};

    const std::size_t zn = zero_root_multiplicity(numerator);
    const std::size_t zd = zero_root_multiplicity(denominator);
    const std::size_t common_zero = std::min(zn, zd);
    Polynomial num = drop_low(numerator, common_zero);
    Polynomial den = drop_low(denominator, common_zero);

    std::vector<Complex> zeros = num.roots();
    std::vector<Complex> poles = den.roots();
    std::vector<bool> zero_used(zeros.size(), false);
    std::vector<bool> pole_used(poles.size(), false);
    bool cancelled = false;
    for (std::size_t i = 0; i < zeros.size(); ++i) {
        std::size_t best = poles.size();
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < poles.size(); ++j) {
            if (pole_used[j]) continue;
            const double d = std::abs(zeros[i] - poles[j]);
            if (d < best_dist) {
                best_dist = d;
                best = j;
            }
        }
        if (best == poles.size()) continue;
        const double scale = std::max(std::abs(zeros[i]), std::abs(poles[best]));
        if (best_dist <= rel_tol * scale) {
            zero_used[i] = true;
            pole_used[best] = true;
            cancelled = true;
        }
    }
    if (!cancelled) return {num, den};

    std::vector<Complex> kept_zeros, kept_poles;
    for (std::size_t i = 0; i < zeros.size(); ++i)
        if (!zero_used[i]) kept_zeros.push_back(zeros[i]);
    for (std::size_t j = 0; j < poles.size(); ++j)
        if (!pole_used[j]) kept_poles.push_back(poles[j]);
    return {Polynomial::from_roots(kept_zeros, num.leading()),
            Polynomial::from_roots(kept_poles, den.leading())};
}

}  // namespace dcstab
