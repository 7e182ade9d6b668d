#pragma once

#include <complex>
#include <vector>

namespace dcstab {

using Complex = std::complex<double>;

/// Real polynomial stored with ascending powers: c[0] + c[1] s + c[2] s^2 + ...
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::vector<double> ascending);
    Polynomial(std::initializer_list<double> ascending);

    static Polynomial constant(double c) { return Polynomial({c}); }
    /// Monic product of (s - r) over the given roots, times `lead`.
    static Polynomial from_roots(const std::vector<Complex>& roots, double lead = 1.0);

    [[nodiscard]] const std::vector<double>& coeffs() const { return c_; }
    /// Degree of the trimmed polynomial; the zero polynomial reports 0.
    [[nodiscard]] int degree() const;
    [[nodiscard]] bool is_zero() const;
    [[nodiscard]] double leading() const;

    [[nodiscard]] Complex operator()(Complex s) const;
    [[nodiscard]] double operator()(double s) const;

    /// Roots from the eigenvalues of the companion matrix.
    [[nodiscard]] std::vector<Complex> roots() const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(double k);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double k) { return a *= k; }
    friend Polynomial operator*(double k, Polynomial a) { return a *= k; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

private:
    void trim();
    std::vector<double> c_{0.0};
};

/// Ratio of two real polynomials in s.
struct RationalTF {
    Polynomial numerator;
    Polynomial denominator{1.0};

    [[nodiscard]] Complex operator()(Complex s) const { return numerator(s) / denominator(s); }
    [[nodiscard]] Complex at_omega(double omega) const { return (*this)(Complex(0.0, omega)); }

    [[nodiscard]] bool is_proper() const { return numerator.degree() <= denominator.degree(); }
    [[nodiscard]] bool is_strictly_proper() const {
        return numerator.is_zero() || numerator.degree() < denominator.degree();
    }

    /// Removes pole/zero pairs that coincide within `rel_tol` (relative to the root magnitude).
    /// Exact factors of s are stripped first; the remaining pairs are matched on computed roots.
    [[nodiscard]] RationalTF cancel_common_roots(double rel_tol = 1e-9) const;
};

}  // namespace dcstab
