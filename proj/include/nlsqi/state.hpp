// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Core value types: Fourier states on the 2*pi torus, Sobolev weight families and
// collocation grid sizes.

#ifndef NLSQI_STATE_HPP
#define NLSQI_STATE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nlsqi/errors.hpp"

namespace nlsqi {

using cplx = std::complex<double>;

/// Coefficients u_k, k = -M..M, of u(x) = sum_k u_k e^{ikx} on [0, 2*pi).
class FourierState {
 public:
  FourierState() : FourierState(0) {}

  explicit FourierState(int m_ambient)
      : m_(check_ambient(m_ambient)), coeffs_(static_cast<std::size_t>(2 * m_ + 1)) {}

  FourierState(int m_ambient, std::vector<cplx> coeffs)
      : m_(check_ambient(m_ambient)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != static_cast<std::size_t>(2 * m_ + 1)) {
      throw Error("FourierState: expected " + std::to_string(2 * m_ + 1) +
                  " coefficients, got " + std::to_string(coeffs_.size()));
    }
    require_finite("FourierState");
  }

  /// Single mode c e^{ikx}.
  static FourierState mode(int m_ambient, int k, cplx c) {
    FourierState u(m_ambient);
    u[k] = c;
    return u;
  }

  int m_ambient() const noexcept { return m_; }
  std::size_t size() const noexcept { return coeffs_.size(); }

  cplx& operator[](int k) { return coeffs_[static_cast<std::size_t>(k + m_)]; }
  const cplx& operator[](int k) const { return coeffs_[static_cast<std::size_t>(k + m_)]; }

  /// u_k, or zero when |k| > M.
  cplx coeff(int k) const noexcept {
    return std::abs(k) > m_ ? cplx{} : coeffs_[static_cast<std::size_t>(k + m_)];
  }

  std::span<cplx> coeffs() noexcept { return coeffs_; }
  std::span<const cplx> coeffs() const noexcept { return coeffs_; }

  bool all_finite() const noexcept {
    for (const cplx& c : coeffs_) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    }
    return true;
  }

  void require_finite(const std::string& where) const {
    if (!all_finite()) throw NonFiniteState(where + ": non-finite Fourier coefficient");
  }

  /// Same coefficients embedded in (or cut down to) ambient size m.
  FourierState resized(int m) const {
    FourierState out(m);
    const int lim = std::min(m, m_);
    for (int k = -lim; k <= lim; ++k) out[k] = (*this)[k];
    return out;
  }

  FourierState& operator+=(const FourierState& o) {
    for (int k = -std::min(m_, o.m_); k <= std::min(m_, o.m_); ++k) (*this)[k] += o[k];
    return *this;
  }
  FourierState& operator-=(const FourierState& o) {
    for (int k = -std::min(m_, o.m_); k <= std::min(m_, o.m_); ++k) (*this)[k] -= o[k];
    return *this;
  }
  FourierState& operator*=(cplx a) {
    for (cplx& c : coeffs_) c *= a;
    return *this;
  }

  friend FourierState operator+(FourierState a, const FourierState& b) { return a += b; }
  friend FourierState operator-(FourierState a, const FourierState& b) { return a -= b; }
  friend FourierState operator*(cplx a, FourierState b) { return b *= a; }

  friend bool operator==(const FourierState& a, const FourierState& b) {
    return a.m_ == b.m_ && a.coeffs_ == b.coeffs_;
  }

 private:
  static int check_ambient(int m) {
    if (m < 0) throw Error("FourierState: negative ambient truncation");
    return m;
  }

  int m_;
  std::vector<cplx> coeffs_;
};

/// Fourier multiplier m(k) behind both the Gaussian covariance and the H^s form.
struct WeightFamily {
  enum class Kind { JapaneseBracket, EquivalentNorm };

  Kind kind = Kind::JapaneseBracket;
  double s = 2.0;

  static WeightFamily japanese(double s) { return {Kind::JapaneseBracket, s}; }
  static WeightFamily equivalent(double s) { return {Kind::EquivalentNorm, s}; }

  /// (1+k^2)^s or 1+|k|^{2s}.
  double operator()(long long k) const noexcept {
    const double kd = static_cast<double>(k);
    if (kind == Kind::JapaneseBracket) return std::pow(1.0 + kd * kd, s);
    return k == 0 ? 1.0 : 1.0 + std::pow(std::abs(kd), 2.0 * s);
  }

  WeightFamily with_exponent(double sigma) const noexcept { return {kind, sigma}; }

  std::string name() const {
    return kind == Kind::JapaneseBracket ? "japanese" : "equivalent";
  }

  friend bool operator==(const WeightFamily&, const WeightFamily&) = default;
};

inline WeightFamily::Kind parse_weight_kind(const std::string& name) {
  if (name == "japanese" || name == "JapaneseBracket") return WeightFamily::Kind::JapaneseBracket;
  if (name == "equivalent" || name == "EquivalentNorm") return WeightFamily::Kind::EquivalentNorm;
  throw Error("unknown weight family '" + name + "'");
}

/// Size of the collocation grid x_j = 2*pi*j/G used for pointwise products.
struct GridSpec {
  int n_points = 8;

  /// Smallest G that resolves a product of `degree` factors of bandwidth n
  /// without aliasing into |k| <= n.
  static constexpr int min_points(int degree, int n) noexcept { return (degree + 1) * n + 2; }

  /// Default grid for quintic products at truncation n: a power of two >= 8n,
  /// never below 6n+2.
  static GridSpec for_quintic(int n) {
    const int need = std::max(8 * n, min_points(5, n));
    int g = 2;
    while (g < need) g *= 2;
    return {g};
  }

  void require_quintic(int n) const {
    if (n_points < min_points(5, n)) throw GridTooSmall(n_points, min_points(5, n));
  }
};

}  // namespace nlsqi

#endif  // NLSQI_STATE_HPP
