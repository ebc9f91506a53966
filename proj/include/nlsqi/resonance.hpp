// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Resonance combinatorics for sextic interactions k1-k2+k3-k4+k5-k6 = 0:
// the resonance function Omega, the symmetrized weight psi, constrained tuple
// enumeration, magnitude ordering, and executable checks of the counting,
// psi and space-time (Strichartz) lemmas.

#ifndef NLSQI_RESONANCE_HPP
#define NLSQI_RESONANCE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nlsqi/fft.hpp"
#include "nlsqi/state.hpp"

namespace nlsqi {

struct Tuple6 {
  std::array<int, 6> k{};

  int operator[](std::size_t j) const { return k[j]; }

  /// k1 - k2 + k3 - k4 + k5 - k6
  long long alternating_sum() const {
    long long acc = 0;
    for (std::size_t j = 0; j < 6; ++j) acc += (j % 2 == 0 ? 1 : -1) * static_cast<long long>(k[j]);
    return acc;
  }

  friend bool operator==(const Tuple6&, const Tuple6&) = default;
};

/// Omega(k) = sum_j (-1)^{j-1} k_j^2, exact.
inline long long omega(const Tuple6& t) {
  long long acc = 0;
  for (std::size_t j = 0; j < 6; ++j) {
    const long long kk = static_cast<long long>(t.k[j]) * t.k[j];
    acc += (j % 2 == 0) ? kk : -kk;
  }
  return acc;
}

/// psi(k) = sum_j (-1)^{j-1} m(k_j). For the equivalent norm this is
/// sum_j (-1)^{j-1} |k_j|^{2s}, the constants cancelling.
inline double psi(const Tuple6& t, const WeightFamily& family) {
  if (family.kind == WeightFamily::Kind::EquivalentNorm) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      const double a = t.k[j] == 0 ? 0.0 : std::pow(std::abs(static_cast<double>(t.k[j])), 2.0 * family.s);
      acc += (j % 2 == 0) ? a : -a;
    }
    return acc;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < 6; ++j) {
    const double a = family(t.k[j]);
    acc += (j % 2 == 0) ? a : -a;
  }
  return acc;
}

enum class Resonance { All, NonResonant, Resonant };

/// Visits every tuple with |k_j| <= n_cut and alternating sum zero, in
/// lexicographic order of (k1..k5); k6 is solved from the constraint.
/// [k1_lo, k1_hi] restricts the leading index so callers can split the range.
template <class Visit>
void for_each_constrained(int n_cut, Resonance filter, Visit&& visit, int k1_lo, int k1_hi) {
  k1_lo = std::max(k1_lo, -n_cut);
  k1_hi = std::min(k1_hi, n_cut);
  Tuple6 t;
  for (int a = k1_lo; a <= k1_hi; ++a) {
    t.k[0] = a;
    for (int b = -n_cut; b <= n_cut; ++b) {
      t.k[1] = b;
      for (int c = -n_cut; c <= n_cut; ++c) {
        t.k[2] = c;
        for (int d = -n_cut; d <= n_cut; ++d) {
          t.k[3] = d;
          for (int e = -n_cut; e <= n_cut; ++e) {
            const int f = a - b + c - d + e;
            if (f < -n_cut || f > n_cut) continue;
            t.k[4] = e;
            t.k[5] = f;
            if (filter != Resonance::All) {
              const bool resonant = omega(t) == 0;
              if (resonant != (filter == Resonance::Resonant)) continue;
            }
            visit(t);
          }
        }
      }
    }
  }
}

template <class Visit>
void for_each_constrained(int n_cut, Resonance filter, Visit&& visit) {
  for_each_constrained(n_cut, filter, std::forward<Visit>(visit), -n_cut, n_cut);
}

inline std::vector<Tuple6> enumerate_constrained(int n_cut, Resonance filter) {
  if (n_cut < 0) throw Error("enumerate_constrained: negative cut");
  std::vector<Tuple6> out;
  for_each_constrained(n_cut, filter, [&](const Tuple6& t) { out.push_back(t); });
  return out;
}

inline std::uint64_t count_constrained(int n_cut, Resonance filter) {
  std::uint64_t n = 0;
  for_each_constrained(n_cut, filter, [&](const Tuple6&) { ++n; });
  return n;
}

// --- ordering ---------------------------------------------------------------

struct OrderedMagnitudes {
  std::array<int, 6> perm{};  ///< perm[i] = original (0-based) index of k_(i+1)
  std::array<int, 6> mags{};  ///< |k_(1)| >= ... >= |k_(6)|
};

/// Stable descending sort by |k_j|; ties keep the original index order.
inline OrderedMagnitudes order_desc(const Tuple6& t) {
  OrderedMagnitudes out;
  std::iota(out.perm.begin(), out.perm.end(), 0);
  std::stable_sort(out.perm.begin(), out.perm.end(),
                   [&](int i, int j) { return std::abs(t.k[i]) > std::abs(t.k[j]); });
  for (std::size_t i = 0; i < 6; ++i) out.mags[i] = std::abs(t.k[static_cast<std::size_t>(out.perm[i])]);
  return out;
}

/// k_i and k_j are paired when eps_i k_i + eps_j k_j = 0 under the alternating signs.
inline bool paired(const Tuple6& t, int i, int j) {
  const int ei = (i % 2 == 0) ? 1 : -1;
  const int ej = (j % 2 == 0) ? 1 : -1;
  return ei * t.k[static_cast<std::size_t>(i)] + ej * t.k[static_cast<std::size_t>(j)] == 0;
}

/// True if two of the three largest-magnitude entries are paired.
inline bool has_top3_pairing(const Tuple6& t) {
  const auto ord = order_desc(t);
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (paired(t, ord.perm[static_cast<std::size_t>(a)], ord.perm[static_cast<std::size_t>(b)])) return true;
  return false;
}

// --- counting bound ---------------------------------------------------------

/// Frequencies of the dyadic block N: |k| <= 1 for N = 1, N <= |k| < 2N for N >= 2.
inline std::vector<int> dyadic_block(int big_n) {
  if (big_n < 1 || (big_n & (big_n - 1)) != 0) throw Error("dyadic_block: N must be a power of two");
  std::vector<int> ks;
  if (big_n == 1) return {-1, 0, 1};
  for (int k = -(2 * big_n - 1); k <= -big_n; ++k) ks.push_back(k);
  for (int k = big_n; k <= 2 * big_n - 1; ++k) ks.push_back(k);
  return ks;
}

struct CountingResult {
  std::uint64_t count = 0;
  std::uint64_t bound = 0;  ///< N_(2) * ... * N_(m)
  double ratio = 0.0;
};

namespace detail {

/// Histogram of sum_j eps_j k_j over k_j in the given blocks, offset by `lo`.
struct SignedSumHistogram {
  long long lo = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(long long kappa) const {
    const long long i = kappa - lo;
    return (i < 0 || i >= static_cast<long long>(counts.size())) ? 0 : counts[static_cast<std::size_t>(i)];
  }
};

inline SignedSumHistogram signed_sum_histogram(std::span<const int> blocks, std::span<const int> signs) {
  SignedSumHistogram h{0, {1}};
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const auto ks = dyadic_block(blocks[j]);
    long long kmin = 0, kmax = 0;
    for (int k : ks) {
      kmin = std::min<long long>(kmin, static_cast<long long>(signs[j]) * k);
      kmax = std::max<long long>(kmax, static_cast<long long>(signs[j]) * k);
    }
    SignedSumHistogram next{h.lo + kmin, std::vector<std::uint64_t>(h.counts.size() + static_cast<std::size_t>(kmax - kmin), 0)};
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      if (h.counts[i] == 0) continue;
      for (int k : ks) {
        const long long v = h.lo + static_cast<long long>(i) + static_cast<long long>(signs[j]) * k;
        next.counts[static_cast<std::size_t>(v - next.lo)] += h.counts[i];
      }
    }
    h = std::move(next);
  }
  return h;
}

inline std::uint64_t counting_bound(std::span<const int> blocks) {
  std::vector<int> sorted(blocks.begin(), blocks.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::uint64_t b = 1;
  for (std::size_t j = 1; j < sorted.size(); ++j) b *= static_cast<std::uint64_t>(sorted[j]);
  return b;
}

}  // namespace detail

/// Exact number of solutions of sum_j eps_j k_j = kappa with k_j in block N_j,
/// against the bound N_(2)...N_(m).
inline CountingResult counting_check(std::span<const int> blocks, std::span<const int> signs, long long kappa) {
  const std::size_t m = blocks.size();
  if (m < 2 || m > 6 || signs.size() != m) throw Error("counting_check: need 2..6 blocks with matching signs");
  for (int e : signs)
    if (e != 1 && e != -1) throw Error("counting_check: signs must be +1 or -1");
  const auto hist = detail::signed_sum_histogram(blocks, signs);
  CountingResult r;
  r.count = hist.at(kappa);
  r.bound = detail::counting_bound(blocks);
  r.ratio = static_cast<double>(r.count) / static_cast<double>(r.bound);
  return r;
}

/// Largest count / (N_(2)...N_(m)) over m <= 4, blocks <= 8, |kappa| <= 64:
/// 27, at blocks (8,1,1,1), kappa = -12. The N = 1 block has three
/// frequencies, so each unit block in the bound undercounts by up to 3.
inline constexpr double kCountingRatioPinned = 27.0;

struct CountingSweep {
  double max_ratio = 0.0;
  std::vector<int> argmax_blocks;
  std::vector<int> argmax_signs;
  long long argmax_kappa = 0;
  std::uint64_t cases = 0;
};

/// Sweeps m = 2..max_m, every block choice in {1, 2, 4, ..., max_block}, every
/// sign pattern with eps_1 = +1 (the global flip maps kappa to -kappa) and
/// |kappa| <= max_kappa.
inline CountingSweep counting_sweep(int max_m, int max_block, long long max_kappa) {
  std::vector<int> dyadics;
  for (int b = 1; b <= max_block; b *= 2) dyadics.push_back(b);
  CountingSweep out;
  for (int m = 2; m <= max_m; ++m) {
    std::vector<std::size_t> bi(static_cast<std::size_t>(m), 0);
    const std::size_t n_block_choices = static_cast<std::size_t>(std::pow(dyadics.size(), m));
    for (std::size_t code = 0; code < n_block_choices; ++code) {
      std::vector<int> blocks(static_cast<std::size_t>(m));
      std::size_t c = code;
      for (int j = 0; j < m; ++j) {
        blocks[static_cast<std::size_t>(j)] = dyadics[c % dyadics.size()];
        c /= dyadics.size();
      }
      for (unsigned mask = 0; mask < (1u << (m - 1)); ++mask) {
        std::vector<int> signs(static_cast<std::size_t>(m), 1);
        for (int j = 1; j < m; ++j) signs[static_cast<std::size_t>(j)] = (mask >> (j - 1)) & 1u ? -1 : 1;
        const auto hist = detail::signed_sum_histogram(blocks, signs);
        const double bound = static_cast<double>(detail::counting_bound(blocks));
        for (long long kappa = -max_kappa; kappa <= max_kappa; ++kappa) {
          ++out.cases;
          const double ratio = static_cast<double>(hist.at(kappa)) / bound;
          if (ratio > out.max_ratio) {
            out.max_ratio = ratio;
            out.argmax_blocks = blocks;
            out.argmax_signs = signs;
            out.argmax_kappa = kappa;
          }
        }
      }
    }
  }
  return out;
}

// --- psi estimate -----------------------------------------------------------

/// max over constrained tuples (|k_j| <= n_cut, not all zero) of
/// |psi_{2s}(k)| / (|k_(1)|^{2s-2} (|Omega(k)| + |k_(3)|^2)).
/// Tuples with a vanishing denominator must have psi = 0; otherwise throws.
inline double psi_bound_ratio(int n_cut, double s) {
  if (n_cut < 1) throw Error("psi_bound_ratio: n_cut must be >= 1");
  std::vector<double> pw(static_cast<std::size_t>(n_cut + 1));
  for (int a = 0; a <= n_cut; ++a) pw[static_cast<std::size_t>(a)] = a == 0 ? 0.0 : std::pow(a, 2.0 * s);
  double best = 0.0;
  for_each_constrained(n_cut, Resonance::All, [&](const Tuple6& t) {
    std::array<int, 6> mags;
    double ps = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
      mags[j] = std::abs(t.k[j]);
      ps += (j % 2 == 0 ? 1.0 : -1.0) * pw[static_cast<std::size_t>(mags[j])];
    }
    std::partial_sort(mags.begin(), mags.begin() + 3, mags.end(), std::greater<>());
    if (mags[0] == 0) return;
    const double om = std::abs(static_cast<double>(omega(t)));
    const double den = std::pow(mags[0], 2.0 * s - 2.0) * (om + static_cast<double>(mags[2]) * mags[2]);
    if (den == 0.0) {
      if (ps != 0.0) throw Error("psi_bound_ratio: psi nonzero where the bound vanishes");
      return;
    }
    best = std::max(best, std::abs(ps) / den);
  });
  return best;
}

// --- space-time resonance spectra -------------------------------------------

/// Time-frequency spectrum S(kappa) of a sextic space-time product, stored as
/// the full DFT over the time grid. Every term has |Omega| <= 3n^2, so reads are
/// exact for |kappa| < T - 3n^2.
class ResonanceSpectrum {
 public:
  ResonanceSpectrum() = default;
  ResonanceSpectrum(int n, std::vector<cplx> dft) : n_(n), dft_(std::move(dft)) {}

  int band() const noexcept { return n_; }
  long long max_kappa() const noexcept { return 3LL * n_ * n_; }
  long long time_points() const noexcept { return static_cast<long long>(dft_.size()); }

  cplx at(long long kappa) const {
    const long long t = time_points();
    if (std::abs(kappa) >= t - max_kappa()) throw Error("ResonanceSpectrum: kappa aliases on this time grid");
    return dft_[static_cast<std::size_t>(((kappa % t) + t) % t)];
  }

  /// sum over kappa != 0 of S(kappa)/kappa
  cplx sum_over_nonresonant_inverse() const {
    cplx acc{};
    for (long long kappa = -max_kappa(); kappa <= max_kappa(); ++kappa) {
      if (kappa != 0) acc += at(kappa) / static_cast<double>(kappa);
    }
    return acc;
  }

  ResonanceSpectrum& operator+=(const ResonanceSpectrum& o) {
    for (std::size_t i = 0; i < dft_.size(); ++i) dft_[i] += o.dft_[i];
    return *this;
  }
  ResonanceSpectrum& operator*=(double a) {
    for (cplx& v : dft_) v *= a;
    return *this;
  }

 private:
  int n_ = 0;
  std::vector<cplx> dft_;
};

/// For each pattern p (indices into `arrays`, one per slot), computes
///   S_p(kappa) = sum_{k1-k2+...-k6 = 0, Omega(k) = kappa}
///                a_{p1}(k1) conj(a_{p2}(k2)) a_{p3}(k3) conj(a_{p4}(k4)) a_{p5}(k5) conj(a_{p6}(k6))
/// as the space-time average of F_{p1} conj(F_{p2}) ... with
/// F_a(t, x) = sum_k a(k) e^{i(kx + k^2 t)}. Each array holds 2n+1 centred
/// coefficients. Exact up to rounding: the space grid has >= 6n+2 points and the
/// time grid > 6n^2 points (or `min_time_points`, whichever is larger).
inline std::vector<ResonanceSpectrum> resonance_spectra(std::span<const std::vector<cplx>> arrays, int n,
                                                        std::span<const std::array<int, 6>> patterns,
                                                        int min_time_points = 0) {
  for (const auto& a : arrays)
    if (a.size() != static_cast<std::size_t>(2 * n + 1)) throw Error("resonance_spectra: array size mismatch");
  int g = 2;
  while (g < GridSpec::min_points(5, n)) g *= 2;
  int t_pts = 2;
  const long long need_t = std::max<long long>(6LL * n * n + 1, min_time_points);
  while (t_pts < need_t) t_pts *= 2;

  const auto& xplan = fft::plan(g);
  const auto& tplan = fft::plan(t_pts);
  std::vector<cplx> roots(static_cast<std::size_t>(t_pts));
  for (int j = 0; j < t_pts; ++j) {
    const double ang = 2.0 * std::numbers::pi * j / t_pts;
    roots[static_cast<std::size_t>(j)] = {std::cos(ang), std::sin(ang)};
  }

  const std::size_t n_arr = arrays.size();
  std::vector<std::vector<cplx>> fields(n_arr, std::vector<cplx>(static_cast<std::size_t>(g)));
  std::vector<cplx> twisted(static_cast<std::size_t>(2 * n + 1));
  std::vector<cplx> scratch(static_cast<std::size_t>(g));
  std::vector<std::vector<cplx>> series(patterns.size(), std::vector<cplx>(static_cast<std::size_t>(t_pts)));

  for (int m = 0; m < t_pts; ++m) {
    for (std::size_t a = 0; a < n_arr; ++a) {
      for (int k = -n; k <= n; ++k) {
        const long long phase = (static_cast<long long>(k) * k % t_pts) * m % t_pts;
        twisted[static_cast<std::size_t>(k + n)] = arrays[a][static_cast<std::size_t>(k + n)] * roots[static_cast<std::size_t>(phase)];
      }
      fft::synthesize(xplan, twisted, scratch.data(), fields[a].data());
    }
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      const auto& pat = patterns[p];
      cplx acc{};
      for (int x = 0; x < g; ++x) {
        const auto ux = static_cast<std::size_t>(x);
        cplx prod = fields[static_cast<std::size_t>(pat[0])][ux];
        prod *= std::conj(fields[static_cast<std::size_t>(pat[1])][ux]);
        prod *= fields[static_cast<std::size_t>(pat[2])][ux];
        prod *= std::conj(fields[static_cast<std::size_t>(pat[3])][ux]);
        prod *= fields[static_cast<std::size_t>(pat[4])][ux];
        prod *= std::conj(fields[static_cast<std::size_t>(pat[5])][ux]);
        acc += prod;
      }
      series[p][static_cast<std::size_t>(m)] = acc / static_cast<double>(g);
    }
  }

  std::vector<ResonanceSpectrum> out;
  out.reserve(patterns.size());
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    std::vector<cplx> spec(static_cast<std::size_t>(t_pts));
    tplan.forward(series[p].data(), spec.data());
    for (cplx& v : spec) v /= static_cast<double>(t_pts);
    out.emplace_back(n, std::move(spec));
  }
  return out;
}

/// Psi-weighted spectrum sum_{Omega = kappa} psi(k) a_{b1}(k1) conj(a_{b2}(k2)) ...,
/// where `base` names the array per slot and `weighted[i]` is the array holding
/// m(k) * arrays[i].
inline ResonanceSpectrum psi_weighted_spectrum(std::span<const std::vector<cplx>> arrays, int n,
                                               const std::array<int, 6>& base,
                                               std::span<const int> weighted) {
  // Odd slots (1,3,5) commute in the pointwise product, as do even slots, so
  // patterns are deduplicated up to reordering within each parity class.
  std::map<std::array<int, 6>, std::size_t> index;
  std::vector<std::array<int, 6>> patterns;
  std::array<std::size_t, 6> slot_pattern{};
  for (std::size_t j = 0; j < 6; ++j) {
    std::array<int, 6> p = base;
    p[j] = weighted[static_cast<std::size_t>(base[j])];
    std::array<int, 6> key = p;
    std::array<int, 3> odd{key[0], key[2], key[4]}, even{key[1], key[3], key[5]};
    std::sort(odd.begin(), odd.end());
    std::sort(even.begin(), even.end());
    key = {odd[0], even[0], odd[1], even[1], odd[2], even[2]};
    auto [it, inserted] = index.try_emplace(key, patterns.size());
    if (inserted) patterns.push_back(key);
    slot_pattern[j] = it->second;
  }
  const auto spectra = resonance_spectra(arrays, n, patterns);
  ResonanceSpectrum total = spectra[slot_pattern[0]];
  for (std::size_t j = 1; j < 6; ++j) {
    ResonanceSpectrum term = spectra[slot_pattern[j]];
    if (j % 2 == 1) term *= -1.0;
    total += term;
  }
  return total;
}

// --- Strichartz sum-as-integral ---------------------------------------------

struct StrichartzResult {
  double brute = 0.0;       ///< direct sum over the constrained set
  double quadrature = 0.0;  ///< space-time quadrature of |f| fields
};

/// sum_{k1-...-k6 = 0, Omega = kappa} prod_j |f^(j)_{k_j}| computed two ways.
/// Each f^(j) holds 2n+1 centred coefficients.
inline StrichartzResult strichartz_sum(int n_cut, long long kappa, std::span<const std::vector<cplx>> f) {
  if (f.size() != 6) throw Error("strichartz_sum: need six coefficient arrays");
  std::vector<std::vector<cplx>> mod(6);
  for (std::size_t j = 0; j < 6; ++j) {
    if (f[j].size() != static_cast<std::size_t>(2 * n_cut + 1)) throw Error("strichartz_sum: array size mismatch");
    mod[j].resize(f[j].size());
    for (std::size_t i = 0; i < f[j].size(); ++i) mod[j][i] = std::abs(f[j][i]);
  }
  StrichartzResult r;
  for_each_constrained(n_cut, Resonance::All, [&](const Tuple6& t) {
    if (omega(t) != kappa) return;
    double p = 1.0;
    for (std::size_t j = 0; j < 6; ++j) p *= mod[j][static_cast<std::size_t>(t.k[j] + n_cut)].real();
    r.brute += p;
  });

  const long long nn = static_cast<long long>(n_cut) * n_cut;
  const long long t_need = std::max<long long>(12 * nn + 2, std::abs(kappa) + 3 * nn + 1);
  const std::array<int, 6> pat{0, 1, 2, 3, 4, 5};
  const auto spectra = resonance_spectra(mod, n_cut, std::span(&pat, 1), static_cast<int>(t_need));
  r.quadrature = spectra[0].at(kappa).real();
  return r;
}

}  // namespace nlsqi

#endif  // NLSQI_RESONANCE_HPP
