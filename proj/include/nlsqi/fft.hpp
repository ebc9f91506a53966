// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Thin FFTW wrapper: cached plans per size and band-limited synthesis/analysis
// between centred coefficient arrays (k = -n..n) and collocation grids.

#ifndef NLSQI_FFT_HPP
#define NLSQI_FFT_HPP

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "nlsqi/state.hpp"

namespace nlsqi::fft {

/// Unnormalized complex DFT pair of one size. Plans are created with
/// FFTW_UNALIGNED so they can be executed on any buffer from any thread.
class Plan {
 public:
  explicit Plan(int n) : n_(n) {
    std::vector<cplx> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
    backward_ = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  int size() const noexcept { return n_; }

  /// out_k = sum_j in_j e^{-2 pi i jk/n}
  void forward(const cplx* in, cplx* out) const {
    fftw_execute_dft(forward_, const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }
  /// out_j = sum_k in_k e^{+2 pi i jk/n}
  void backward(const cplx* in, cplx* out) const {
    fftw_execute_dft(backward_, const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
  }

 private:
  int n_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

/// Process-wide plan cache. Planning is serialized; execution is lock-free.
inline const Plan& plan(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Plan>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Plan>(n);
  return *slot;
}

/// Grid values f(x_j) = sum_{|k|<=n} c_k e^{i k x_j} from centred coefficients
/// c[0..2n] (c[k+n] = c_k). `scratch` and `out` must hold G entries.
inline void synthesize(const Plan& p, std::span<const cplx> centred, cplx* scratch, cplx* out) {
  const int g = p.size();
  const int n = static_cast<int>(centred.size() / 2);
  std::fill(scratch, scratch + g, cplx{});
  for (int k = -n; k <= n; ++k) {
    scratch[(k % g + g) % g] += centred[static_cast<std::size_t>(k + n)];
  }
  p.backward(scratch, out);
}

/// Centred coefficients c_k = (1/G) sum_j f(x_j) e^{-ikx_j}, |k| <= n, written to
/// out[0..2n]. Requires G > 2n.
inline void analyze(const Plan& p, const cplx* grid, cplx* scratch, std::span<cplx> out) {
  const int g = p.size();
  const int n = static_cast<int>(out.size() / 2);
  p.forward(grid, scratch);
  const double inv = 1.0 / g;
  for (int k = -n; k <= n; ++k) {
    out[static_cast<std::size_t>(k + n)] = scratch[(k % g + g) % g] * inv;
  }
}

}  // namespace nlsqi::fft

#endif  // NLSQI_FFT_HPP
