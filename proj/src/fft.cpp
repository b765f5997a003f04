#include "disco/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <utility>

#include "disco/error.hpp"

namespace disco {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans live for the whole process; FFTW's planner is not thread-safe.
PlanPair plans_for(std::size_t n) {
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(planner_mutex());
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  std::vector<double> real(n);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  auto* cplx = reinterpret_cast<fftw_complex*>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft_r2c_1d(static_cast<int>(n), real.data(), cplx, flags),
             fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real.data(), flags | FFTW_DESTROY_INPUT)};
  cache.emplace(n, p);
  return p;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw Error(ErrorKind::Size, "FFT length must be positive");
  const auto p = plans_for(n);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != bins()) throw Error(ErrorKind::Size, "FFT buffer size mismatch");
  // r2c does not modify its input, the cast only satisfies the C signature.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != bins() || out.size() != n_) throw Error(ErrorKind::Size, "FFT buffer size mismatch");
  std::vector<std::complex<double>> scratch(in.begin(), in.end());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  const RealFft fft(n);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.forward(pa, fa);
  fft.forward(pb, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.inverse(fa, pa);
  pa.resize(out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : pa) v *= scale;
  return pa;
}

std::vector<double> cross_correlate(std::span<const double> a, std::span<const double> b,
                                    std::size_t max_lag) {
  std::vector<double> out(max_lag, 0.0);
  if (a.empty() || b.empty() || max_lag == 0) return out;
  // xc[l] = sum_n a[n] b[n+l]  ==  (reverse(a) * b)[len(a) - 1 + l]
  const std::size_t n = next_pow2(a.size() + b.size() + max_lag);
  const RealFft fft(n);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::reverse_copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.forward(pa, fa);
  fft.forward(pb, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  fft.inverse(fa, pa);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t l = 0; l < max_lag; ++l) {
    const std::size_t idx = a.size() - 1 + l;
    out[l] = idx < n ? pa[idx] * scale : 0.0;
  }
  return out;
}

}  // namespace disco
