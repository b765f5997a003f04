#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace disco {

/// Real-to-complex FFT of a fixed length backed by FFTW.
///
/// Plans are created once per length under a global lock and executed with
/// the new-array interface, so one instance may be shared between threads.
/// Neither direction is normalized.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// `in` has size() samples, `out` has bins() entries.
  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  /// `in` has bins() entries, `out` has size() samples. Scaled by size().
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  std::size_t n_;
  void* forward_plan_;
  void* inverse_plan_;
};

std::size_t next_pow2(std::size_t n);

/// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

/// xc[l] = sum_n a[n] * b[n + l] for l in [0, max_lag).
std::vector<double> cross_correlate(std::span<const double> a, std::span<const double> b,
                                    std::size_t max_lag);

}  // namespace disco
