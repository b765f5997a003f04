#pragma once

#include <Eigen/Core>
#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "disco/random.hpp"
#include "disco/stft.hpp"
#include "disco/types.hpp"

namespace test {

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("disco_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> white(disco::Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> x(n);
  for (double& v : x) v = scale * rng.normal();
  return x;
}

inline disco::TimeSignal white_signal(disco::Rng& rng, std::size_t n, double scale = 1.0) {
  return {white(rng, n, scale), disco::kSampleRate};
}

inline Eigen::MatrixXcd random_matrix(disco::Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = {rng.normal(), rng.normal()};
  return m;
}

// Hermitian positive definite with a controlled spread of eigenvalues.
inline Eigen::MatrixXcd random_hpd(disco::Rng& rng, Eigen::Index c) {
  const Eigen::MatrixXcd a = random_matrix(rng, c, c + 2);
  Eigen::MatrixXcd r = a * a.adjoint() / static_cast<double>(c + 2);
  r.diagonal().array() += 0.05;
  return 0.5 * (r + r.adjoint());
}

inline disco::Spectrogram random_spectrogram(disco::Rng& rng, Eigen::Index bins, Eigen::Index frames) {
  disco::Spectrogram s;
  s.frame_size = static_cast<std::size_t>(2 * (bins - 1));
  s.hop = s.frame_size / 2;
  s.sample_rate = disco::kSampleRate;
  s.bins = random_matrix(rng, bins, frames);
  return s;
}

inline double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

}  // namespace test
