#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "disco/spatial_stats.hpp"
#include "disco/stft.hpp"

namespace disco {

/// Generalized eigendecomposition of one {R_yy, R_nn} pencil:
/// R_nn = Q diag(sigma_n) Q^H and R_yy = Q diag(sigma_y) Q^H.
///
/// Columns are sorted by descending sigma_y / sigma_n and each column is
/// rotated so that its reference-channel entry is real and non-negative.
/// sigma_n is normalized to 1.
struct GevdDecomposition {
  Eigen::MatrixXcd q;
  Eigen::VectorXd sigma_y;
  Eigen::VectorXd sigma_n;
  /// Implicit reference t_1 = Q^-H e_1 conj(q_1(1)); diagnostics only.
  Eigen::VectorXcd implicit_reference;

  Eigen::Index size() const noexcept { return q.cols(); }
};

/// Cholesky-reduces the pencil to a standard Hermitian eigenproblem.
/// Throws Conditioning when R_nn is not positive definite.
GevdDecomposition gevd(const Eigen::MatrixXcd& r_yy, const Eigen::MatrixXcd& r_nn);

/// max(sigma_y1 - sigma_n1, 0) q_1 q_1^H.
Eigen::MatrixXcd rank1_speech(const GevdDecomposition& dec);

/// Per-bin filter weights; w(f) has one entry per stacked channel.
struct BeamformerWeights {
  std::vector<Eigen::VectorXcd> w;
  std::size_t ref_index = 0;
  double mu = 1.0;
};

/// (R_sr1 + mu R_nn)^-1 R_sr1 e_ref by a linear solve. With mu == 0 the
/// system is rank deficient in general and the minimum-norm solution is used.
Eigen::VectorXcd sdw_mwf_weights(const Eigen::MatrixXcd& r_sr1, const Eigen::MatrixXcd& r_nn, double mu,
                                 std::size_t ref_index = 0);

/// (R_ss + mu R_nn)^-1 R_ss e_ref with the full-rank speech estimate.
Eigen::VectorXcd baseline_mwf_weights(const Eigen::MatrixXcd& r_ss, const Eigen::MatrixXcd& r_nn, double mu,
                                      std::size_t ref_index = 0);

enum class FilterRule { GevdSdw, BaselineSdw };

/// Runs the chosen rule at every bin of a covariance pair. The GEVD rule
/// uses the pencil {R_ss + R_nn, R_nn}.
BeamformerWeights filter_weights(const CovariancePair& cov, double mu, FilterRule rule = FilterRule::GevdSdw,
                                 std::size_t ref_index = 0);

/// s(f,t) = w(f)^H y(f,t).
Spectrogram apply_weights(const BeamformerWeights& weights, const StackedSpectra& stacked);

}  // namespace disco
