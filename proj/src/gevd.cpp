#include "disco/gevd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

#include "disco/error.hpp"

namespace disco {
namespace {

void require_square(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() || a.rows() == 0)
    throw Error(ErrorKind::Size, "pencil matrices must be square and of equal size");
}

Eigen::VectorXcd solve_weights(const Eigen::MatrixXcd& r_s, const Eigen::MatrixXcd& r_nn, double mu,
                               std::size_t ref_index) {
  require_square(r_s, r_nn);
  if (!(mu >= 0.0)) throw Error(ErrorKind::Conditioning, "mu must be non-negative");
  if (ref_index >= static_cast<std::size_t>(r_s.rows())) throw Error(ErrorKind::Size, "reference index out of range");
  const Eigen::VectorXcd rhs = r_s.col(static_cast<Eigen::Index>(ref_index));
  if (rhs.isZero(0.0)) return Eigen::VectorXcd::Zero(r_s.rows());

  const Eigen::MatrixXcd a = r_s + mu * r_nn;
  Eigen::VectorXcd w;
  if (mu > 0.0) {
    Eigen::LLT<Eigen::MatrixXcd> llt(a);
    if (llt.info() == Eigen::Success) {
      w = llt.solve(rhs);
    } else {
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(a);
      if (!lu.isInvertible()) throw Error(ErrorKind::Conditioning, "filter system is singular after loading");
      w = lu.solve(rhs);
    }
  } else {
    w = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd>(a).solve(rhs);
  }
  if (!w.allFinite()) throw Error(ErrorKind::Conditioning, "non-finite filter weights");
  return w;
}

}  // namespace

GevdDecomposition gevd(const Eigen::MatrixXcd& r_yy, const Eigen::MatrixXcd& r_nn) {
  require_square(r_yy, r_nn);
  const Eigen::Index c = r_yy.rows();
  Eigen::LLT<Eigen::MatrixXcd> llt(r_nn);
  if (llt.info() != Eigen::Success) throw Error(ErrorKind::Conditioning, "noise covariance is not positive definite");
  const Eigen::MatrixXcd l = llt.matrixL();
  const auto lower = l.triangularView<Eigen::Lower>();

  // A = L^-1 R_yy L^-H
  const Eigen::MatrixXcd x = lower.solve(r_yy);
  Eigen::MatrixXcd a = lower.solve(x.adjoint()).adjoint();
  a = 0.5 * (a + a.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Conditioning, "eigensolver did not converge");

  GevdDecomposition dec;
  dec.sigma_y.resize(c);
  dec.sigma_n = Eigen::VectorXd::Ones(c);
  Eigen::MatrixXcd u(c, c);
  for (Eigen::Index j = 0; j < c; ++j) {
    dec.sigma_y(j) = es.eigenvalues()(c - 1 - j);
    u.col(j) = es.eigenvectors().col(c - 1 - j);
  }
  dec.q = l * u;
  for (Eigen::Index j = 0; j < c; ++j) {
    const std::complex<double> p = dec.q(0, j);
    if (std::abs(p) == 0.0) continue;
    const std::complex<double> phase = std::conj(p) / std::abs(p);
    dec.q.col(j) *= phase;
    u.col(j) *= phase;
    dec.q(0, j) = std::abs(dec.q(0, j));
  }
  // Q^-H = L^-H U, so t_1 = L^-H u_1 conj(q_1(1)).
  dec.implicit_reference = l.adjoint().triangularView<Eigen::Upper>().solve(u.col(0)) * std::conj(dec.q(0, 0));
  return dec;
}

Eigen::MatrixXcd rank1_speech(const GevdDecomposition& dec) {
  const double sigma_s = std::max(dec.sigma_y(0) - dec.sigma_n(0), 0.0);
  const Eigen::VectorXcd q1 = dec.q.col(0);
  return sigma_s * (q1 * q1.adjoint());
}

Eigen::VectorXcd sdw_mwf_weights(const Eigen::MatrixXcd& r_sr1, const Eigen::MatrixXcd& r_nn, double mu,
                                 std::size_t ref_index) {
  return solve_weights(r_sr1, r_nn, mu, ref_index);
}

Eigen::VectorXcd baseline_mwf_weights(const Eigen::MatrixXcd& r_ss, const Eigen::MatrixXcd& r_nn, double mu,
                                      std::size_t ref_index) {
  return solve_weights(r_ss, r_nn, mu, ref_index);
}

BeamformerWeights filter_weights(const CovariancePair& cov, double mu, FilterRule rule, std::size_t ref_index) {
  BeamformerWeights out;
  out.mu = mu;
  out.ref_index = ref_index;
  out.w.reserve(cov.speech.size());
  for (std::size_t f = 0; f < cov.speech.size(); ++f) {
    if (rule == FilterRule::BaselineSdw) {
      out.w.push_back(baseline_mwf_weights(cov.speech[f], cov.noise[f], mu, ref_index));
      continue;
    }
    const auto dec = gevd(cov.speech[f] + cov.noise[f], cov.noise[f]);
    out.w.push_back(sdw_mwf_weights(rank1_speech(dec), cov.noise[f], mu, ref_index));
  }
  return out;
}

Spectrogram apply_weights(const BeamformerWeights& weights, const StackedSpectra& stacked) {
  const Eigen::Index n_bins = stacked.n_bins();
  const Eigen::Index n_frames = stacked.n_frames();
  const Eigen::Index c = static_cast<Eigen::Index>(stacked.size());
  if (c == 0) throw Error(ErrorKind::Size, "no channels to filter");
  if (static_cast<Eigen::Index>(weights.w.size()) != n_bins)
    throw Error(ErrorKind::Size, "weight bins do not match the stacked spectra");
  for (const auto& w : weights.w)
    if (w.size() != c) throw Error(ErrorKind::Size, "weight length does not match the channel count");
  for (const auto& ch : stacked.channels)
    if (ch->n_bins() != n_bins || ch->n_frames() != n_frames) throw Error(ErrorKind::Size, "stacked channel grids differ");

  const auto& first = *stacked.channels.front();
  Spectrogram out;
  out.frame_size = first.frame_size;
  out.hop = first.hop;
  out.sample_rate = first.sample_rate;
  out.bins = Eigen::MatrixXcd::Zero(n_bins, n_frames);
  for (Eigen::Index ch = 0; ch < c; ++ch) {
    const auto& y = stacked.channels[static_cast<std::size_t>(ch)]->bins;
    for (Eigen::Index f = 0; f < n_bins; ++f) {
      const std::complex<double> g = std::conj(weights.w[static_cast<std::size_t>(f)](ch));
      if (g == std::complex<double>(0.0)) continue;
      out.bins.row(f) += g * y.row(f);
    }
  }
  return out;
}

}  // namespace disco
