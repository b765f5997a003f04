#include "disco/spatial_stats.hpp"

#include "disco/error.hpp"

namespace disco {
namespace {

Eigen::MatrixXcd outer_mean(const Eigen::MatrixXcd& x) {
  const Eigen::Index c = x.rows();
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(c, c);
  r.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / static_cast<double>(x.cols()));
  Eigen::MatrixXcd full = r.selfadjointView<Eigen::Lower>();
  for (Eigen::Index i = 0; i < c; ++i) full(i, i) = full(i, i).real();
  return full;
}

double real_trace(const Eigen::MatrixXcd& r) { return r.diagonal().real().sum(); }

// Returns false when the matrix carried no energy and only loading remains.
bool load_diagonal(Eigen::MatrixXcd& r, double delta, double fallback_scale) {
  const auto c = static_cast<double>(r.rows());
  const double scale = real_trace(r) / c;
  const bool ok = scale > 0.0;
  const double load = delta * (ok ? scale : (fallback_scale > 0.0 ? fallback_scale : 1.0));
  r.diagonal().array() += load;
  return ok;
}

}  // namespace

CovariancePair masked_covariances(const StackedSpectra& stacked, const TfMask& local_mask, MaskPolicy policy,
                                  double delta) {
  const Eigen::Index c = static_cast<Eigen::Index>(stacked.size());
  if (c == 0) throw Error(ErrorKind::Size, "no channels to estimate covariances from");
  const Eigen::Index n_bins = stacked.n_bins();
  const Eigen::Index n_frames = stacked.n_frames();
  if (n_frames == 0) throw Error(ErrorKind::Empty, "no frames to estimate covariances from");
  for (const auto& ch : stacked.channels)
    if (ch->n_bins() != n_bins || ch->n_frames() != n_frames) throw Error(ErrorKind::Size, "stacked channel grids differ");
  if (local_mask.n_bins() != n_bins || local_mask.n_frames() != n_frames)
    throw Error(ErrorKind::Size, "mask grid does not match the stacked spectra");

  std::vector<const TfMask*> masks(static_cast<std::size_t>(c), &local_mask);
  if (policy == MaskPolicy::Distant) {
    for (std::size_t i = 0; i < stacked.size(); ++i) {
      if (stacked.origins[i].kind == ChannelOrigin::Kind::LocalMic) continue;
      const auto& m = stacked.sender_masks[i];
      if (!m) throw Error(ErrorKind::Protocol, "distant policy needs the sender mask of node " +
                                                   std::to_string(stacked.origins[i].node + 1));
      if (m->n_bins() != n_bins || m->n_frames() != n_frames)
        throw Error(ErrorKind::Size, "sender mask grid does not match the stacked spectra");
      masks[i] = m.get();
    }
  }

  CovariancePair out;
  out.frames = n_frames;
  out.speech.resize(static_cast<std::size_t>(n_bins));
  out.noise.resize(static_cast<std::size_t>(n_bins));
  Eigen::MatrixXcd s(c, n_frames), n(c, n_frames);
  for (Eigen::Index f = 0; f < n_bins; ++f) {
    for (Eigen::Index ch = 0; ch < c; ++ch) {
      const auto& y = stacked.channels[static_cast<std::size_t>(ch)]->bins;
      const auto& m = masks[static_cast<std::size_t>(ch)]->values();
      for (Eigen::Index t = 0; t < n_frames; ++t) {
        const double w = m(f, t);
        s(ch, t) = w * y(f, t);
        n(ch, t) = (1.0 - w) * y(f, t);
      }
    }
    auto& rs = out.speech[static_cast<std::size_t>(f)];
    auto& rn = out.noise[static_cast<std::size_t>(f)];
    rs = outer_mean(s);
    rn = outer_mean(n);
    const double speech_scale = real_trace(rs) / static_cast<double>(c);
    load_diagonal(rs, delta, 0.0);
    if (!load_diagonal(rn, delta, speech_scale)) ++out.degenerate_bins;
  }
  return out;
}

}  // namespace disco
