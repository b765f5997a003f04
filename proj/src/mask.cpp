#include "disco/mask.hpp"

#include <cmath>
#include <utility>

#include "disco/error.hpp"
#include "disco/mask_file.hpp"

namespace disco {
namespace {

double snap(double v) { return std::nearbyint(v / TfMask::kResolution) * TfMask::kResolution; }

}  // namespace

TfMask::TfMask(Eigen::MatrixXd values) : values_(std::move(values)) {
  for (Eigen::Index j = 0; j < values_.cols(); ++j) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      double& v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw Error(ErrorKind::Validation, "mask value " + std::to_string(v) + " outside [0,1]");
      v = snap(v);
    }
  }
}

TfMask TfMask::constant(Eigen::Index n_bins, Eigen::Index n_frames, double value) {
  return TfMask(Eigen::MatrixXd::Constant(n_bins, n_frames, value));
}

TfMask irm(const Spectrogram& speech, const Spectrogram& noise, IrmKind kind) {
  if (speech.n_bins() != noise.n_bins() || speech.n_frames() != noise.n_frames())
    throw Error(ErrorKind::Size, "speech and noise spectrogram grids differ");
  Eigen::MatrixXd m(speech.n_bins(), speech.n_frames());
  for (Eigen::Index t = 0; t < m.cols(); ++t) {
    for (Eigen::Index f = 0; f < m.rows(); ++f) {
      double s = std::abs(speech.bins(f, t));
      double n = std::abs(noise.bins(f, t));
      if (kind == IrmKind::Power) {
        s *= s;
        n *= n;
      }
      const double denom = s + n;
      m(f, t) = denom > 0.0 ? s / denom : 0.5;
    }
  }
  return TfMask(std::move(m));
}

TfMask complement(const TfMask& mask) {
  return TfMask((1.0 - mask.values().array()).matrix());
}

MaskProvider MaskProvider::parse(const std::string& text) {
  if (text == "oracle") return oracle();
  if (text == "oracle-power") return oracle(IrmKind::Power);
  if (text.rfind("dir:", 0) == 0 && text.size() > 4) return external(text.substr(4));
  throw Error(ErrorKind::Config, "unknown mask provider '" + text + "' (expected oracle or dir:<path>)");
}

std::string MaskProvider::describe() const {
  if (mode == Mode::ExternalFile) return "dir:" + run_dir.string();
  return irm_kind == IrmKind::Power ? "oracle-power" : "oracle";
}

std::filesystem::path mask_path(const std::filesystem::path& run_dir, const std::string& scene_id,
                                std::size_t node, int step) {
  return run_dir / "masks" / scene_id /
         ("node" + std::to_string(node + 1) + "_step" + std::to_string(step) + ".msk");
}

TfMask get_mask(const MaskProvider& provider, const MaskRequest& request) {
  if (request.mixture_ref == nullptr) throw Error(ErrorKind::Size, "mask request without a reference grid");
  TfMask mask;
  if (provider.mode == MaskProvider::Mode::OracleIrm) {
    if (request.speech_ref == nullptr || request.noise_ref == nullptr)
      throw Error(ErrorKind::Resolution, "oracle mask for scene " + request.scene_id + " node " +
                                             std::to_string(request.node + 1) + " needs clean images");
    mask = irm(*request.speech_ref, *request.noise_ref, provider.irm_kind);
  } else {
    const auto path = mask_path(provider.run_dir, request.scene_id, request.node, request.step);
    if (!std::filesystem::exists(path))
      throw Error(ErrorKind::Resolution, "no mask for scene " + request.scene_id + ", node " +
                                             std::to_string(request.node + 1) + ", step " +
                                             std::to_string(request.step) + " at " + path.string());
    mask = load_mask(path).mask;
  }
  if (!mask.matches(*request.mixture_ref))
    throw Error(ErrorKind::Size, "mask grid " + std::to_string(mask.n_bins()) + "x" + std::to_string(mask.n_frames()) +
                                     " does not match spectrogram " + std::to_string(request.mixture_ref->n_bins()) +
                                     "x" + std::to_string(request.mixture_ref->n_frames()));
  return mask;
}

}  // namespace disco
