#include "disco/mask_file.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>

#include "bytes.hpp"
#include "disco/error.hpp"
#include "file_util.hpp"

namespace disco {

LoadedMask load_mask(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  const std::string_view in(bytes);
  if (in.substr(0, 4) != "MSK1") throw Error(ErrorKind::Format, path.string() + ": bad magic, expected MSK1");
  if (in.size() < kMaskHeaderBytes) throw Error(ErrorKind::Truncation, path.string() + ": header cut short");
  const std::uint32_t n_bins = detail::get_u32(in, 4);
  const std::uint32_t n_frames = detail::get_u32(in, 8);
  const std::size_t expected = mask_file_bytes(n_bins, n_frames);
  if (in.size() < expected)
    throw Error(ErrorKind::Truncation, path.string() + ": payload has " + std::to_string(in.size() - kMaskHeaderBytes) +
                                           " bytes, header declares " + std::to_string(expected - kMaskHeaderBytes));
  if (in.size() > expected) throw Error(ErrorKind::Format, path.string() + ": trailing bytes after payload");

  LoadedMask out;
  Eigen::MatrixXd values(n_bins, n_frames);
  std::size_t pos = kMaskHeaderBytes;
  for (std::uint32_t f = 0; f < n_bins; ++f) {
    for (std::uint32_t t = 0; t < n_frames; ++t, pos += 4) {
      const double v = detail::get_f32(in, pos);
      if (std::isnan(v)) throw Error(ErrorKind::Format, path.string() + ": NaN mask value");
      const double c = std::clamp(v, 0.0, 1.0);
      if (c != v) ++out.clamped;
      values(f, t) = c;
    }
  }
  out.mask = TfMask(std::move(values));
  return out;
}

void store_mask(const TfMask& mask, const std::filesystem::path& path) {
  std::string out;
  out.reserve(mask_file_bytes(mask.n_bins(), mask.n_frames()));
  out += "MSK1";
  detail::put_u32(out, static_cast<std::uint32_t>(mask.n_bins()));
  detail::put_u32(out, static_cast<std::uint32_t>(mask.n_frames()));
  for (Eigen::Index f = 0; f < mask.n_bins(); ++f)
    for (Eigen::Index t = 0; t < mask.n_frames(); ++t) detail::put_f32(out, static_cast<float>(mask(f, t)));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  detail::write_file_atomic(path, out);
}

}  // namespace disco
