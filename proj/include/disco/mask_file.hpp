#pragma once

#include <cstddef>
#include <filesystem>

#include "disco/mask.hpp"

namespace disco {

/// MSK1: "MSK1", u32 n_bins, u32 n_frames, then n_bins*n_frames float32
/// values, bin-major (row-major over bins x frames), all little-endian.
inline constexpr std::size_t kMaskHeaderBytes = 12;

struct LoadedMask {
  TfMask mask;
  std::size_t clamped = 0;  // values outside [0,1] clamped on load
};

LoadedMask load_mask(const std::filesystem::path& path);
void store_mask(const TfMask& mask, const std::filesystem::path& path);

inline std::size_t mask_file_bytes(std::size_t n_bins, std::size_t n_frames) {
  return kMaskHeaderBytes + 4 * n_bins * n_frames;
}

}  // namespace disco
