#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "disco/types.hpp"

namespace disco {

enum class WavCodec { Pcm16, Float32 };

struct WavWriteStats {
  std::size_t clipped = 0;
};

/// Reads one channel of a RIFF/WAVE file (PCM 16-bit or IEEE float 32-bit).
/// Integer PCM is scaled by 1/32768. Rejects any rate other than 16 kHz.
TimeSignal read_wav(const std::filesystem::path& path, std::size_t channel = 0);

/// Reads every channel; all share the file's sample rate.
std::vector<TimeSignal> read_wav_channels(const std::filesystem::path& path);

WavWriteStats write_wav(const TimeSignal& signal, const std::filesystem::path& path, WavCodec codec);

/// Interleaves equal-length channels into one file.
WavWriteStats write_wav_channels(const std::vector<TimeSignal>& channels,
                                 const std::filesystem::path& path, WavCodec codec);

}  // namespace disco
