#pragma once

#include <cstdint>
#include <vector>

#include "disco/types.hpp"

namespace disco {

/// Voiced syllables with gliding pitch and formant-shaped harmonics, separated
/// by pauses and the odd fricative burst. Normalized to an RMS of 0.05.
TimeSignal synthetic_speech(std::uint64_t seed, double seconds);

/// White noise shaped by the long-term magnitude spectrum of `templates`.
/// Normalized to an RMS of 0.05.
TimeSignal speech_shaped_noise(std::uint64_t seed, double seconds, const std::vector<TimeSignal>& templates);

struct FixtureSet {
  std::vector<TimeSignal> speech;
  std::vector<TimeSignal> noise;
};

/// The bundled corpus used by `generate --synthetic-fixtures`.
FixtureSet synthetic_fixtures(std::uint64_t seed, std::size_t n_speech = 8, std::size_t n_noise = 4,
                              double seconds = 3.0);

}  // namespace disco
