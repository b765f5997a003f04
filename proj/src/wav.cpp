#include "disco/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "bytes.hpp"
#include "disco/error.hpp"
#include "file_util.hpp"

namespace disco {
namespace {

using detail::get_f32;
using detail::get_u16;
using detail::get_u32;

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct WavData {
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::vector<std::vector<double>> samples;
};

WavData parse(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  const std::string_view in(bytes);
  const std::string name = path.string();
  if (in.size() < 12 || in.substr(0, 4) != "RIFF" || in.substr(8, 4) != "WAVE")
    throw Error(ErrorKind::Format, name + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::string_view data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= in.size()) {
    const auto id = in.substr(pos, 4);
    const std::uint32_t size = get_u32(in, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > in.size()) throw Error(ErrorKind::Format, name + ": bad fmt chunk");
      format = get_u16(in, body);
      channels = get_u16(in, body + 2);
      rate = get_u32(in, body + 4);
      bits = get_u16(in, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorKind::Format, name + ": bad extensible fmt chunk");
        format = get_u16(in, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      const std::size_t avail = in.size() - body;
      if (size > avail) throw Error(ErrorKind::Truncation, name + ": data chunk truncated");
      data = in.substr(body, size);
      have_data = true;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || !have_data) throw Error(ErrorKind::Format, name + ": missing fmt or data chunk");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw Error(ErrorKind::Format, name + ": unsupported codec (format " + std::to_string(format) +
                                       ", " + std::to_string(bits) + " bits)");
  if (channels == 0) throw Error(ErrorKind::Format, name + ": zero channels");
  if (rate != static_cast<std::uint32_t>(kSampleRate))
    throw Error(ErrorKind::Rate, name + ": sample rate " + std::to_string(rate) + " Hz, expected 16000 Hz");

  const std::size_t width = pcm16 ? 2 : 4;
  const std::size_t frames = data.size() / (width * channels);
  WavData out;
  out.channels = channels;
  out.rate = rate;
  out.samples.assign(channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t off = (i * channels + c) * width;
      out.samples[c][i] = pcm16 ? static_cast<std::int16_t>(get_u16(data, off)) / 32768.0
                                : static_cast<double>(get_f32(data, off));
    }
  }
  return out;
}

}  // namespace

TimeSignal read_wav(const std::filesystem::path& path, std::size_t channel) {
  WavData d = parse(path);
  if (channel >= d.channels)
    throw Error(ErrorKind::Format, path.string() + ": channel " + std::to_string(channel) + " not present");
  if (d.samples[channel].empty()) throw Error(ErrorKind::Format, path.string() + ": empty signal");
  return TimeSignal{std::move(d.samples[channel]), static_cast<int>(d.rate)};
}

std::vector<TimeSignal> read_wav_channels(const std::filesystem::path& path) {
  WavData d = parse(path);
  std::vector<TimeSignal> out;
  out.reserve(d.channels);
  for (auto& ch : d.samples) {
    if (ch.empty()) throw Error(ErrorKind::Format, path.string() + ": empty signal");
    out.push_back(TimeSignal{std::move(ch), static_cast<int>(d.rate)});
  }
  return out;
}

WavWriteStats write_wav(const TimeSignal& signal, const std::filesystem::path& path, WavCodec codec) {
  return write_wav_channels({signal}, path, codec);
}

WavWriteStats write_wav_channels(const std::vector<TimeSignal>& channels, const std::filesystem::path& path,
                                 WavCodec codec) {
  if (channels.empty()) throw Error(ErrorKind::Size, "no channels to write");
  const std::size_t frames = channels.front().size();
  for (const auto& ch : channels) {
    if (ch.size() != frames) throw Error(ErrorKind::Size, "channel lengths differ");
    if (ch.sample_rate != channels.front().sample_rate) throw Error(ErrorKind::Rate, "channel rates differ");
  }
  const auto n_ch = static_cast<std::uint16_t>(channels.size());
  const auto rate = static_cast<std::uint32_t>(channels.front().sample_rate);
  const std::uint16_t width = codec == WavCodec::Pcm16 ? 2 : 4;
  const auto data_size = static_cast<std::uint32_t>(frames * n_ch * width);

  std::string out;
  out.reserve(64 + data_size);
  out += "RIFF";
  const bool is_float = codec == WavCodec::Float32;
  const std::uint32_t fmt_size = is_float ? 18 : 16;
  const std::uint32_t fact_size = is_float ? 12 : 0;
  detail::put_u32(out, 4 + (8 + fmt_size) + fact_size + (8 + data_size));
  out += "WAVE";
  out += "fmt ";
  detail::put_u32(out, fmt_size);
  detail::put_u16(out, is_float ? kFormatFloat : kFormatPcm);
  detail::put_u16(out, n_ch);
  detail::put_u32(out, rate);
  detail::put_u32(out, rate * n_ch * width);
  detail::put_u16(out, static_cast<std::uint16_t>(n_ch * width));
  detail::put_u16(out, static_cast<std::uint16_t>(8 * width));
  if (is_float) {
    detail::put_u16(out, 0);  // cbSize
    out += "fact";
    detail::put_u32(out, 4);
    detail::put_u32(out, static_cast<std::uint32_t>(frames));
  }
  out += "data";
  detail::put_u32(out, data_size);

  WavWriteStats stats;
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& ch : channels) {
      const double v = ch.samples[i];
      if (is_float) {
        detail::put_f32(out, static_cast<float>(v));
        continue;
      }
      long q = std::lround(v * 32768.0);
      if (q > 32767 || q < -32768) {
        ++stats.clipped;
        q = std::clamp(q, -32768L, 32767L);
      }
      detail::put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
  }
  detail::write_file_atomic(path, out);
  return stats;
}

}  // namespace disco
