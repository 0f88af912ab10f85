// Copyright 2026 The CoughScreen Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coughscreen/audio_io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numeric>

#include "coughscreen/error.h"

namespace coughscreen::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool Has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void Skip(std::size_t n) { pos_ = std::min(bytes_.size(), pos_ + n); }

  std::uint32_t U32() {
    Require(4);
    std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                      static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8 |
                      static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16 |
                      static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }
  std::uint16_t U16() {
    Require(2);
    std::uint16_t v = static_cast<std::uint16_t>(
        bytes_[pos_] | (static_cast<std::uint16_t>(bytes_[pos_ + 1]) << 8));
    pos_ += 2;
    return v;
  }
  std::string Tag() {
    Require(4);
    std::string tag(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return tag;
  }

 private:
  void Require(std::size_t n) const {
    if (!Has(n)) throw Error(ErrorKind::kDecode, "truncated WAV header");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

double DecodeSample(const std::uint8_t* p, const FormatChunk& fmt) {
  if (fmt.format == kFormatFloat) {
    float f;
    std::uint32_t raw = static_cast<std::uint32_t>(p[0]) |
                        static_cast<std::uint32_t>(p[1]) << 8 |
                        static_cast<std::uint32_t>(p[2]) << 16 |
                        static_cast<std::uint32_t>(p[3]) << 24;
    std::memcpy(&f, &raw, sizeof f);
    return f;
  }
  switch (fmt.bits) {
    case 8:
      // 8-bit WAV is unsigned with a 128 offset.
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: {
      auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    case 32: {
      std::uint32_t raw = static_cast<std::uint32_t>(p[0]) |
                          static_cast<std::uint32_t>(p[1]) << 8 |
                          static_cast<std::uint32_t>(p[2]) << 16 |
                          static_cast<std::uint32_t>(p[3]) << 24;
      return static_cast<std::int32_t>(raw) / 2147483648.0;
    }
  }
  return 0.0;
}

void ValidateFormat(const FormatChunk& fmt) {
  if (fmt.channels == 0 || fmt.sample_rate == 0) {
    throw Error(ErrorKind::kDecode, "WAV fmt chunk has zero channels or rate");
  }
  if (fmt.format == kFormatPcm) {
    if (fmt.bits != 8 && fmt.bits != 16 && fmt.bits != 24 && fmt.bits != 32) {
      throw Error(ErrorKind::kUnsupportedFormat,
                  "unsupported PCM bit depth " + std::to_string(fmt.bits));
    }
  } else if (fmt.format == kFormatFloat) {
    if (fmt.bits != 32) {
      throw Error(ErrorKind::kUnsupportedFormat,
                  "unsupported float bit depth " + std::to_string(fmt.bits));
    }
  } else {
    throw Error(ErrorKind::kUnsupportedFormat,
                "unsupported WAV codec tag " + std::to_string(fmt.format));
  }
  if (fmt.block_align != fmt.channels * (fmt.bits / 8)) {
    throw Error(ErrorKind::kDecode, "inconsistent WAV block alignment");
  }
}

// Kaiser-windowed sinc kernel evaluated at offset t (input samples).
class SincKernel {
 public:
  static constexpr double kBeta = 8.6;
  static constexpr int kZeroCrossings = 64;
  static constexpr double kRolloff = 0.97;

  explicit SincKernel(double cutoff)
      : cutoff_(cutoff),
        half_width_(kZeroCrossings / cutoff),
        i0_beta_(std::cyl_bessel_i(0.0, kBeta)) {}

  double half_width() const { return half_width_; }

  double operator()(double t) const {
    double x = t / half_width_;
    if (std::abs(x) >= 1.0) return 0.0;
    double window = std::cyl_bessel_i(0.0, kBeta * std::sqrt(1.0 - x * x)) /
                    i0_beta_;
    double arg = M_PI * cutoff_ * t;
    double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
    return cutoff_ * sinc * window;
  }

 private:
  double cutoff_;
  double half_width_;
  double i0_beta_;
};

}  // namespace

AudioClip DecodeWav(std::span<const std::uint8_t> bytes, std::string clip_id) {
  ByteReader reader(bytes);
  if (!reader.Has(12)) throw Error(ErrorKind::kDecode, "file too short for RIFF");
  if (reader.Tag() != "RIFF") throw Error(ErrorKind::kDecode, "missing RIFF tag");
  reader.U32();
  if (reader.Tag() != "WAVE") throw Error(ErrorKind::kDecode, "missing WAVE tag");

  FormatChunk fmt;
  bool have_fmt = false;
  std::span<const std::uint8_t> payload;
  bool have_data = false;
  while (reader.Has(8)) {
    std::string tag = reader.Tag();
    std::uint32_t size = reader.U32();
    std::size_t start = reader.pos();
    if (tag == "fmt ") {
      if (size < 16 || !reader.Has(16)) {
        throw Error(ErrorKind::kDecode, "fmt chunk too small");
      }
      fmt.format = reader.U16();
      fmt.channels = reader.U16();
      fmt.sample_rate = reader.U32();
      reader.U32();  // byte rate
      fmt.block_align = reader.U16();
      fmt.bits = reader.U16();
      if (fmt.format == kFormatExtensible) {
        if (size < 40 || !reader.Has(24)) {
          throw Error(ErrorKind::kDecode, "extensible fmt chunk too small");
        }
        reader.U16();  // cbSize
        reader.U16();  // valid bits
        reader.U32();  // channel mask
        fmt.format = reader.U16();  // leading two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (tag == "data") {
      // Tolerate streaming writers that leave the data size unset.
      std::size_t len = std::min<std::size_t>(size, reader.remaining());
      payload = bytes.subspan(start, len);
      have_data = true;
    }
    reader.Skip(start + size + (size & 1u) - reader.pos());
    if (have_fmt && have_data) break;
  }
  if (!have_fmt) throw Error(ErrorKind::kDecode, "missing fmt chunk");
  if (!have_data) throw Error(ErrorKind::kDecode, "missing data chunk");
  ValidateFormat(fmt);

  const std::size_t frames = payload.size() / fmt.block_align;
  if (frames == 0) throw Error(ErrorKind::kEmptyAudio, "WAV has no samples");

  AudioClip clip;
  clip.clip_id = std::move(clip_id);
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.samples.resize(frames);
  const std::size_t bytes_per_sample = fmt.bits / 8;
  for (std::size_t f = 0; f < frames; ++f) {
    const std::uint8_t* frame = payload.data() + f * fmt.block_align;
    double sum = 0.0;
    for (int c = 0; c < fmt.channels; ++c) {
      sum += DecodeSample(frame + c * bytes_per_sample, fmt);
    }
    clip.samples[f] = static_cast<float>(sum / fmt.channels);
  }
  return clip;
}

AudioClip DecodeWavFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kNotFound, "cannot open audio file " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return DecodeWav(bytes, path.stem().string());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> EncodeWav(std::span<const float> interleaved,
                                    int sample_rate, int channels,
                                    WavEncoding encoding) {
  int bits = 16;
  std::uint16_t format = kFormatPcm;
  switch (encoding) {
    case WavEncoding::kPcm8: bits = 8; break;
    case WavEncoding::kPcm16: bits = 16; break;
    case WavEncoding::kPcm24: bits = 24; break;
    case WavEncoding::kPcm32: bits = 32; break;
    case WavEncoding::kFloat32: bits = 32; format = kFormatFloat; break;
  }
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(interleaved.size() * (bits / 8));
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  auto put = [&out](std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto tag = [&out](const char* t) { out.insert(out.end(), t, t + 4); };

  tag("RIFF");
  put(36 + data_size, 4);
  tag("WAVE");
  tag("fmt ");
  put(16, 4);
  put(format, 2);
  put(channels, 2);
  put(sample_rate, 4);
  put(static_cast<std::uint64_t>(sample_rate) * channels * (bits / 8), 4);
  put(channels * (bits / 8), 2);
  put(bits, 2);
  tag("data");
  put(data_size, 4);

  for (float s : interleaved) {
    double x = std::clamp(static_cast<double>(s), -1.0, 1.0);
    switch (encoding) {
      case WavEncoding::kPcm8:
        put(static_cast<std::uint8_t>(std::clamp(std::lround(x * 128.0) + 128, 0L, 255L)), 1);
        break;
      case WavEncoding::kPcm16:
        put(static_cast<std::uint16_t>(static_cast<std::int16_t>(
                std::clamp(std::lround(x * 32768.0), -32768L, 32767L))),
            2);
        break;
      case WavEncoding::kPcm24:
        put(static_cast<std::uint32_t>(static_cast<std::int32_t>(
                std::clamp(std::lround(x * 8388608.0), -8388608L, 8388607L))),
            3);
        break;
      case WavEncoding::kPcm32:
        put(static_cast<std::uint32_t>(static_cast<std::int32_t>(std::clamp(
                std::llround(x * 2147483648.0), -2147483648LL, 2147483647LL))),
            4);
        break;
      case WavEncoding::kFloat32: {
        float f = s;
        std::uint32_t raw;
        std::memcpy(&raw, &f, sizeof raw);
        put(raw, 4);
        break;
      }
    }
  }
  return out;
}

void WriteWavFile(const std::filesystem::path& path, const AudioClip& clip,
                  WavEncoding encoding) {
  auto bytes = EncodeWav(clip.samples, clip.sample_rate, 1, encoding);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kNotFound, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

AudioClip Resample(const AudioClip& clip, int target_rate) {
  if (clip.sample_rate <= 0 || clip.samples.empty()) {
    throw Error(ErrorKind::kData, "invalid clip passed to Resample");
  }
  if (target_rate <= 0) throw Error(ErrorKind::kValue, "target rate must be > 0");
  if (clip.sample_rate == target_rate) return clip;

  const std::int64_t g = std::gcd(clip.sample_rate, target_rate);
  const std::int64_t up = target_rate / g;      // L
  const std::int64_t down = clip.sample_rate / g;  // M
  const std::int64_t n_in = static_cast<std::int64_t>(clip.samples.size());
  const std::int64_t n_out = std::max<std::int64_t>(1, (n_in * up + down / 2) / down);

  const double cutoff =
      std::min(1.0, static_cast<double>(up) / static_cast<double>(down)) *
      SincKernel::kRolloff;
  const SincKernel kernel(cutoff);
  const int reach = static_cast<int>(std::ceil(kernel.half_width()));
  const int taps = 2 * reach + 1;

  // One tap set per output phase when the phase count is modest; otherwise
  // evaluate the kernel per output sample.
  constexpr std::int64_t kMaxTablePhases = 4096;
  std::vector<double> table;
  if (up <= kMaxTablePhases) {
    table.resize(static_cast<std::size_t>(up * taps));
    for (std::int64_t p = 0; p < up; ++p) {
      double frac = static_cast<double>(p) / static_cast<double>(up);
      for (int j = -reach; j <= reach; ++j) {
        table[static_cast<std::size_t>(p * taps + j + reach)] = kernel(frac - j);
      }
    }
  }

  AudioClip out;
  out.clip_id = clip.clip_id;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));
  for (std::int64_t n = 0; n < n_out; ++n) {
    const std::int64_t pos = n * down;
    const std::int64_t base = pos / up;
    const std::int64_t phase = pos % up;
    const double frac = static_cast<double>(phase) / static_cast<double>(up);
    double acc = 0.0;
    for (int j = -reach; j <= reach; ++j) {
      std::int64_t k = base + j;
      if (k < 0 || k >= n_in) continue;
      double w = table.empty()
                     ? kernel(frac - j)
                     : table[static_cast<std::size_t>(phase * taps + j + reach)];
      acc += w * clip.samples[static_cast<std::size_t>(k)];
    }
    out.samples[static_cast<std::size_t>(n)] = static_cast<float>(acc);
  }
  return out;
}

AudioClip NormalizeForPipeline(const AudioClip& clip) {
  AudioClip out = Resample(clip, kPipelineSampleRate);
  if (out.duration_seconds() < 0.5) {
    std::cerr << "warning: clip '" << clip.clip_id << "' is shorter than 500 ms ("
              << out.duration_seconds() << " s)\n";
  }
  return out;
}

}  // namespace coughscreen::audio
