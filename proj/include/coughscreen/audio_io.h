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

// WAV decoding and sample-rate conversion. Every recording entering the
// pipeline is brought to 44.1 kHz mono floating point.

#ifndef COUGHSCREEN_AUDIO_IO_H_
#define COUGHSCREEN_AUDIO_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace coughscreen::audio {

inline constexpr int kPipelineSampleRate = 44100;

struct AudioClip {
  std::vector<float> samples;  // mono, nominally in [-1, 1]
  int sample_rate = 0;
  std::string clip_id;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

// Decodes a RIFF/WAVE byte buffer. Supports PCM 8/16/24/32-bit integer and
// 32-bit IEEE float, including WAVE_FORMAT_EXTENSIBLE wrappers. Channels are
// averaged to mono; the original sample rate is kept.
AudioClip DecodeWav(std::span<const std::uint8_t> bytes,
                    std::string clip_id = {});

// Reads and decodes a WAV file. clip_id defaults to the file stem.
AudioClip DecodeWavFile(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kPcm24, kPcm32, kFloat32, kPcm8 };

// Interleaved encoder, used to produce fixtures and synthetic corpora.
// `interleaved` holds frames * channels samples.
std::vector<std::uint8_t> EncodeWav(std::span<const float> interleaved,
                                    int sample_rate, int channels = 1,
                                    WavEncoding encoding = WavEncoding::kPcm16);

void WriteWavFile(const std::filesystem::path& path, const AudioClip& clip,
                  WavEncoding encoding = WavEncoding::kPcm16);

// Band-limited rational resampler: Kaiser-windowed sinc (beta 8.6, 64 zero
// crossings per side), evaluated polyphase. Output length is
// round(n * target_rate / sample_rate). A clip already at target_rate is
// returned unchanged.
AudioClip Resample(const AudioClip& clip, int target_rate);

// Resamples to kPipelineSampleRate and warns (stderr) about clips shorter
// than 500 ms.
AudioClip NormalizeForPipeline(const AudioClip& clip);

}  // namespace coughscreen::audio

#endif  // COUGHSCREEN_AUDIO_IO_H_
