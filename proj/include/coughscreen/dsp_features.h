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

// Handcrafted spectral features: STFT magnitudes, a Slaney-style mel
// filterbank, MFCC, chroma and zero-crossing rate, pooled into a fixed
// 207-dimensional descriptor per clip.

#ifndef COUGHSCREEN_DSP_FEATURES_H_
#define COUGHSCREEN_DSP_FEATURES_H_

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "coughscreen/audio_io.h"
#include "coughscreen/matrix.h"

namespace coughscreen::dsp {

inline constexpr int kFftSize = 2048;
inline constexpr int kWindowLength = 2048;
inline constexpr int kHopLength = 512;
inline constexpr int kNumBins = kFftSize / 2 + 1;
inline constexpr int kNumMelBands = 128;
inline constexpr int kNumMfcc = 64;
inline constexpr int kNumChroma = 12;
inline constexpr double kLogFloor = 1e-10;

// Block layout of the handcrafted vector.
inline constexpr std::size_t kMfccOffset = 0;
inline constexpr std::size_t kChromaOffset = kMfccOffset + kNumMfcc;
inline constexpr std::size_t kMelOffset = kChromaOffset + kNumChroma;
inline constexpr std::size_t kZcrIndex = kMelOffset + kNumMelBands;
inline constexpr std::size_t kGenderIndex = kZcrIndex + 1;
inline constexpr std::size_t kDurationIndex = kGenderIndex + 1;
inline constexpr std::size_t kHandcraftedDim = kDurationIndex + 1;
static_assert(kHandcraftedDim == 207);

enum class Gender { kMale, kFemale, kOther };

// female -> 1, male -> 0, anything else -> 0.5.
double GenderCode(Gender gender);
Gender ParseGender(std::string_view token);

struct SpectrogramFrameSet {
  Matrix magnitudes;  // frames x kNumBins, one-sided |STFT|
};

// Number of frames for n samples under centered padding.
std::size_t FrameCount(std::size_t num_samples);

// Reflect-pads by `pad` samples on each side (mirror without repeating the
// edge sample, folding repeatedly when the signal is shorter than `pad`).
std::vector<double> ReflectPad(std::span<const float> samples, std::size_t pad);

// Periodic Hann window of kWindowLength samples.
const std::vector<double>& HannWindow();

// Slaney mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// kNumMelBands x kNumBins triangular filters spanning 0 Hz .. 22050 Hz, area
// normalized.
const Matrix& MelFilterbank();

// Center frequency in Hz of each mel filter.
std::vector<double> MelCenterFrequencies();

// Pitch class (C = 0 ... B = 11) that a frequency folds onto, with A4 = 440 Hz
// as reference. Returns -1 for non-positive frequencies.
int PitchClass(double hz);

// Requires a 44.1 kHz clip. Hann window, FFT 2048, hop 512, centered
// reflection padding.
SpectrogramFrameSet Stft(const audio::AudioClip& clip);

// Power spectrum through MelFilterbank(): frames x 128.
Matrix MelSpectrogram(const SpectrogramFrameSet& spec);

// Per frame: natural log with kLogFloor, orthonormal DCT-II, first 64
// coefficients.
Matrix Mfcc(const Matrix& mel);

// Power folded onto 12 pitch classes, each frame divided by its maximum.
// Silent frames stay zero.
Matrix Chroma(const SpectrogramFrameSet& spec);

// Mean over centered frames (2048 / 512) of the fraction of sign changes per
// frame. Zero counts as positive.
double ZeroCrossingRate(const audio::AudioClip& clip);

struct HandcraftedVector {
  std::array<double, kHandcraftedDim> values{};

  std::span<const double> mfcc() const {
    return std::span<const double>(values).subspan(kMfccOffset, kNumMfcc);
  }
  std::span<const double> chroma() const {
    return std::span<const double>(values).subspan(kChromaOffset, kNumChroma);
  }
  std::span<const double> mel() const {
    return std::span<const double>(values).subspan(kMelOffset, kNumMelBands);
  }
  double zcr() const { return values[kZcrIndex]; }
  double gender() const { return values[kGenderIndex]; }
  double duration() const { return values[kDurationIndex]; }
};

// mfcc / chroma / mel are per-coefficient means over frames.
HandcraftedVector ComputeHandcrafted(const audio::AudioClip& clip,
                                     Gender gender);

}  // namespace coughscreen::dsp

#endif  // COUGHSCREEN_DSP_FEATURES_H_
