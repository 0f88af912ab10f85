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

#include "coughscreen/dsp_features.h"

#include <fftw3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "coughscreen/error.h"

namespace coughscreen::dsp {
namespace {

constexpr double kSampleRate = audio::kPipelineSampleRate;

void RequirePipelineRate(const audio::AudioClip& clip) {
  if (clip.sample_rate != audio::kPipelineSampleRate) {
    throw Error(ErrorKind::kData,
                "feature extraction expects 44100 Hz audio, got " +
                    std::to_string(clip.sample_rate));
  }
  if (clip.samples.empty()) {
    throw Error(ErrorKind::kEmptyAudio, "clip '" + clip.clip_id + "' is empty");
  }
}

// FFTW plans are created once; execution through the new-array interface is
// thread-safe.
class RealFft {
 public:
  static const RealFft& Instance() {
    static const RealFft instance;
    return instance;
  }

  // in: kFftSize reals (fftw-aligned); out: kNumBins complex values.
  void Execute(double* in, fftw_complex* out) const {
    fftw_execute_dft_r2c(plan_, in, out);
  }

 private:
  RealFft() {
    double* in = fftw_alloc_real(kFftSize);
    fftw_complex* out = fftw_alloc_complex(kNumBins);
    plan_ = fftw_plan_dft_r2c_1d(kFftSize, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }

  fftw_plan plan_;
};

struct FftBuffers {
  FftBuffers()
      : in(fftw_alloc_real(kFftSize)), out(fftw_alloc_complex(kNumBins)) {}
  ~FftBuffers() {
    fftw_free(in);
    fftw_free(out);
  }
  FftBuffers(const FftBuffers&) = delete;
  FftBuffers& operator=(const FftBuffers&) = delete;

  double* in;
  fftw_complex* out;
};

}  // namespace

double GenderCode(Gender gender) {
  switch (gender) {
    case Gender::kFemale: return 1.0;
    case Gender::kMale: return 0.0;
    case Gender::kOther: return 0.5;
  }
  return 0.5;
}

Gender ParseGender(std::string_view token) {
  std::string t(token);
  std::transform(t.begin(), t.end(), t.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (t == "female" || t == "f") return Gender::kFemale;
  if (t == "male" || t == "m") return Gender::kMale;
  return Gender::kOther;
}

std::size_t FrameCount(std::size_t num_samples) {
  return 1 + num_samples / kHopLength;
}

std::vector<double> ReflectPad(std::span<const float> samples, std::size_t pad) {
  const auto n = static_cast<std::int64_t>(samples.size());
  std::vector<double> out(samples.size() + 2 * pad);
  if (n == 1) {
    std::fill(out.begin(), out.end(), samples[0]);
    return out;
  }
  const std::int64_t period = 2 * (n - 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::int64_t m = (static_cast<std::int64_t>(i) - static_cast<std::int64_t>(pad)) % period;
    if (m < 0) m += period;
    if (m >= n) m = period - m;
    out[i] = samples[static_cast<std::size_t>(m)];
  }
  return out;
}

const std::vector<double>& HannWindow() {
  static const std::vector<double> window = [] {
    std::vector<double> w(kWindowLength);
    for (int i = 0; i < kWindowLength; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / kWindowLength);
    }
    return w;
  }();
  return window;
}

// Slaney: linear (200/3 Hz per mel) below 1 kHz, logarithmic above.
namespace {
constexpr double kMelLinearHz = 200.0 / 3.0;
constexpr double kMelBreakHz = 1000.0;
constexpr double kMelBreak = kMelBreakHz / kMelLinearHz;
const double kMelLogStep = std::log(6.4) / 27.0;
}  // namespace

double HzToMel(double hz) {
  if (hz < kMelBreakHz) return hz / kMelLinearHz;
  return kMelBreak + std::log(hz / kMelBreakHz) / kMelLogStep;
}

double MelToHz(double mel) {
  if (mel < kMelBreak) return mel * kMelLinearHz;
  return kMelBreakHz * std::exp(kMelLogStep * (mel - kMelBreak));
}

namespace {
std::vector<double> MelEdgeFrequencies() {
  const double mel_min = HzToMel(0.0);
  const double mel_max = HzToMel(kSampleRate / 2.0);
  std::vector<double> edges(kNumMelBands + 2);
  for (int i = 0; i < kNumMelBands + 2; ++i) {
    edges[i] = MelToHz(mel_min + (mel_max - mel_min) * i / (kNumMelBands + 1));
  }
  return edges;
}
}  // namespace

std::vector<double> MelCenterFrequencies() {
  auto edges = MelEdgeFrequencies();
  return {edges.begin() + 1, edges.end() - 1};
}

const Matrix& MelFilterbank() {
  static const Matrix bank = [] {
    const auto edges = MelEdgeFrequencies();
    Matrix w(kNumMelBands, kNumBins);
    for (int m = 0; m < kNumMelBands; ++m) {
      const double lower = edges[m], center = edges[m + 1], upper = edges[m + 2];
      const double enorm = 2.0 / (upper - lower);
      for (int k = 0; k < kNumBins; ++k) {
        const double f = k * kSampleRate / kFftSize;
        const double rise = (f - lower) / (center - lower);
        const double fall = (upper - f) / (upper - center);
        w(m, k) = std::max(0.0, std::min(rise, fall)) * enorm;
      }
    }
    return w;
  }();
  return bank;
}

int PitchClass(double hz) {
  if (!(hz > 0.0)) return -1;
  const long semitones_from_a = std::lround(12.0 * std::log2(hz / 440.0));
  // A is pitch class 9 when C is 0.
  long pc = (semitones_from_a + 9) % 12;
  if (pc < 0) pc += 12;
  return static_cast<int>(pc);
}

SpectrogramFrameSet Stft(const audio::AudioClip& clip) {
  RequirePipelineRate(clip);
  const std::size_t frames = FrameCount(clip.samples.size());
  const auto padded = ReflectPad(clip.samples, kFftSize / 2);
  const auto& window = HannWindow();
  const RealFft& fft = RealFft::Instance();
  FftBuffers buf;

  SpectrogramFrameSet out{Matrix(frames, kNumBins)};
  for (std::size_t t = 0; t < frames; ++t) {
    const double* frame = padded.data() + t * kHopLength;
    for (int i = 0; i < kFftSize; ++i) buf.in[i] = frame[i] * window[i];
    fft.Execute(buf.in, buf.out);
    auto row = out.magnitudes.row(t);
    for (int k = 0; k < kNumBins; ++k) {
      row[k] = std::hypot(buf.out[k][0], buf.out[k][1]);
    }
  }
  return out;
}

Matrix MelSpectrogram(const SpectrogramFrameSet& spec) {
  const Matrix& bank = MelFilterbank();
  const Matrix& mag = spec.magnitudes;
  Matrix mel(mag.rows(), kNumMelBands);
  std::vector<double> power(kNumBins);
  for (std::size_t t = 0; t < mag.rows(); ++t) {
    auto in = mag.row(t);
    for (int k = 0; k < kNumBins; ++k) power[k] = in[k] * in[k];
    for (int m = 0; m < kNumMelBands; ++m) {
      auto filter = bank.row(m);
      double acc = 0.0;
      for (int k = 0; k < kNumBins; ++k) acc += filter[k] * power[k];
      mel(t, m) = acc;
    }
  }
  return mel;
}

namespace {
// Orthonormal DCT-II basis restricted to the first kNumMfcc outputs:
// kNumMfcc x kNumMelBands.
const Matrix& DctBasis() {
  static const Matrix basis = [] {
    Matrix b(kNumMfcc, kNumMelBands);
    const double n = kNumMelBands;
    for (int k = 0; k < kNumMfcc; ++k) {
      const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int i = 0; i < kNumMelBands; ++i) {
        b(k, i) = scale * std::cos(M_PI * k * (2.0 * i + 1.0) / (2.0 * n));
      }
    }
    return b;
  }();
  return basis;
}
}  // namespace

Matrix Mfcc(const Matrix& mel) {
  if (mel.cols() != static_cast<std::size_t>(kNumMelBands)) {
    throw Error(ErrorKind::kSchema, "MFCC expects 128 mel bands");
  }
  const Matrix& basis = DctBasis();
  Matrix out(mel.rows(), kNumMfcc);
  std::vector<double> log_mel(kNumMelBands);
  for (std::size_t t = 0; t < mel.rows(); ++t) {
    auto in = mel.row(t);
    for (int i = 0; i < kNumMelBands; ++i) log_mel[i] = std::log(in[i] + kLogFloor);
    for (int k = 0; k < kNumMfcc; ++k) {
      auto b = basis.row(k);
      double acc = 0.0;
      for (int i = 0; i < kNumMelBands; ++i) acc += b[i] * log_mel[i];
      out(t, k) = acc;
    }
  }
  return out;
}

Matrix Chroma(const SpectrogramFrameSet& spec) {
  static const std::vector<int> bin_class = [] {
    std::vector<int> c(kNumBins);
    for (int k = 0; k < kNumBins; ++k) c[k] = PitchClass(k * kSampleRate / kFftSize);
    return c;
  }();
  const Matrix& mag = spec.magnitudes;
  Matrix out(mag.rows(), kNumChroma);
  for (std::size_t t = 0; t < mag.rows(); ++t) {
    auto in = mag.row(t);
    auto row = out.row(t);
    for (int k = 0; k < kNumBins; ++k) {
      if (bin_class[k] >= 0) row[bin_class[k]] += in[k] * in[k];
    }
    const double peak = *std::max_element(row.begin(), row.end());
    if (peak > 0.0) {
      for (double& v : row) v /= peak;
    }
  }
  return out;
}

double ZeroCrossingRate(const audio::AudioClip& clip) {
  if (clip.samples.empty()) {
    throw Error(ErrorKind::kEmptyAudio, "clip '" + clip.clip_id + "' is empty");
  }
  const std::size_t frames = FrameCount(clip.samples.size());
  const auto padded = ReflectPad(clip.samples, kWindowLength / 2);
  double total = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    const double* frame = padded.data() + t * kHopLength;
    int crossings = 0;
    for (int i = 1; i < kWindowLength; ++i) {
      crossings += (frame[i] < 0.0) != (frame[i - 1] < 0.0);
    }
    total += static_cast<double>(crossings) / kWindowLength;
  }
  return total / static_cast<double>(frames);
}

namespace {
void MeanOverFrames(const Matrix& m, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t t = 0; t < m.rows(); ++t) {
    auto row = m.row(t);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += row[j];
  }
  for (double& v : out) v /= static_cast<double>(m.rows());
}
}  // namespace

HandcraftedVector ComputeHandcrafted(const audio::AudioClip& clip,
                                     Gender gender) {
  const SpectrogramFrameSet spec = Stft(clip);
  const Matrix mel = MelSpectrogram(spec);
  const Matrix mfcc = Mfcc(mel);
  const Matrix chroma = Chroma(spec);

  HandcraftedVector v;
  std::span<double> all(v.values);
  MeanOverFrames(mfcc, all.subspan(kMfccOffset, kNumMfcc));
  MeanOverFrames(chroma, all.subspan(kChromaOffset, kNumChroma));
  MeanOverFrames(mel, all.subspan(kMelOffset, kNumMelBands));
  v.values[kZcrIndex] = ZeroCrossingRate(clip);
  v.values[kGenderIndex] = GenderCode(gender);
  v.values[kDurationIndex] = clip.duration_seconds();
  return v;
}

}  // namespace coughscreen::dsp
