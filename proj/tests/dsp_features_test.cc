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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "coughscreen/error.h"
#include "support/oracles.h"

namespace coughscreen::dsp {
namespace {

using audio::AudioClip;
using coughscreen::testing::Grid;
using coughscreen::testing::Sine;
using coughscreen::testing::WhiteNoise;

AudioClip Clip(std::vector<float> x) { return {std::move(x), 44100, "c"}; }

Grid ToGrid(const Matrix& m) {
  Grid g(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) g[r].assign(m.row(r).begin(), m.row(r).end());
  return g;
}

std::size_t ArgMax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

TEST(Stft, FrameCount) {
  EXPECT_EQ(FrameCount(44100), 87u);
  EXPECT_EQ(Stft(Clip(std::vector<float>(44100, 0.0f))).magnitudes.rows(), 87u);
  EXPECT_EQ(FrameCount(100), 1u);
  EXPECT_EQ(Stft(Clip(std::vector<float>(100, 0.1f))).magnitudes.rows(), 1u);
}

TEST(Stft, ZeroInputGivesZeroMagnitudes) {
  auto spec = Stft(Clip(std::vector<float>(5000, 0.0f)));
  EXPECT_EQ(spec.magnitudes.cols(), static_cast<std::size_t>(kNumBins));
  for (double v : spec.magnitudes.data()) ASSERT_EQ(v, 0.0);
}

TEST(Stft, BinCenteredSinePeaksAtItsBin) {
  auto spec = Stft(Clip(Sine(100 * 44100.0 / 2048, 44100, 44100)));
  // Frames whose window touches the reflected edge are skipped.
  for (std::size_t t = 2; t + 2 < spec.magnitudes.rows(); ++t) {
    ASSERT_EQ(ArgMax(spec.magnitudes.row(t)), 100u) << "frame " << t;
  }
}

TEST(Stft, RejectsOtherRates) {
  try {
    Stft({std::vector<float>(100, 0.0f), 16000, "x"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
  }
}

TEST(Stft, MatchesNaiveDftIncludingShortClips) {
  std::mt19937_64 rng(3);
  for (std::size_t n : {1u, 300u, 1500u, 5000u}) {
    auto x = WhiteNoise(rng, n, 0.7);
    const double err = coughscreen::testing::RelativeError(ToGrid(Stft(Clip(x)).magnitudes),
                                                           coughscreen::testing::NaiveMagnitudes(x));
    EXPECT_LT(err, 1e-9) << "n = " << n;
  }
}

TEST(ReflectPad, MirrorsWithoutEdgeRepeat) {
  const std::vector<float> x = {1, 2, 3, 4};
  const auto p = ReflectPad(x, 2);
  EXPECT_EQ(p, (std::vector<double>{3, 2, 1, 2, 3, 4, 3, 2}));
  const auto q = ReflectPad(x, 5);
  EXPECT_EQ(q, (std::vector<double>{2, 3, 4, 3, 2, 1, 2, 3, 4, 3, 2, 1, 2, 3}));
}

TEST(MelFilterbank, MatchesExplicitTriangles) {
  const Grid ref = coughscreen::testing::NaiveMelFilters();
  EXPECT_LT(coughscreen::testing::RelativeError(ToGrid(MelFilterbank()), ref), 1e-12);
}

TEST(MelScale, SlaneyBreakpoints) {
  EXPECT_DOUBLE_EQ(HzToMel(1000.0), 15.0);
  EXPECT_DOUBLE_EQ(HzToMel(200.0), 3.0);
  EXPECT_NEAR(MelToHz(HzToMel(5000.0)), 5000.0, 1e-9);
  EXPECT_NEAR(HzToMel(6400.0), 42.0, 1e-12);
}

TEST(MelSpectrogram, ZeroAndWhiteNoise) {
  auto zero = MelSpectrogram(Stft(Clip(std::vector<float>(4096, 0.0f))));
  EXPECT_EQ(zero.cols(), 128u);
  for (double v : zero.data()) ASSERT_EQ(v, 0.0);

  std::mt19937_64 rng(4);
  auto mel = MelSpectrogram(Stft(Clip(WhiteNoise(rng, 44100, 0.5))));
  for (std::size_t t = 0; t < mel.rows(); ++t) {
    for (double v : mel.row(t)) ASSERT_GT(v, 0.0);
  }
}

TEST(MelSpectrogram, ToneLandsInNearestCenterBand) {
  // Independent center table from the explicit filter construction.
  const Grid filters = coughscreen::testing::NaiveMelFilters();
  std::vector<double> centers;
  for (const auto& f : filters) centers.push_back(ArgMax(f) * 44100.0 / 2048);
  const auto mel = MelSpectrogram(Stft(Clip(Sine(1000.0, 44100, 44100))));
  const auto mid = mel.rows() / 2;
  const std::size_t got = ArgMax(mel.row(mid));
  const auto lib_centers = MelCenterFrequencies();
  std::size_t nearest = 0;
  for (std::size_t m = 1; m < lib_centers.size(); ++m) {
    if (std::abs(lib_centers[m] - 1000.0) < std::abs(lib_centers[nearest] - 1000.0)) nearest = m;
  }
  EXPECT_EQ(got, nearest);
  EXPECT_LE(std::abs(centers[got] - 1000.0), 2 * 44100.0 / 2048);
}

TEST(Mfcc, ConstantFrame) {
  Matrix mel(2, 128, 3.5);
  auto m = Mfcc(mel);
  ASSERT_EQ(m.cols(), 64u);
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_NEAR(m(t, 0), std::log(3.5 + 1e-10) * std::sqrt(128.0), 1e-9);
    for (std::size_t q = 1; q < 64; ++q) EXPECT_NEAR(m(t, q), 0.0, 1e-9);
  }
}

TEST(Mfcc, RejectsWrongWidth) {
  try {
    Mfcc(Matrix(1, 64, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
  }
}

TEST(Chroma, ToneClassesAndOctaveInvariance) {
  for (double hz : {440.0, 880.0}) {
    auto c = Chroma(Stft(Clip(Sine(hz, 44100, 44100))));
    for (std::size_t t = 1; t + 1 < c.rows(); ++t) ASSERT_EQ(ArgMax(c.row(t)), 9u) << hz;
  }
  EXPECT_EQ(PitchClass(440.0), 9);
  EXPECT_EQ(PitchClass(261.63), 0);
  EXPECT_EQ(PitchClass(0.0), -1);
}

TEST(Chroma, SilenceStaysZeroAndRangeIsUnit) {
  auto c = Chroma(Stft(Clip(std::vector<float>(8000, 0.0f))));
  for (double v : c.data()) ASSERT_EQ(v, 0.0);
  std::mt19937_64 rng(5);
  auto n = Chroma(Stft(Clip(WhiteNoise(rng, 8000, 0.5))));
  for (std::size_t t = 0; t < n.rows(); ++t) {
    EXPECT_DOUBLE_EQ(*std::max_element(n.row(t).begin(), n.row(t).end()), 1.0);
    for (double v : n.row(t)) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
  }
}

TEST(ZeroCrossingRate, Examples) {
  std::vector<float> alt(44100);
  for (std::size_t i = 0; i < alt.size(); ++i) alt[i] = i % 2 ? -1.0f : 1.0f;
  EXPECT_NEAR(ZeroCrossingRate(Clip(alt)), 1.0, 1.0 / 2048);
  EXPECT_EQ(ZeroCrossingRate(Clip(std::vector<float>(5000, 0.3f))), 0.0);
  EXPECT_NEAR(ZeroCrossingRate(Clip(Sine(441.0, 44100, 44100))), 0.02, 0.001);
}

TEST(ZeroCrossingRate, EmptyClipIsAnError) {
  try {
    ZeroCrossingRate(Clip({}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyAudio);
  }
}

TEST(Handcrafted, LayoutAndScalars) {
  std::mt19937_64 rng(6);
  AudioClip clip = Clip(WhiteNoise(rng, 22050, 0.4));
  auto v = ComputeHandcrafted(clip, Gender::kFemale);
  EXPECT_EQ(v.values.size(), 207u);
  EXPECT_DOUBLE_EQ(v.duration(), 0.5);
  EXPECT_EQ(v.gender(), 1.0);
  EXPECT_EQ(ComputeHandcrafted(clip, Gender::kMale).gender(), 0.0);
  EXPECT_EQ(ComputeHandcrafted(clip, Gender::kOther).gender(), 0.5);
  EXPECT_TRUE(v.zcr() >= 0.0 && v.zcr() <= 1.0);
  for (double m : v.mel()) EXPECT_GE(m, 0.0);

  // Blocks are frame means of the per-frame matrices.
  const auto spec = Stft(clip);
  const Matrix mel = MelSpectrogram(spec);
  const Matrix mfcc = Mfcc(mel);
  for (std::size_t q : {0u, 17u, 63u}) {
    double acc = 0.0;
    for (std::size_t t = 0; t < mfcc.rows(); ++t) acc += mfcc(t, q);
    EXPECT_NEAR(v.mfcc()[q], acc / mfcc.rows(), 1e-9);
  }
  EXPECT_EQ(v.values[kZcrIndex], ZeroCrossingRate(clip));
}

TEST(Handcrafted, GenderTokens) {
  EXPECT_EQ(ParseGender("female"), Gender::kFemale);
  EXPECT_EQ(ParseGender("male"), Gender::kMale);
  EXPECT_EQ(ParseGender("other"), Gender::kOther);
  EXPECT_EQ(ParseGender(""), Gender::kOther);
}

TEST(Handcrafted, TimeShiftRobustness) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 3; ++trial) {
    auto x = WhiteNoise(rng, 44100, 0.5);
    std::vector<float> shifted(512, 0.0f);
    shifted.insert(shifted.end(), x.begin(), x.end());
    auto a = ComputeHandcrafted(Clip(x), Gender::kMale);
    auto b = ComputeHandcrafted(Clip(shifted), Gender::kMale);
    auto rel = [](std::span<const double> p, std::span<const double> q) {
      double d = 0, n = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        d += (p[i] - q[i]) * (p[i] - q[i]);
        n += p[i] * p[i];
      }
      return std::sqrt(d / n);
    };
    EXPECT_LT(rel(a.mfcc(), b.mfcc()), 0.05);
    EXPECT_LT(rel(a.mel(), b.mel()), 0.05);
  }
}

}  // namespace
}  // namespace coughscreen::dsp
