// Copyright 2026 The Percepta Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "percepta/dataset/manifest.hpp"
#include "percepta/dataset/mel.hpp"
#include "percepta/dataset/spectrogram_io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using percepta::Matrix;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("percepta_ds_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

Matrix float_valued(std::size_t r, std::size_t c, std::uint64_t seed) {
  Matrix m = testing_support::random_matrix(r, c, seed, -80, 5);
  for (double& v : m.values()) v = static_cast<float>(v);
  return m;
}

TEST(SpecFormat, HeaderAndRoundTrip) {
  TempDir dir;
  const Matrix m = float_valued(128, 640, 1);
  percepta::save_spectrogram(m, dir / "a.spc");
  EXPECT_EQ(fs::file_size(dir / "a.spc"), 12u + 128u * 640u * 4u);
  const Matrix back = percepta::load_spec_binary(dir / "a.spc");
  EXPECT_EQ(back.rows(), 128u);
  EXPECT_EQ(back.cols(), 640u);
  EXPECT_EQ(back, m);
}

TEST(SpecFormat, RoundTripProperty) {
  TempDir dir;
  percepta::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = float_valued(1 + rng.below(20), 1 + rng.below(30), 100 + trial);
    percepta::save_spectrogram(m, dir / "p.spc");
    EXPECT_EQ(percepta::load_spec_binary(dir / "p.spc"), m);
  }
}

TEST(SpecFormat, TruncatedPayloadIsFormatError) {
  TempDir dir;
  percepta::save_spectrogram(float_valued(4, 4, 2), dir / "t.spc");
  fs::resize_file(dir / "t.spc", 12 + 4 * 4 * 4 - 3);
  try {
    percepta::load_spec_binary(dir / "t.spc");
    FAIL();
  } catch (const percepta::FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
}

TEST(SpecFormat, BadMagicAndNonFinite) {
  TempDir dir;
  write_text(dir / "bad.spc", "XXXX\x01\0\0\0\x01\0\0\0\0\0\0\0");
  EXPECT_THROW(percepta::load_spec_binary(dir / "bad.spc"), percepta::FormatError);

  percepta::io::ByteWriter w;
  w.bytes("SPC1");
  w.u32(1);
  w.u32(2);
  w.f32(1.0f);
  w.f32(std::nanf(""));
  w.write_file(dir / "nan.spc");
  EXPECT_THROW(percepta::load_spec_binary(dir / "nan.spc"), percepta::DataError);
}

TEST(CsvFormat, ParsesRows) {
  EXPECT_EQ(percepta::parse_spectrogram_csv("0,1\n1,0\n"), (Matrix{{0, 1}, {1, 0}}));
  EXPECT_EQ(percepta::parse_spectrogram_csv("0.5, -2\r\n3,4"), (Matrix{{0.5, -2}, {3, 4}}));
}

TEST(CsvFormat, Errors) {
  EXPECT_THROW(percepta::parse_spectrogram_csv("1,2\n3\n"), percepta::FormatError);
  EXPECT_THROW(percepta::parse_spectrogram_csv("1,x\n"), percepta::FormatError);
  EXPECT_THROW(percepta::parse_spectrogram_csv("1,nan\n"), percepta::DataError);
  EXPECT_THROW(percepta::parse_spectrogram_csv(""), percepta::FormatError);
}

TEST(CsvFormat, SaveLoadExact) {
  TempDir dir;
  const Matrix m = testing_support::random_matrix(5, 7, 3, -10, 10);
  percepta::save_spectrogram_csv(m, dir / "m.csv");
  EXPECT_EQ(percepta::load_spectrogram_csv(dir / "m.csv"), m);
}

TEST(TrimPadding, RemovesEdgeFramesOnly) {
  percepta::Spectrogram s{"x", "blues", Matrix{{0, 1, 2, 0}, {0, 3, 4, 0}}};
  EXPECT_EQ(percepta::trim_padding(s).data, (Matrix{{1, 2}, {3, 4}}));
  percepta::Spectrogram interior{"y", "blues", Matrix{{1, 0, 2}, {3, 0, 4}}};
  EXPECT_EQ(percepta::trim_padding(interior).data, interior.data);
}

TEST(TrimPadding, IdempotentAndSilentIsError) {
  percepta::Spectrogram s{"x", "blues", Matrix{{0, 0, 1, 0, 5, 0}, {0, 0, 0, 0, 0, 0}}};
  const auto once = percepta::trim_padding(s);
  EXPECT_EQ(percepta::trim_padding(once).data, once.data);
  const auto& d = once.data;
  for (std::size_t c : {std::size_t{0}, d.cols() - 1}) {
    double peak = 0;
    for (std::size_t r = 0; r < d.rows(); ++r) peak = std::max(peak, std::abs(d(r, c)));
    EXPECT_GT(peak, percepta::kPaddingEpsilon);
  }
  EXPECT_THROW(percepta::trim_padding({"z", "blues", Matrix(3, 4)}), percepta::DegenerateInputError);
}

TEST(Normalize, AffineAndClamp) {
  percepta::Spectrogram s{"x", "blues", Matrix{{-80, -40, 0, -100, 10}}};
  const auto n = percepta::normalize(s, -80, 0);
  EXPECT_EQ(n.data, (Matrix{{0, 0.5, 1, 0, 1}}));
  EXPECT_EQ(percepta::normalize(n, 0, 1).data, n.data);
  EXPECT_THROW(percepta::normalize(s, 1, 1), percepta::ConfigError);
}

// Direct DFT and filterbank on one frame, independent of the FFT path.
std::vector<double> direct_mel_frame(const std::vector<double>& wave, std::size_t start,
                                     const percepta::MelParams& p) {
  const std::size_t n = p.n_fft;
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / n);
      const double x = start + i < wave.size() ? wave[start + i] : 0.0;
      acc += w * x * std::polar(1.0, -2 * std::numbers::pi * double(k) * double(i) / double(n));
    }
    mag[k] = std::abs(acc);
  }
  auto mel = [](double f) { return 2595 * std::log10(1 + f / 700); };
  auto hz = [](double m) { return 700 * (std::pow(10, m / 2595) - 1); };
  std::vector<double> out(p.n_mels);
  const double top = mel(p.sample_rate / 2);
  for (std::size_t m = 0; m < p.n_mels; ++m) {
    const double l = hz(top * m / (p.n_mels + 1));
    const double c = hz(top * (m + 1) / (p.n_mels + 1));
    const double r = hz(top * (m + 2) / (p.n_mels + 1));
    double e = 0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
      const double f = k * p.sample_rate / n;
      double w = 0;
      if (f > l && f <= c) w = (f - l) / (c - l);
      if (f > c && f < r) w = (r - f) / (r - c);
      e += w * mag[k];
    }
    out[m] = std::log1p(e / p.eps_log);
  }
  return out;
}

TEST(Mel, SilenceIsZero) {
  const std::vector<double> silence(22050, 0.0);
  const Matrix m = percepta::compute_mel(silence);
  EXPECT_EQ(m.rows(), 128u);
  for (double v : m.values()) EXPECT_EQ(v, 0.0);
}

TEST(Mel, ShapeArithmetic) {
  const std::vector<double> one_window(2048, 0.1);
  EXPECT_EQ(percepta::compute_mel(one_window).cols(), 4u);
  const std::vector<double> longer(5000, 0.1);
  EXPECT_EQ(percepta::compute_mel(longer).cols(), 10u);
  EXPECT_THROW(percepta::compute_mel(std::vector<double>{}), percepta::InputError);
}

TEST(Mel, SineAtBandCenterPeaksInThatBand) {
  percepta::MelParams p;
  const auto centers = percepta::mel_band_centers(p);
  const std::size_t band = 60;
  std::vector<double> wave(8192);
  for (std::size_t i = 0; i < wave.size(); ++i) {
    wave[i] = 0.5 * std::sin(2 * std::numbers::pi * centers[band] * i / p.sample_rate);
  }
  const Matrix m = percepta::compute_mel(wave, p);
  for (std::size_t t = 0; t < m.cols(); ++t) {
    std::size_t arg = 0;
    for (std::size_t r = 1; r < m.rows(); ++r)
      if (m(r, t) > m(arg, t)) arg = r;
    EXPECT_EQ(arg, band) << "frame " << t;
  }
  const auto direct = direct_mel_frame(wave, 2 * p.hop, p);
  for (std::size_t r = 0; r < m.rows(); ++r) EXPECT_NEAR(m(r, 2), direct[r], 1e-6 * std::max(1.0, direct[r]));
}

TEST(Wav, RoundTripThroughMel) {
  TempDir dir;
  percepta::Waveform w{22050, std::vector<double>(4096)};
  for (std::size_t i = 0; i < w.samples.size(); ++i) w.samples[i] = 0.3 * std::sin(0.05 * i);
  percepta::write_wav16(dir / "a.wav", w);
  const auto back = percepta::read_wav(dir / "a.wav");
  ASSERT_EQ(back.samples.size(), w.samples.size());
  EXPECT_EQ(back.sample_rate, 22050u);
  for (std::size_t i = 0; i < w.samples.size(); ++i) EXPECT_NEAR(back.samples[i], w.samples[i], 1.0 / 32767);
  EXPECT_EQ(percepta::load_spectrogram_matrix(dir / "a.wav").cols(), 8u);
  w.sample_rate = 44100;
  percepta::write_wav16(dir / "b.wav", w);
  EXPECT_THROW(percepta::load_spectrogram_matrix(dir / "b.wav"), percepta::DataError);
}

void make_corpus(const TempDir& dir, const std::map<std::string, int>& per_genre) {
  for (const auto& [genre, n] : per_genre) {
    fs::create_directories(dir.path() / "corpus" / genre);
    for (int i = 0; i < n; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s.%05d.csv", genre.c_str(), i);
      write_text((dir.path() / "corpus" / genre / name).string(), "0,1\n1," + std::to_string(i) + "\n");
    }
  }
}

TEST(Manifest, ExclusionIsSetDifference) {
  TempDir dir;
  make_corpus(dir, {{"blues", 2}, {"jazz", 1}});
  write_text(dir / "excl.txt", "# header\njazz.00000\n\nrock.00099  # absent\n");
  const auto m = percepta::build_manifest(dir / "corpus", dir / "excl.txt");
  ASSERT_EQ(m.entries.size(), 2u);
  EXPECT_EQ(m.entries[0].id, "blues.00000");
  EXPECT_EQ(m.entries[1].id, "blues.00001");
  EXPECT_EQ(m.excluded, std::set<std::string>{"jazz.00000"});
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("rock.00099"), std::string::npos);
}

TEST(Manifest, Errors) {
  TempDir dir;
  EXPECT_THROW(percepta::build_manifest(dir / "missing", std::set<std::string>{}), percepta::ConfigError);
  fs::create_directories(dir.path() / "corpus" / "polka");
  try {
    percepta::build_manifest(dir / "corpus", std::set<std::string>{});
    FAIL();
  } catch (const percepta::IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("polka"), std::string::npos);
  }
}

TEST(Manifest, JsonRoundTripAndValueRange) {
  TempDir dir;
  make_corpus(dir, {{"blues", 3}, {"rock", 2}});
  auto m = percepta::build_manifest(dir / "corpus", std::set<std::string>{});
  m.value_range = percepta::compute_value_range(m);
  EXPECT_EQ(m.value_range->lo, 0.0);
  EXPECT_EQ(m.value_range->hi, 2.0);
  m.splits = percepta::assign_splits(m, {{"blues", {3, 0, 0}}, {"rock", {1, 1, 0}}}, 1);
  const auto back = percepta::manifest_from_json(percepta::to_json(m));
  EXPECT_EQ(back.entries, m.entries);
  EXPECT_EQ(back.splits, m.splits);
  EXPECT_EQ(back.value_range->hi, 2.0);
}

TEST(Splits, CanonicalCountsAreExact) {
  percepta::DatasetManifest m;
  for (const auto& [genre, c] : percepta::canonical_split_counts()) {
    for (std::size_t i = 0; i < c.total(); ++i) m.entries.push_back({genre + "." + std::to_string(i), genre, ""});
  }
  EXPECT_EQ(m.entries.size(), 930u);
  EXPECT_TRUE(percepta::matches_canonical_totals(m));
  const auto s = percepta::assign_splits(m, percepta::canonical_split_counts(), 42);
  EXPECT_EQ(s.size(), 930u);
  std::map<std::string, percepta::SplitCounts> got;
  for (const auto& e : m.entries) {
    auto& c = got[e.genre];
    switch (s.at(e.id)) {
      case percepta::Split::kTrain: ++c.train; break;
      case percepta::Split::kValid: ++c.valid; break;
      case percepta::Split::kTest: ++c.test; break;
    }
  }
  EXPECT_EQ(got, percepta::canonical_split_counts());
  EXPECT_EQ(got.at("blues"), (percepta::SplitCounts{46, 23, 31}));
}

TEST(Splits, SeededAndDegenerate) {
  percepta::DatasetManifest m;
  for (int i = 0; i < 40; ++i) m.entries.push_back({"pop." + std::to_string(i), "pop", ""});
  const auto a = percepta::assign_splits(m, {{"pop", {20, 10, 10}}}, 7);
  EXPECT_EQ(a, percepta::assign_splits(m, {{"pop", {20, 10, 10}}}, 7));
  EXPECT_NE(a, percepta::assign_splits(m, {{"pop", {20, 10, 10}}}, 8));
  for (const auto& [id, split] : percepta::assign_splits(m, {{"pop", {40, 0, 0}}}, 1)) {
    EXPECT_EQ(split, percepta::Split::kTrain);
  }
  EXPECT_THROW(percepta::assign_splits(m, {{"pop", {20, 10, 9}}}, 1), percepta::ConfigError);
}

TEST(Splits, ProportionalCountsSumToTotals) {
  const auto c = percepta::proportional_counts({{"blues", 100}, {"pop", 7}, {"jazz", 1}});
  EXPECT_EQ(c.at("blues").total(), 100u);
  EXPECT_EQ(c.at("pop").total(), 7u);
  EXPECT_EQ(c.at("jazz").total(), 1u);
}

}  // namespace
