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

#pragma once

// Small synthetic corpora laid out like a genre-per-directory dataset, plus
// a byte-level directory comparison for determinism checks.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "percepta/core/rng.hpp"
#include "percepta/dataset/spectrogram_io.hpp"
#include "percepta/pipeline/experiment.hpp"
#include "percepta/pipeline/prepare.hpp"

namespace testing_support {

namespace fs = std::filesystem;

struct CorpusSpec {
  std::vector<std::string> genres{"blues", "classical", "jazz", "metal"};
  std::size_t per_genre = 8;
  std::size_t bands = 32;
  std::size_t min_frames = 40;
  std::size_t max_frames = 56;
  std::uint64_t seed = 5;
};

/// Each genre gets its own spectral envelope and temporal modulation;
/// songs add noise and a few trailing silent frames.
inline void write_corpus(const fs::path& root, const CorpusSpec& spec) {
  percepta::Rng rng(spec.seed);
  for (std::size_t g = 0; g < spec.genres.size(); ++g) {
    fs::create_directories(root / spec.genres[g]);
    const double center = (static_cast<double>(g) + 0.5) / static_cast<double>(spec.genres.size());
    const double tempo = 0.15 + 0.1 * static_cast<double>(g);
    for (std::size_t s = 0; s < spec.per_genre; ++s) {
      const std::size_t frames = spec.min_frames + rng.below(spec.max_frames - spec.min_frames + 1);
      const std::size_t silent = rng.below(4);
      percepta::Matrix m(spec.bands, frames);
      const double phase = rng.uniform(0, 6.28);
      for (std::size_t b = 0; b < spec.bands; ++b) {
        const double f = static_cast<double>(b) / static_cast<double>(spec.bands);
        const double envelope = 8.0 * std::exp(-std::pow((f - center) / 0.18, 2));
        for (std::size_t t = 0; t + silent < frames; ++t) {
          const double beat = 0.5 + 0.5 * std::sin(tempo * static_cast<double>(t) + phase);
          m(b, t) = envelope * beat + 2.0 * rng.uniform();
        }
      }
      char name[64];
      std::snprintf(name, sizeof name, "%s.%05zu.spc", spec.genres[g].c_str(), s);
      percepta::save_spectrogram(m, (root / spec.genres[g] / name).string());
    }
  }
}

/// Writes a corpus and a prepared manifest; returns the manifest path.
inline std::string prepared_corpus(const fs::path& dir, const CorpusSpec& spec = {}) {
  fs::remove_all(dir);
  write_corpus(dir / "corpus", spec);
  percepta::PrepareOptions o;
  o.root = (dir / "corpus").string();
  o.seed = spec.seed;
  o.split_mode = percepta::SplitMode::kProportional;
  const auto m = percepta::prepare_dataset(o);
  const auto path = (dir / "manifest.json").string();
  percepta::write_json_file(percepta::to_json(m), path);
  return path;
}

/// Settings small enough for CI: 16x16 patches, two encoder levels, a few
/// training steps.
inline percepta::ExperimentConfig ci_config(const std::string& manifest) {
  percepta::ExperimentConfig c;
  c.manifest = manifest;
  c.seed = 11;
  c.k_max = 10;
  c.autoencoder.patch_size = 16;
  c.autoencoder.channel_widths = {4, 8};
  c.autoencoder.latent_channels = 4;
  c.autoencoder.steps = 12;
  c.autoencoder.batch = 4;
  c.logreg.max_iterations = 300;
  return c;
}

inline std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    out[fs::relative(e.path(), root).string()] =
        std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  return out;
}

}  // namespace testing_support
