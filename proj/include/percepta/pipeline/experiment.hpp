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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percepta/autoencoder/autoencoder.hpp"
#include "percepta/classifier/logreg.hpp"
#include "percepta/core/error.hpp"
#include "percepta/core/hash.hpp"
#include "percepta/core/rng.hpp"
#include "percepta/dataset/manifest.hpp"
#include "percepta/metrics/metric.hpp"
#include "percepta/pairwise/distance_matrix.hpp"

namespace percepta {

/// Everything a run depends on. The output directory and thread count are
/// deliberately absent: neither may change the results.
struct ExperimentConfig {
  std::string manifest;
  std::uint64_t seed = 0;
  std::vector<MetricKind> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  MetricConfig metric_config;
  AlignmentPolicy alignment = AlignmentPolicy::kTruncateLeft;
  bool trim_padding = true;
  std::size_t k_min = 1;
  std::size_t k_max = 30;
  std::size_t subsample_per_genre = 0;  // 0 keeps every song
  AEConfig autoencoder;                 // loss, seed and metrics are filled per run
  std::vector<double> l2_grid{1e-4, 1e-3, 1e-2};
  LogRegConfig logreg;

  void validate() const {
    if (manifest.empty()) throw ConfigError("config: manifest path is required");
    if (metrics.empty()) throw ConfigError("config: metric set is empty");
    if (k_min == 0 || k_min > k_max) throw ConfigError("config: invalid k range");
    if (l2_grid.empty()) throw ConfigError("config: l2 grid is empty");
    for (double l2 : l2_grid)
      if (!(l2 >= 0)) throw ConfigError("config: l2 values must be non-negative");
    metric_config.validate();
    ae_config(MetricKind::kMse).validate();
  }

  /// Autoencoder settings for one loss. All three losses share the init and
  /// noise stream so only the loss differs between them.
  AEConfig ae_config(MetricKind loss) const {
    AEConfig c = autoencoder;
    c.loss = loss;
    c.seed = derive_seed(seed, "autoencoder");
    c.metrics = metric_config;
    return c;
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  std::vector<std::string> metrics;
  for (MetricKind k : c.metrics) metrics.emplace_back(metric_token(k));
  nlohmann::json ae = to_json(c.autoencoder);
  for (const char* derived : {"loss", "seed", "metrics"}) ae.erase(derived);
  return {{"manifest", c.manifest},
          {"seed", c.seed},
          {"metrics", metrics},
          {"metric_config", to_json(c.metric_config)},
          {"alignment", std::string(policy_token(c.alignment))},
          {"trim_padding", c.trim_padding},
          {"knn", {{"k_min", c.k_min}, {"k_max", c.k_max}}},
          {"subsample_per_genre", c.subsample_per_genre},
          {"autoencoder", ae},
          {"logreg",
           {{"l2_grid", c.l2_grid},
            {"step", c.logreg.step},
            {"tolerance", c.logreg.tolerance},
            {"max_iterations", c.logreg.max_iterations}}}};
}

/// Accepts a plain config or a config echo (which nests it under "config").
/// Absent keys keep their defaults.
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& in) {
  const nlohmann::json& j = in.contains("config") && in.at("config").is_object() ? in.at("config") : in;
  ExperimentConfig c;
  try {
    c.manifest = j.value("manifest", c.manifest);
    c.seed = j.value("seed", c.seed);
    if (j.contains("metrics")) {
      c.metrics.clear();
      for (const auto& t : j.at("metrics")) c.metrics.push_back(parse_metric(t.get<std::string>()));
    }
    if (j.contains("metric_config")) c.metric_config = metric_config_from_json(j.at("metric_config"));
    if (j.contains("alignment")) c.alignment = parse_policy(j.at("alignment").get<std::string>());
    c.trim_padding = j.value("trim_padding", c.trim_padding);
    if (j.contains("knn")) {
      c.k_min = j.at("knn").value("k_min", c.k_min);
      c.k_max = j.at("knn").value("k_max", c.k_max);
    }
    c.subsample_per_genre = j.value("subsample_per_genre", c.subsample_per_genre);
    if (j.contains("autoencoder")) c.autoencoder = ae_config_from_json(j.at("autoencoder"));
    if (j.contains("logreg")) {
      const auto& l = j.at("logreg");
      c.l2_grid = l.value("l2_grid", c.l2_grid);
      c.logreg.step = l.value("step", c.logreg.step);
      c.logreg.tolerance = l.value("tolerance", c.logreg.tolerance);
      c.logreg.max_iterations = l.value("max_iterations", c.logreg.max_iterations);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(read_json_file(path));
}

/// Hash over the config (minus the manifest path) and the manifest content.
inline std::uint32_t experiment_hash(const ExperimentConfig& c, const DatasetManifest& m) {
  nlohmann::json j = to_json(c);
  j.erase("manifest");
  return fnv1a32(j.dump() + "\n" + to_json(m).dump());
}

/// Keeps `per_genre` songs of each genre, chosen by a seeded shuffle.
inline DatasetManifest subsample_manifest(const DatasetManifest& m, std::size_t per_genre, std::uint64_t seed) {
  if (per_genre == 0) return m;
  std::map<Label, std::vector<std::string>> by_genre;
  for (const auto& e : m.entries) by_genre[e.genre].push_back(e.id);
  std::set<std::string> keep;
  for (auto& [genre, ids] : by_genre) {
    Rng rng(derive_seed(seed, "subsample/" + genre));
    rng.shuffle(ids);
    ids.resize(std::min(ids.size(), per_genre));
    keep.insert(ids.begin(), ids.end());
  }
  DatasetManifest out = m;
  out.entries.clear();
  out.splits.clear();
  for (const auto& e : m.entries) {
    if (!keep.count(e.id)) continue;
    out.entries.push_back(e);
    if (auto it = m.splits.find(e.id); it != m.splits.end()) out.splits[e.id] = it->second;
  }
  return out;
}

struct RunOptions {
  std::string out_dir;
  std::size_t threads = 1;
  std::function<void(const std::string&)> log;

  void say(const std::string& msg) const {
    if (log) log(msg);
  }
};

/// Exclusive claim on an output directory, released on destruction.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir) : path_(dir / ".percepta.lock") {
    std::filesystem::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
      throw ConfigError("output directory '" + dir.string() + "' is locked by another run (remove " +
                        path_.string() + " if that run is dead)");
    }
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Writes through a temporary name so an interrupted run never leaves a
/// truncated artifact under the final name.
template <typename Writer>
void commit_file(const std::filesystem::path& path, Writer&& write) {
  const auto tmp = path.string() + ".tmp";
  write(tmp);
  std::filesystem::rename(tmp, path);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

inline nlohmann::json config_echo(const ExperimentConfig& c, const DatasetManifest& m, std::uint32_t hash,
                                  const std::string& experiment) {
  nlohmann::json derived{{"autoencoder_seed", c.ae_config(MetricKind::kMse).seed},
                         {"songs", m.entries.size()}};
  if (experiment == "exp2") {
    derived["architecture"] = c.autoencoder.architecture();
    derived["quant_levels"] = c.autoencoder.quant_levels;
    derived["latent_size"] = c.autoencoder.latent_size();
  }
  return {{"experiment", experiment}, {"config_hash", format_hash(hash)}, {"config", to_json(c)}, {"derived", derived}};
}

/// Refuses to write into a bundle produced by a different config.
inline void claim_bundle(const std::filesystem::path& dir, const nlohmann::json& echo) {
  const auto path = dir / "config_echo.json";
  if (std::filesystem::exists(path)) {
    const auto existing = read_json_file(path.string());
    if (existing.value("config_hash", std::string()) != echo.at("config_hash").get<std::string>()) {
      throw ConfigError("'" + dir.string() + "' holds artifacts from config " +
                        existing.value("config_hash", std::string("<none>")) + ", this run is " +
                        echo.at("config_hash").get<std::string>() + "; refusing to mix them");
    }
  }
  std::filesystem::create_directories(dir);
  commit_file(path, [&](const std::string& p) { write_text(p, echo.dump(2) + "\n"); });
}

/// Loads the manifest and checks it can drive an experiment.
inline DatasetManifest experiment_manifest(const ExperimentConfig& c) {
  if (!std::filesystem::exists(c.manifest)) throw ConfigError("manifest '" + c.manifest + "' does not exist");
  DatasetManifest m = subsample_manifest(load_manifest(c.manifest), c.subsample_per_genre, c.seed);
  std::vector<std::string> missing;
  if (m.entries.empty()) missing.emplace_back("manifest entries");
  if (!m.value_range) missing.emplace_back("value_range (run prepare)");
  for (const auto& e : m.entries) {
    if (!m.splits.count(e.id)) {
      missing.emplace_back("split assignment for '" + e.id + "'");
      break;
    }
  }
  for (const auto& e : m.entries) {
    if (!std::filesystem::exists(e.path)) {
      missing.emplace_back("spectrogram file '" + e.path + "'");
      break;
    }
  }
  if (!missing.empty()) {
    std::string msg = "experiment inputs missing:";
    for (const auto& s : missing) msg += " " + s + ";";
    throw ConfigError(msg);
  }
  return m;
}

inline std::vector<Label> manifest_class_order(const DatasetManifest& m) {
  std::set<Label> s;
  for (const auto& e : m.entries) s.insert(e.genre);
  return {s.begin(), s.end()};
}

/// One row of the summary table.
struct TableRow {
  std::string experiment;
  std::string metric;  // display label
  std::string selected;  // selected hyperparameter, e.g. "k=7" or "l2=0.001"
  double valid_f1 = 0.0;
  double test_f1 = 0.0;
};

inline std::string table_csv(const std::vector<TableRow>& rows, std::uint32_t hash) {
  std::string s = std::string(kHashLinePrefix) + format_hash(hash) + "\n";
  s += "experiment,metric,selected,valid_weighted_f1,test_weighted_f1\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.3f,%.3f\n", r.valid_f1, r.test_f1);
    s += r.experiment + "," + r.metric + "," + r.selected + buf;
  }
  return s;
}

}  // namespace percepta
