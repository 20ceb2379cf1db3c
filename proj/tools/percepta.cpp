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

// percepta command-line tool.
//
// Exit codes: 0 success, 1 input or configuration error, 2 numerical failure.
// Errors are reported on stderr as one JSON object per line.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "percepta/autoencoder/features.hpp"
#include "percepta/autoencoder/params_io.hpp"
#include "percepta/classifier/features_io.hpp"
#include "percepta/classifier/logreg_experiment.hpp"
#include "percepta/knn/knn.hpp"
#include "percepta/pairwise/summary.hpp"
#include "percepta/pipeline/prepare.hpp"
#include "percepta/pipeline/runs.hpp"

namespace fs = std::filesystem;
using namespace percepta;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::string out = ".";

  std::size_t thread_count() const { return threads == 0 ? default_thread_count() : threads; }
};

void log_line(const std::string& msg) { std::cerr << msg << std::endl; }

ExperimentConfig experiment_config(const Globals& g) {
  ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : load_experiment_config(g.config);
  if (g.seed) c.seed = *g.seed;
  return c;
}

/// Parses "a..b" (or a single integer) into an inclusive range.
std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto k = std::stoul(s);
      return {k, k};
    }
    return {std::stoul(s.substr(0, dots)), std::stoul(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ConfigError("malformed range '" + s + "' (expected e.g. 1..30)");
  }
}

std::string nine_decimals(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

Matrix load_input(const std::string& path, const std::optional<ValueRange>& range) {
  Matrix m = load_spectrogram_matrix(path);
  if (range) m = normalize(Spectrogram{"", "", std::move(m)}, range->lo, range->hi).data;
  return m;
}

void make_parent(const std::string& file) {
  const fs::path p(file);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

/// report.json -> report<suffix>
std::string beside(const std::string& file, const std::string& suffix) {
  return fs::path(file).replace_extension("").string() + suffix;
}

int report_error(const Error& e) {
  nlohmann::json j{{"error", to_string(e.kind())}, {"message", e.message()}};
  if (const auto* t = dynamic_cast<const TrainingError*>(&e)) j["step"] = t->step();
  if (const auto* f = dynamic_cast<const FormatError*>(&e)) j["offset"] = f->offset();
  std::cerr << j.dump() << std::endl;
  return e.kind() == ErrorKind::kNumerical ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perceptual spectrogram metrics and genre-classification experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Experiment config JSON (a config echo also works)");
  app.add_option("--seed", g.seed, "Master seed; overrides the config");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");
  app.add_option("--out", g.out, "Output directory");

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Scan a corpus, record the value range and assign splits");
  PrepareOptions po;
  std::string split_mode = "auto", manifest_out;
  prepare->add_option("--root", po.root, "Corpus root with one directory per genre")->required();
  prepare->add_option("--exclude", po.exclusions, "File listing ids to exclude");
  prepare->add_option("--out", manifest_out, "Manifest to write (default <global --out>/manifest.json)");
  prepare->add_option("--split-counts", split_mode, "auto, canonical or proportional")
      ->check(CLI::IsMember({"auto", "canonical", "proportional"}));

  // distance
  auto* dist = app.add_subcommand("distance", "Distance between two spectrograms");
  std::string metric_name, policy_name = "truncate-left", manifest_path, path_a, path_b;
  dist->add_option("--metric", metric_name, "mse, msssim or nlpd")->required();
  dist->add_option("--a", path_a, "First spectrogram (.spc, .csv or .wav)")->required();
  dist->add_option("--b", path_b, "Second spectrogram")->required();
  dist->add_option("--policy", policy_name, "truncate-left or center-crop");
  dist->add_option("--manifest", manifest_path, "Normalize with this manifest's value range");

  // pairwise
  auto* pairwise = app.add_subcommand("pairwise", "Pairwise distance matrix over a prepared manifest");
  bool no_trim = false;
  std::string dmat_out, violin_out;
  pairwise->add_option("--manifest", manifest_path, "Prepared manifest")->required();
  pairwise->add_option("--metric", metric_name, "mse, msssim or nlpd")->required();
  pairwise->add_option("--out", dmat_out, "Distance matrix to write (.dmat)")->required();
  pairwise->add_option("--violin", violin_out, "Violin summary CSV");
  pairwise->add_option("--policy", policy_name, "truncate-left or center-crop");
  pairwise->add_flag("--no-trim", no_trim, "Keep leading/trailing padding frames");

  // knn
  auto* knn = app.add_subcommand("knn", "k selection on validation and test evaluation");
  std::string matrix_path, krange = "1..30", knn_report, knn_curve;
  knn->add_option("--dmat", matrix_path, "Distance matrix (.dmat)")->required();
  knn->add_option("--splits", manifest_path, "Manifest holding genres and splits")->required();
  knn->add_option("--krange", krange, "Inclusive k range, e.g. 1..30");
  knn->add_option("--out", knn_report, "Report JSON; the confusion CSV lands beside it")->required();
  knn->add_option("--curve", knn_curve, "Validation F1 per k (CSV)");

  // train-ae
  auto* train = app.add_subcommand("train-ae", "Train an autoencoder on uniform noise");
  std::string loss_name, params_out, curve_out;
  std::optional<std::size_t> steps;
  train->add_option("--loss", loss_name, "mse, msssim or nlpd")->required();
  train->add_option("--steps", steps, "Training steps");
  train->add_option("--out", params_out, "Params file (.aep)")->required();
  train->add_option("--curve", curve_out, "Loss curve CSV");

  // extract
  auto* extract = app.add_subcommand("extract", "Quantized latent features for every song");
  std::string params_in, features_out;
  extract->add_option("--params", params_in, "Trained params (.aep)")->required();
  extract->add_option("--manifest", manifest_path, "Prepared manifest")->required();
  extract->add_option("--out", features_out, "features.csv")->required();

  // logreg
  auto* logreg = app.add_subcommand("logreg", "Logistic regression on extracted features");
  std::string features_in, report_out;
  std::vector<double> l2_grid;
  logreg->add_option("--features", features_in, "features.csv")->required();
  logreg->add_option("--splits", manifest_path, "Manifest holding split assignments")->required();
  logreg->add_option("--out", report_out, "Report JSON")->required();
  logreg->add_option("--l2", l2_grid, "Candidate l2 values (default 1e-4 1e-3 1e-2)");

  auto* exp1 = app.add_subcommand("exp1", "KNN on pairwise distances for every metric");
  auto* exp2 = app.add_subcommand("exp2", "Logistic regression on autoencoder latents for every loss");
  for (auto* e : {exp1, exp2}) e->add_option("--manifest", manifest_path, "Overrides the config's manifest");
  auto* report = app.add_subcommand("report", "Consolidated table from exp1/exp2 bundles under --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const std::size_t threads = g.thread_count();
    if (*prepare) {
      po.split_mode = parse_split_mode(split_mode);
      po.seed = g.seed.value_or(0);
      po.threads = threads;
      const auto m = prepare_dataset(po);
      for (const auto& w : m.warnings) log_line("warning: " + w);
      const fs::path path = manifest_out.empty() ? fs::path(g.out) / "manifest.json" : fs::path(manifest_out);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      write_json_file(to_json(m), path.string());
      std::cout << "manifest: " << path.string() << "\nsongs: " << m.entries.size() << " (excluded " << m.excluded.size()
                << ")\n";
      const auto splits = m.splits;
      for (const auto& [genre, n] : m.genre_totals()) {
        std::size_t c[3] = {0, 0, 0};
        for (const auto& e : m.entries)
          if (e.genre == genre) ++c[static_cast<int>(splits.at(e.id))];
        std::cout << genre << ": " << n << " (train " << c[0] << ", valid " << c[1] << ", test " << c[2] << ")\n";
      }
      std::cout << "matches canonical 930-song split: " << (matches_canonical_totals(m) ? "yes" : "no") << "\n";
    } else if (*dist) {
      std::optional<ValueRange> range;
      if (!manifest_path.empty()) {
        range = load_manifest(manifest_path).value_range;
        if (!range) throw ConfigError("manifest has no value_range");
      }
      const auto cfg = experiment_config(g).metric_config;
      const Spectrogram a{path_a, "", load_input(path_a, range)};
      const Spectrogram b{path_b, "", load_input(path_b, range)};
      std::cout << nine_decimals(pair_distance(a, b, parse_metric(metric_name), parse_policy(policy_name), cfg))
                << "\n";
    } else if (*pairwise) {
      const auto cfg = experiment_config(g);
      const auto m = load_manifest(manifest_path);
      const MetricKind kind = parse_metric(metric_name);
      const auto specs = load_prepared(m, !no_trim, threads);
      auto dm = compute_pairwise(specs, kind, parse_policy(policy_name), cfg.metric_config, threads);
      dm.config_hash = fnv1a32(to_json(cfg.metric_config).dump());
      make_parent(dmat_out);
      save_matrix(dm, dmat_out);
      if (!violin_out.empty()) {
        make_parent(violin_out);
        write_violin_csv(distribution_summary(dm, m.genre_of()), violin_out, dm.config_hash);
      }
      std::cout << dmat_out << " (" << dm.size() << " songs)\n";
    } else if (*knn) {
      const auto dm = load_matrix(matrix_path);
      const auto m = load_manifest(manifest_path);
      const auto [k_min, k_max] = parse_range(krange);
      const auto sel = select_k(dm, m.splits, m.genre_of(), k_min, k_max);
      const auto res = knn_evaluate(dm, m.splits, m.genre_of(), sel.k, manifest_class_order(m));
      const std::string token(metric_token(dm.metric));
      make_parent(knn_report);
      if (!knn_curve.empty()) {
        std::string curve = std::string(kHashLinePrefix) + format_hash(dm.config_hash) + "\nk,valid_weighted_f1\n";
        for (const auto& [k, f1] : sel.curve) curve += std::to_string(k) + "," + format_double(f1) + "\n";
        make_parent(knn_curve);
        write_text(knn_curve, curve);
      }
      write_json_file({{"config_hash", format_hash(dm.config_hash)},
                       {"metric", token},
                       {"selected", {{"k", sel.k}}},
                       {"valid_weighted_f1", sel.best_f1},
                       {"test", to_json(res.report)}},
                      knn_report);
      write_confusion_csv(res.report, beside(knn_report, "_confusion.csv"), dm.config_hash);
      std::cout << "k=" << sel.k << " valid_f1=" << nine_decimals(sel.best_f1)
                << " test_f1=" << nine_decimals(res.report.weighted_f1) << "\n";
    } else if (*train) {
      const auto cfg = experiment_config(g);
      AEConfig ac = cfg.ae_config(parse_metric(loss_name));
      if (g.seed) ac.seed = *g.seed;
      if (steps) ac.steps = *steps;
      const std::size_t every = std::max<std::size_t>(1, ac.steps / 10);
      const auto r = ae_train(ac, threads, [&](std::size_t s, double loss) {
        if ((s + 1) % every == 0) log_line("step " + std::to_string(s + 1) + " loss " + format_double(loss));
      });
      make_parent(params_out);
      save_params(r.params, params_out);
      if (!curve_out.empty()) {
        std::string csv = std::string(kHashLinePrefix) + format_hash(ae_config_hash(ac)) + "\nstep,loss\n";
        for (std::size_t s = 0; s < r.loss_curve.size(); ++s)
          csv += std::to_string(s) + "," + format_double(r.loss_curve[s]) + "\n";
        make_parent(curve_out);
        write_text(curve_out, csv);
      }
      std::cout << params_out << " (final loss " << nine_decimals(r.loss_curve.back()) << ")\n";
    } else if (*extract) {
      const auto params = load_params(params_in);
      const auto m = load_manifest(manifest_path);
      const auto specs = load_prepared(m, false, threads);
      FeatureTable t{{}, {}, Matrix(specs.size(), params.config.latent_size())};
      parallel_for(specs.size(), threads, [&](std::size_t i) {
        const auto f = extract_features(params, specs[i], 1);
        std::copy(f.begin(), f.end(), t.values.row(i).begin());
      });
      for (const auto& s : specs) {
        t.ids.push_back(s.id);
        t.genres.push_back(s.genre);
      }
      make_parent(features_out);
      write_features_csv(t, features_out, ae_config_hash(params.config));
      std::cout << features_out << " (" << t.ids.size() << " songs x " << t.values.cols() << " features)\n";
    } else if (*logreg) {
      const auto f = read_features_csv(features_in);
      const auto m = load_manifest(manifest_path);
      auto cfg = experiment_config(g);
      if (!l2_grid.empty()) cfg.l2_grid = l2_grid;
      const auto r = run_logreg(f.table, m.splits, cfg.l2_grid, cfg.logreg, manifest_class_order(m));
      nlohmann::json j{{"selected", {{"l2", r.l2}}}, {"test", to_json(r.report)}};
      if (f.config_hash) j["config_hash"] = format_hash(*f.config_hash);
      for (const auto& [l2, f1] : r.curve) j["l2_curve"].push_back({{"l2", l2}, {"valid_weighted_f1", f1}});
      make_parent(report_out);
      write_json_file(j, report_out);
      write_confusion_csv(r.report, beside(report_out, "_confusion.csv"), f.config_hash);
      std::cout << "l2=" << format_double(r.l2) << " test_f1=" << nine_decimals(r.report.weighted_f1) << "\n";
    } else if (*exp1 || *exp2) {
      auto cfg = experiment_config(g);
      if (!manifest_path.empty()) cfg.manifest = manifest_path;
      const RunOptions opt{g.out, threads, log_line};
      const auto b = *exp1 ? run_experiment_1(cfg, opt) : run_experiment_2(cfg, opt);
      std::cout << table_csv(b.rows, b.config_hash);
    } else if (*report) {
      std::cout << build_report(g.out);
    }
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(ConfigError(e.what()));
  } catch (const nlohmann::json::exception& e) {
    return report_error(FormatError(e.what()));
  }
  return 0;
}
