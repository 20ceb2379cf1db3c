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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "percepta/autoencoder/features.hpp"
#include "percepta/autoencoder/params_io.hpp"
#include "percepta/classifier/eval.hpp"
#include "percepta/classifier/features_io.hpp"
#include "percepta/classifier/logreg_experiment.hpp"
#include "percepta/knn/knn.hpp"
#include "percepta/pairwise/summary.hpp"
#include "percepta/pipeline/experiment.hpp"

namespace percepta {

namespace fs = std::filesystem;

struct Bundle {
  fs::path dir;
  std::uint32_t config_hash = 0;
  std::vector<TableRow> rows;
};

namespace detail {

/// Metrics in fixed table order, restricted to the configured set.
inline std::vector<MetricKind> ordered_metrics(const ExperimentConfig& c) {
  std::vector<MetricKind> out;
  for (MetricKind k : kAllMetrics)
    if (std::find(c.metrics.begin(), c.metrics.end(), k) != c.metrics.end()) out.push_back(k);
  return out;
}

inline nlohmann::json predictions_json(const std::vector<std::string>& ids, const std::vector<Label>& predicted,
                                       const std::map<std::string, Label>& genre_of) {
  nlohmann::json a = nlohmann::json::array();
  for (std::size_t i = 0; i < ids.size(); ++i)
    a.push_back({{"id", ids[i]}, {"true", genre_of.at(ids[i])}, {"predicted", predicted[i]}});
  return a;
}

inline std::string curve_csv(const std::string& header, const std::vector<std::pair<double, double>>& rows,
                             std::uint32_t hash) {
  std::string s = std::string(kHashLinePrefix) + format_hash(hash) + "\n" + header + "\n";
  for (const auto& [x, y] : rows) s += format_double(x) + "," + format_double(y) + "\n";
  return s;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  commit_file(path, [&](const std::string& p) { write_text(p, j.dump(2) + "\n"); });
}

inline std::string elapsed(std::chrono::steady_clock::time_point t0) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1fs",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return buf;
}

}  // namespace detail

/// KNN on pairwise distances: per metric a distance matrix, violin data,
/// k-selection curve, test report and confusion matrix.
inline Bundle run_experiment_1(const ExperimentConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  const DatasetManifest m = experiment_manifest(cfg);
  const std::uint32_t hash = experiment_hash(cfg, m);
  const fs::path root(opt.out_dir);
  DirectoryLock lock(root);
  Bundle b{root / "exp1", hash, {}};
  claim_bundle(b.dir, config_echo(cfg, m, hash, "exp1"));
  const auto genre_of = m.genre_of();
  const auto class_order = manifest_class_order(m);

  opt.say("exp1: loading " + std::to_string(m.entries.size()) + " spectrograms");
  const auto specs = load_prepared(m, cfg.trim_padding, opt.threads);

  for (MetricKind kind : detail::ordered_metrics(cfg)) {
    const std::string token(metric_token(kind));
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path dmat = b.dir / (token + ".dmat");
    DistanceMatrix dm;
    if (fs::exists(dmat)) {
      dm = load_matrix(dmat.string());
      std::vector<std::string> ids;
      for (const auto& s : specs) ids.push_back(s.id);
      if (dm.config_hash != hash || dm.metric != kind || dm.ids != ids) {
        throw ConfigError("'" + dmat.string() + "' was produced by a different config; refusing to reuse it");
      }
      opt.say("exp1: reusing " + dmat.string());
    } else {
      opt.say("exp1: computing " + std::string(metric_label(kind)) + " distances");
      dm = compute_pairwise(specs, kind, cfg.alignment, cfg.metric_config, opt.threads);
      dm.config_hash = hash;
      commit_file(dmat, [&](const std::string& p) { save_matrix(dm, p); });
    }

    const auto summary = distribution_summary(dm, genre_of);
    commit_file(b.dir / (token + "_violin.csv"), [&](const std::string& p) { write_violin_csv(summary, p, hash); });

    std::size_t train_count = 0;
    for (const auto& [id, s] : m.splits) train_count += s == Split::kTrain;
    const auto sel = select_k(dm, m.splits, genre_of, cfg.k_min, std::min(cfg.k_max, train_count));
    std::vector<std::pair<double, double>> curve;
    for (const auto& [k, f1] : sel.curve) curve.emplace_back(static_cast<double>(k), f1);
    commit_file(b.dir / (token + "_kcurve.csv"), [&](const std::string& p) {
      write_text(p, detail::curve_csv("k,valid_weighted_f1", curve, hash));
    });

    const auto res = knn_evaluate(dm, m.splits, genre_of, sel.k, class_order);
    nlohmann::json spread = nlohmann::json::object();
    nlohmann::json mean_spread = nullptr;
    try {
      for (const auto& [g, stats] : summary)
        if (g != kAllGroup) spread[g] = spread_ratio(summary, g);
      mean_spread = mean_spread_ratio(summary);
    } catch (const DegenerateInputError&) {
      spread = nullptr;
    }
    detail::write_json(b.dir / (token + "_report.json"),
                       {{"config_hash", format_hash(hash)},
                        {"experiment", "exp1"},
                        {"metric", token},
                        {"label", metric_label(kind)},
                        {"selected", {{"k", sel.k}}},
                        {"valid_weighted_f1", sel.best_f1},
                        {"test", to_json(res.report)},
                        {"spread_ratio", spread},
                        {"mean_spread_ratio", mean_spread},
                        {"predictions", detail::predictions_json(res.ids, res.predicted, genre_of)}});
    commit_file(b.dir / (token + "_confusion.csv"),
                [&](const std::string& p) { write_confusion_csv(res.report, p, hash); });
    b.rows.push_back({"knn_pairwise", std::string(metric_label(kind)), "k=" + std::to_string(sel.k), sel.best_f1,
                      res.report.weighted_f1});
    opt.say("exp1: " + std::string(metric_label(kind)) + " k=" + std::to_string(sel.k) + " test F1 " +
            format_double(res.report.weighted_f1) + " (" + detail::elapsed(t0) + ")");
  }
  commit_file(b.dir / "table.csv", [&](const std::string& p) { write_text(p, table_csv(b.rows, hash)); });
  return b;
}

/// Latent features from noise-trained autoencoders, classified by logistic
/// regression: per loss the params, training curve, features, test report
/// and confusion matrix.
inline Bundle run_experiment_2(const ExperimentConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  const DatasetManifest m = experiment_manifest(cfg);
  const std::uint32_t hash = experiment_hash(cfg, m);
  const fs::path root(opt.out_dir);
  DirectoryLock lock(root);
  Bundle b{root / "exp2", hash, {}};
  claim_bundle(b.dir, config_echo(cfg, m, hash, "exp2"));
  const auto genre_of = m.genre_of();
  const auto class_order = manifest_class_order(m);

  opt.say("exp2: loading " + std::to_string(m.entries.size()) + " spectrograms");
  const auto specs = load_prepared(m, false, opt.threads);

  for (MetricKind kind : detail::ordered_metrics(cfg)) {
    const std::string token(metric_token(kind));
    const auto t0 = std::chrono::steady_clock::now();
    const AEConfig aec = cfg.ae_config(kind);
    const fs::path aep = b.dir / (token + ".aep");
    const fs::path curve_path = b.dir / (token + "_curve.csv");
    if (fs::exists(aep) && fs::exists(curve_path)) {
      if (ae_config_hash(load_params(aep.string()).config) != ae_config_hash(aec)) {
        throw ConfigError("'" + aep.string() + "' was trained with a different config; refusing to reuse it");
      }
      opt.say("exp2: reusing " + aep.string());
    } else {
      opt.say("exp2: training " + std::string(metric_label(kind)) + " autoencoder for " + std::to_string(aec.steps) +
              " steps");
      const std::size_t every = std::max<std::size_t>(1, aec.steps / 10);
      const auto trained = ae_train(aec, opt.threads, [&](std::size_t step, double loss) {
        if ((step + 1) % every == 0) {
          opt.say("exp2:   step " + std::to_string(step + 1) + " loss " + format_double(loss));
        }
      });
      commit_file(aep, [&](const std::string& p) { save_params(trained.params, p); });
      std::vector<std::pair<double, double>> curve;
      for (std::size_t s = 0; s < trained.loss_curve.size(); ++s)
        curve.emplace_back(static_cast<double>(s), trained.loss_curve[s]);
      commit_file(curve_path, [&](const std::string& p) { write_text(p, detail::curve_csv("step,loss", curve, hash)); });
    }
    // Features always come from the params as stored on disk.
    const AEParams params = load_params(aep.string());

    FeatureTable table{{}, {}, Matrix(specs.size(), aec.latent_size())};
    parallel_for(specs.size(), opt.threads, [&](std::size_t i) {
      const auto f = extract_features(params, specs[i], 1);
      std::copy(f.begin(), f.end(), table.values.row(i).begin());
    });
    for (const auto& s : specs) {
      table.ids.push_back(s.id);
      table.genres.push_back(s.genre);
    }
    commit_file(b.dir / (token + "_features.csv"),
                [&](const std::string& p) { write_features_csv(table, p, hash); });

    const auto lr = run_logreg(table, m.splits, cfg.l2_grid, cfg.logreg, class_order);
    commit_file(b.dir / (token + "_l2curve.csv"), [&](const std::string& p) {
      write_text(p, detail::curve_csv("l2,valid_weighted_f1", lr.curve, hash));
    });
    double best_valid = 0;
    for (const auto& [l2, f1] : lr.curve)
      if (l2 == lr.l2) best_valid = f1;
    detail::write_json(b.dir / (token + "_report.json"),
                       {{"config_hash", format_hash(hash)},
                        {"experiment", "exp2"},
                        {"metric", token},
                        {"label", metric_label(kind)},
                        {"selected", {{"l2", lr.l2}}},
                        {"valid_weighted_f1", best_valid},
                        {"test", to_json(lr.report)},
                        {"latent_range", {{"lo", params.latent_range.lo}, {"hi", params.latent_range.hi}}},
                        {"quant_levels", aec.quant_levels},
                        {"architecture", aec.architecture()},
                        {"logreg_iterations", lr.model.iterations},
                        {"predictions", detail::predictions_json(lr.ids, lr.predicted, genre_of)}});
    commit_file(b.dir / (token + "_confusion.csv"),
                [&](const std::string& p) { write_confusion_csv(lr.report, p, hash); });
    b.rows.push_back({"lr_latent", std::string(metric_label(kind)), "l2=" + format_double(lr.l2), best_valid,
                      lr.report.weighted_f1});
    opt.say("exp2: " + std::string(metric_label(kind)) + " l2=" + format_double(lr.l2) + " test F1 " +
            format_double(lr.report.weighted_f1) + " (" + detail::elapsed(t0) + ")");
  }
  commit_file(b.dir / "table.csv", [&](const std::string& p) { write_text(p, table_csv(b.rows, hash)); });
  return b;
}

struct ExperimentSummary {
  std::string experiment;
  std::string config_hash;
  std::vector<nlohmann::json> reports;  // table order
};

/// Reads every report of one bundle, checking they share the echo's hash.
inline ExperimentSummary read_bundle(const fs::path& dir) {
  const auto echo_path = dir / "config_echo.json";
  if (!fs::exists(echo_path)) throw ConfigError("'" + dir.string() + "' has no config_echo.json");
  const auto echo = read_json_file(echo_path.string());
  ExperimentSummary s{echo.at("experiment").get<std::string>(), echo.at("config_hash").get<std::string>(), {}};
  for (MetricKind k : kAllMetrics) {
    const auto p = dir / (std::string(metric_token(k)) + "_report.json");
    if (!fs::exists(p)) continue;
    auto r = read_json_file(p.string());
    if (r.value("config_hash", std::string()) != s.config_hash) {
      throw ConfigError("'" + p.string() + "' has config hash " + r.value("config_hash", std::string("<none>")) +
                        " but the bundle is " + s.config_hash + "; refusing to mix artifacts");
    }
    s.reports.push_back(std::move(r));
  }
  if (s.reports.empty()) throw ConfigError("'" + dir.string() + "' contains no reports");
  return s;
}

/// Consolidated markdown report and CSV over whichever bundles exist.
inline std::string build_report(const std::string& out_dir) {
  const fs::path root(out_dir);
  std::vector<ExperimentSummary> bundles;
  for (const char* name : {"exp1", "exp2"})
    if (fs::exists(root / name)) bundles.push_back(read_bundle(root / name));
  if (bundles.empty()) throw ConfigError("'" + out_dir + "' contains neither exp1 nor exp2 bundles");

  std::string md = "# Weighted F1 on the test split\n\n| Method |";
  for (MetricKind k : kAllMetrics) md += " " + std::string(metric_label(k)) + " |";
  md += "\n|---|---|---|---|\n";
  std::string csv;
  for (const auto& b : bundles) csv += "# " + b.experiment + "_config_hash=" + b.config_hash + "\n";
  csv += "experiment,metric,selected,valid_weighted_f1,test_weighted_f1\n";
  char buf[64];
  for (const auto& b : bundles) {
    md += b.experiment == "exp1" ? "| KNN on pairwise distances |" : "| LR on latent features |";
    for (MetricKind k : kAllMetrics) {
      const auto it = std::find_if(b.reports.begin(), b.reports.end(),
                                   [&](const auto& r) { return r.at("metric") == metric_token(k); });
      if (it == b.reports.end()) {
        md += " n/a |";
        continue;
      }
      const double f1 = it->at("test").at("weighted_f1").get<double>();
      std::snprintf(buf, sizeof buf, " %.3f |", f1);
      md += buf;
      std::string selected;
      for (const auto& [key, v] : it->at("selected").items()) selected = key + "=" + v.dump();
      std::snprintf(buf, sizeof buf, ",%.3f,%.3f\n", it->at("valid_weighted_f1").get<double>(), f1);
      csv += b.experiment + "," + std::string(metric_label(k)) + "," + selected + buf;
    }
    md += "\n";
  }
  md += "\n";
  for (const auto& b : bundles) {
    md += "- " + b.experiment + ": config " + b.config_hash;
    for (const auto& r : b.reports) {
      md += "; " + r.at("label").get<std::string>();
      for (const auto& [key, v] : r.at("selected").items()) md += " " + key + "=" + v.dump();
      if (r.contains("mean_spread_ratio") && !r.at("mean_spread_ratio").is_null()) {
        std::snprintf(buf, sizeof buf, " spread=%.3f", r.at("mean_spread_ratio").get<double>());
        md += buf;
      }
    }
    md += "\n";
  }
  commit_file(root / "summary_table.csv", [&](const std::string& p) { write_text(p, csv); });
  commit_file(root / "report.md", [&](const std::string& p) { write_text(p, md); });
  return md;
}

}  // namespace percepta
