// Copyright 2026 The TRIQA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "triqa/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "triqa/distortion.hpp"
#include "triqa/errors.hpp"
#include "triqa/fingerprint.hpp"

namespace triqa {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  const std::string t = trim(value);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ConfigError("setting " + key + ": invalid number '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string t = trim(value);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("setting " + key + ": expected a boolean, got '" + value + "'");
}

template <typename T>
std::vector<T> parse_numbers(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number<T>(key, item));
  if (out.empty()) throw ConfigError("setting " + key + " must not be empty");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += fmt(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

struct Setting {
  std::string key;
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

#define TRIQA_PATH(KEY, FIELD)                                                              \
  Setting {                                                                                  \
    KEY, [](PipelineConfig& c, const std::string&, const std::string& v) { c.FIELD = trim(v); }, \
        [](const PipelineConfig& c) { return c.FIELD.generic_string(); }                    \
  }
#define TRIQA_NUM(KEY, FIELD, TYPE)                                                        \
  Setting {                                                                                 \
    KEY,                                                                                    \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {                 \
          c.FIELD = parse_number<TYPE>(k, v);                                               \
        },                                                                                  \
        [](const PipelineConfig& c) {                                                       \
          if constexpr (std::is_floating_point_v<TYPE>) return fmt(c.FIELD);                \
          else return std::to_string(c.FIELD);                                              \
        }                                                                                   \
  }
#define TRIQA_BOOL(KEY, FIELD)                                                              \
  Setting {                                                                                  \
    KEY,                                                                                     \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {                  \
          c.FIELD = parse_bool(k, v);                                                        \
        },                                                                                   \
        [](const PipelineConfig& c) { return std::string(c.FIELD ? "true" : "false"); }     \
  }

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = {
      TRIQA_PATH("paths.corpus", corpus),
      TRIQA_PATH("paths.work", work),
      TRIQA_PATH("paths.dataset", dataset),
      TRIQA_PATH("paths.images", images),
      TRIQA_PATH("paths.fr_table", fr_table),
      TRIQA_PATH("paths.fr_images", fr_images),
      TRIQA_PATH("paths.content_weights", content_weights),
      TRIQA_NUM("run.seed", seed, uint64_t),
      Setting{"forge.grouping_version",
              [](PipelineConfig& c, const std::string&, const std::string& v) {
                c.grouping_version = trim(v);
              },
              [](const PipelineConfig& c) { return c.grouping_version; }},
      TRIQA_BOOL("forge.include_combined", manifest.include_combined),
      Setting{"forge.positive_levels",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                c.manifest.positive_levels = parse_numbers<int>(k, v);
              },
              [](const PipelineConfig& c) { return join(c.manifest.positive_levels); }},
      Setting{"forge.added_levels",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                c.manifest.added_levels = parse_numbers<int>(k, v);
              },
              [](const PipelineConfig& c) { return join(c.manifest.added_levels); }},
      Setting{"train.preset",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                try {
                  c.encoder.preset = parse_preset(trim(v));
                } catch (const Error& e) {
                  throw ConfigError("setting " + k + ": " + e.what());
                }
              },
              [](const PipelineConfig& c) { return std::string(to_string(c.encoder.preset)); }},
      TRIQA_NUM("train.embedding_dim", encoder.embedding_dim, int),
      TRIQA_NUM("train.margin", encoder.margin, double),
      TRIQA_NUM("train.learning_rate", encoder.learning_rate, double),
      TRIQA_NUM("train.beta1", encoder.beta1, double),
      TRIQA_NUM("train.beta2", encoder.beta2, double),
      TRIQA_NUM("train.adam_eps", encoder.adam_eps, double),
      Setting{"train.schedule",
              [](PipelineConfig& c, const std::string&, const std::string& v) {
                c.encoder.schedule = trim(v);
              },
              [](const PipelineConfig& c) { return c.encoder.schedule; }},
      TRIQA_NUM("train.crop_size", encoder.crop_size, int),
      TRIQA_NUM("train.epochs", encoder.epochs, int),
      TRIQA_NUM("train.batch_size", encoder.batch_size, int),
      TRIQA_NUM("train.max_steps", encoder.max_steps, int64_t),
      TRIQA_NUM("train.validation_fraction", encoder.validation_fraction, double),
      TRIQA_NUM("train.max_validation_triplets", encoder.max_validation_triplets, int),
      TRIQA_BOOL("train.keep_best", encoder.keep_best),
      Setting{"features.scales",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                try {
                  c.scales = parse_scales(trim(v));
                } catch (const Error& e) {
                  throw ConfigError("setting " + k + ": " + e.what());
                }
              },
              [](const PipelineConfig& c) { return std::string(to_string(c.scales)); }},
      TRIQA_NUM("features.content_seed", content_seed, uint64_t),
      Setting{"head.c_grid",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                c.grid.c = parse_numbers<double>(k, v);
              },
              [](const PipelineConfig& c) { return join(c.grid.c); }},
      Setting{"head.epsilon_grid",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                c.grid.epsilon = parse_numbers<double>(k, v);
              },
              [](const PipelineConfig& c) { return join(c.grid.epsilon); }},
      TRIQA_NUM("head.folds", grid.folds, int),
      TRIQA_NUM("eval.iterations", protocol.iterations, int),
      TRIQA_NUM("eval.train_fraction", protocol.train_fraction, double),
      TRIQA_BOOL("eval.large", protocol.large),
      TRIQA_BOOL("eval.logistic_fit", protocol.logistic_fit),
      Setting{"eval.dataset_name",
              [](PipelineConfig& c, const std::string&, const std::string& v) {
                c.dataset_name = trim(v);
              },
              [](const PipelineConfig& c) { return c.dataset_name; }},
      Setting{"eval.formats",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                c.formats.clear();
                try {
                  for (const auto& f : split_list(v)) c.formats.push_back(parse_report_format(f));
                } catch (const Error& e) {
                  throw ConfigError("setting " + k + ": " + e.what());
                }
                if (c.formats.empty()) throw ConfigError("setting " + k + " must not be empty");
              },
              [](const PipelineConfig& c) {
                std::string out;
                for (size_t i = 0; i < c.formats.size(); ++i) {
                  out += (i ? "," : "") + std::string(to_string(c.formats[i]));
                }
                return out;
              }},
  };
  return table;
}

#undef TRIQA_PATH
#undef TRIQA_NUM
#undef TRIQA_BOOL

}  // namespace

void PipelineConfig::set(const std::string& key, const std::string& value) {
  for (const auto& s : settings()) {
    if (s.key == key) {
      s.set(*this, key, value);
      return;
    }
  }
  throw ConfigError("unknown setting '" + key + "'");
}

void PipelineConfig::finalize() {
  encoder.seed = seed;
  protocol.seed = seed;
  encoder.validate();
  grid.validate();
  try {
    protocol.validate();
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  }
  grouping_for_version(grouping_version);
  if (work.empty()) throw ConfigError("paths.work must be set");
}

std::string PipelineConfig::to_text() const {
  std::ostringstream out;
  std::string section;
  for (const auto& s : settings()) {
    const auto dot = s.key.find('.');
    const std::string sec = s.key.substr(0, dot);
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << s.key.substr(dot + 1) << " = " << s.get(*this) << '\n';
  }
  return out.str();
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(path.string() + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body) base.set(section + "." + key, value.data());
  }
  return base;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kForge:
      return "forge";
    case Stage::kTrain:
      return "train";
    case Stage::kExtract:
      return "extract";
    case Stage::kFitHead:
      return "fit-head";
    case Stage::kEval:
      return "eval";
    case Stage::kEvalFr:
      return "eval-fr";
    case Stage::kAblation:
      return "ablation";
  }
  return "unknown";
}

Stage parse_stage(std::string_view name) {
  for (const auto s : {Stage::kForge, Stage::kTrain, Stage::kExtract, Stage::kFitHead,
                       Stage::kEval, Stage::kEvalFr, Stage::kAblation}) {
    if (to_string(s) == name) return s;
  }
  throw UsageError("unknown stage '" + std::string(name) + "'");
}

std::set<Stage> parse_stages(std::string_view list, const PipelineConfig& config) {
  std::set<Stage> out;
  for (const auto& item : split_list(std::string(list))) {
    if (item == "all") {
      out.insert({Stage::kForge, Stage::kTrain, Stage::kExtract, Stage::kFitHead, Stage::kEval});
      if (!config.fr_table.empty()) out.insert(Stage::kEvalFr);
    } else {
      out.insert(parse_stage(item));
    }
  }
  if (out.empty()) throw UsageError("no stages requested");
  return out;
}

PipelinePaths::PipelinePaths(const std::filesystem::path& work)
    : manifest(work / "manifest.jsonl"),
      manifest_without(work / "manifest_without_combined.jsonl"),
      checkpoint(work / "quality.ckpt"),
      checkpoint_without(work / "quality_without_combined.ckpt"),
      train_log(work / "train_log.csv"),
      features(work / "features.bin"),
      model(work / "model.json"),
      report_stem(work / "report"),
      fr_report_stem(work / "fr_report"),
      ablation_stem(work / "ablation"),
      summary(work / "pipeline.json") {}

std::vector<std::pair<std::string, std::filesystem::path>> list_corpus(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("corpus directory " + dir.string() + " does not exist");
  }
  static const std::set<std::string> kExt = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"};
  std::vector<std::pair<std::string, std::filesystem::path>> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (kExt.contains(ext)) out.emplace_back(entry.path().stem().string(), entry.path());
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  if (out.empty()) throw DataError("corpus directory " + dir.string() + " has no images");
  for (size_t i = 1; i < out.size(); ++i) {
    if (out[i].first == out[i - 1].first) {
      throw DataError("corpus has two images with id '" + out[i].first + "'");
    }
  }
  return out;
}

ChainRenderer load_corpus(
    const std::vector<std::pair<std::string, std::filesystem::path>>& items) {
  ChainRenderer corpus;
  for (const auto& [id, path] : items) {
    ImageBuffer img = read_image(path);
    require_min_size(img, kMinRenderSide, path.string().c_str());
    corpus.add_image(id, std::move(img));
  }
  return corpus;
}

ContentEncoder make_content_encoder(const PipelineConfig& config) {
  if (!config.content_weights.empty()) {
    return ContentEncoder::from_weights(config.encoder.preset, config.content_weights);
  }
  return ContentEncoder(config.encoder.preset, config.content_seed);
}

void check_checkpoint_matches(const Checkpoint& ckpt, const Manifest& manifest,
                              const std::filesystem::path& ckpt_path) {
  if (ckpt.manifest_fingerprint != manifest_fingerprint(manifest)) {
    throw DataError("checkpoint " + ckpt_path.string() +
                    " was trained on a different manifest (fingerprint mismatch)");
  }
}

namespace {

void require(const std::filesystem::path& p, Stage producer) {
  if (!std::filesystem::exists(p)) {
    throw DataError("missing upstream artifact " + p.string() + "; run the '" +
                    std::string(to_string(producer)) + "' stage first");
  }
}

Manifest read_checked_manifest(const std::filesystem::path& path, const PipelineConfig& config,
                               const std::vector<std::string>& ids, bool include_combined) {
  require(path, Stage::kForge);
  Manifest m = read_manifest(path);
  const auto& h = m.header;
  if (h.master_seed != config.seed || h.grouping_version != config.grouping_version ||
      h.options.include_combined != include_combined ||
      h.options.positive_levels != config.manifest.positive_levels ||
      h.options.added_levels != config.manifest.added_levels || h.image_ids != ids) {
    throw DataError("manifest " + path.string() +
                    " does not match the configuration; rerun the 'forge' stage");
  }
  return m;
}

DatasetTable load_table(const PipelineConfig& config) {
  if (config.dataset.empty()) throw ConfigError("paths.dataset is required for this stage");
  return read_dataset(config.dataset, config.images, config.dataset_name);
}

FeatureMatrix read_checked_features(const std::filesystem::path& path, const Checkpoint& ckpt,
                                    const DatasetTable& table, const PipelineConfig& config) {
  require(path, Stage::kExtract);
  FeatureMatrix f = read_features(path);
  if (f.checkpoint_fingerprint != ckpt.fingerprint() || f.seed != config.seed ||
      f.scales != config.scales) {
    throw DataError("features " + path.string() +
                    " do not match the checkpoint or configuration; rerun 'extract'");
  }
  if (f.images != table.names()) {
    throw DataError("features " + path.string() + " were extracted for a different table");
  }
  return f;
}

std::string ext_for(ReportFormat f) {
  switch (f) {
    case ReportFormat::kJson:
      return ".json";
    case ReportFormat::kCsv:
      return ".csv";
    case ReportFormat::kTableText:
      return ".txt";
    case ReportFormat::kPlots:
      return "_plots";
  }
  return ".json";
}

void write_train_log(const TrainResult& r, const std::filesystem::path& path, uint64_t seed) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# seed=" << seed << "\nstep,loss\n";
  for (size_t i = 0; i < r.step_losses.size(); ++i) out << i + 1 << ',' << fmt(r.step_losses[i]) << '\n';
}

Checkpoint train_stage(const PipelineConfig& config, const Manifest& manifest,
                       ChainRenderer& corpus, const std::filesystem::path& ckpt_path,
                       const std::filesystem::path& log_path) {
  spdlog::info("train: {} triplets, batch {}, {} epoch(s), preset {}", manifest.entries.size(),
               config.encoder.batch_size, config.encoder.epochs, to_string(config.encoder.preset));
  TrainResult r = train(manifest, corpus, config.encoder, nullptr, [](const TrainProgress& p) {
    spdlog::info("train: step {}/{} lr {:.3e} loss {:.4f}", p.step, p.total_steps,
                 p.learning_rate, p.train_loss);
  });
  save_checkpoint(r.checkpoint, ckpt_path);
  write_train_log(r, log_path, config.seed);
  spdlog::info("train: wrote {}", ckpt_path.string());
  return std::move(r.checkpoint);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const std::set<Stage>& stages) {
  PipelineResult result;
  const PipelinePaths paths(config.work);
  std::error_code ec;
  std::filesystem::create_directories(config.work, ec);
  if (ec) throw DataError("cannot create work directory " + config.work.string());
  const bool ablation = stages.contains(Stage::kAblation);
  const DistortionGrouping& grouping = grouping_for_version(config.grouping_version);

  std::vector<std::pair<std::string, std::filesystem::path>> items;
  std::vector<std::string> ids;
  auto need_corpus = [&] {
    if (!items.empty()) return;
    if (config.corpus.empty()) throw ConfigError("paths.corpus is required for this stage");
    items = list_corpus(config.corpus);
    for (const auto& [id, p] : items) ids.push_back(id);
  };
  std::vector<std::filesystem::path> written;

  if (stages.contains(Stage::kForge)) {
    need_corpus();
    Manifest m = build_manifest(ids, grouping, config.seed, config.manifest);
    write_manifest(m, paths.manifest);
    written.push_back(paths.manifest);
    spdlog::info("forge: {} images -> {} triplets ({} single, {} combined)", ids.size(),
                 m.entries.size(), m.header.counts.single, m.header.counts.combined);
    if (ablation) {
      ManifestOptions without = config.manifest;
      without.include_combined = false;
      Manifest mw = build_manifest(ids, grouping, config.seed, without);
      write_manifest(mw, paths.manifest_without);
      written.push_back(paths.manifest_without);
    }
    result.executed.push_back(Stage::kForge);
  }

  if (stages.contains(Stage::kTrain)) {
    need_corpus();
    const Manifest m =
        read_checked_manifest(paths.manifest, config, ids, config.manifest.include_combined);
    ChainRenderer corpus = load_corpus(items);
    train_stage(config, m, corpus, paths.checkpoint, paths.train_log);
    written.push_back(paths.checkpoint);
    written.push_back(paths.train_log);
    if (ablation) {
      const Manifest mw = read_checked_manifest(paths.manifest_without, config, ids, false);
      const auto log = config.work / "train_log_without_combined.csv";
      train_stage(config, mw, corpus, paths.checkpoint_without, log);
      written.push_back(paths.checkpoint_without);
      written.push_back(log);
    }
    result.executed.push_back(Stage::kTrain);
  }

  // Loads and verifies the main checkpoint against the manifest on disk.
  std::optional<Checkpoint> ckpt;
  auto need_ckpt = [&] {
    if (ckpt) return;
    need_corpus();
    const Manifest m =
        read_checked_manifest(paths.manifest, config, ids, config.manifest.include_combined);
    require(paths.checkpoint, Stage::kTrain);
    ckpt = load_checkpoint(paths.checkpoint);
    check_checkpoint_matches(*ckpt, m, paths.checkpoint);
  };

  if (stages.contains(Stage::kExtract)) {
    need_ckpt();
    const DatasetTable table = load_table(config);
    const ContentEncoder content = make_content_encoder(config);
    FeatureMatrix f =
        extract_feature_matrix(table.paths(), table.names(), *ckpt, content, config.scales);
    f.seed = config.seed;
    write_features(f, paths.features);
    written.push_back(paths.features);
    written.push_back(paths.features.string() + ".json");
    spdlog::info("extract: {} images x {} features", f.values.rows(), f.values.cols());
    result.executed.push_back(Stage::kExtract);
  }

  if (stages.contains(Stage::kFitHead)) {
    need_ckpt();
    const DatasetTable table = load_table(config);
    const FeatureMatrix f = read_checked_features(paths.features, *ckpt, table, config);
    RegressionModel model = fit(f.values, table.mos(), config.grid);
    model.source = f.source();
    model.seed = config.seed;
    save_model(model, paths.model);
    written.push_back(paths.model);
    spdlog::info("fit-head: C {} epsilon {} (CV MAE {:.4f})", model.c, model.epsilon,
                 model.cv_mae);
    result.executed.push_back(Stage::kFitHead);
  }

  auto emit_all = [&](const EvalReport& r, const std::filesystem::path& stem) {
    for (const auto f : config.formats) {
      const std::filesystem::path out = stem.string() + ext_for(f);
      emit_report(r, f, out);
      if (f != ReportFormat::kPlots) written.push_back(out);
    }
  };

  if (stages.contains(Stage::kEval)) {
    need_ckpt();
    const DatasetTable table = load_table(config);
    const FeatureMatrix f = read_checked_features(paths.features, *ckpt, table, config);
    EvalReport report;
    report.kind = "nr";
    report.protocol = config.protocol;
    report.checkpoint_fingerprint = ckpt->fingerprint();
    report.content_fingerprint = f.content_fingerprint;
    report.features_fingerprint = f.fingerprint();
    report.datasets.push_back(
        evaluate_features(f, table.mos(), table.name, config.protocol, config.grid));
    emit_all(report, paths.report_stem);
    spdlog::info("eval: {} median SRCC {:.4f} PLCC {:.4f}", table.name,
                 report.datasets[0].median_srcc(), report.datasets[0].median_plcc());
    result.report = std::move(report);
    result.executed.push_back(Stage::kEval);
  }

  if (stages.contains(Stage::kEvalFr)) {
    need_ckpt();
    if (config.fr_table.empty()) throw ConfigError("paths.fr_table is required for eval-fr");
    const DatasetTable table = read_dataset(config.fr_table, config.fr_images);
    EvalReport report =
        evaluate_fr_report({table}, *ckpt, {config.scales, config.protocol.logistic_fit});
    emit_all(report, paths.fr_report_stem);
    result.fr_report = std::move(report);
    result.executed.push_back(Stage::kEvalFr);
  }

  if (ablation) {
    need_ckpt();
    const Manifest mw = read_checked_manifest(paths.manifest_without, config, ids, false);
    require(paths.checkpoint_without, Stage::kTrain);
    const Checkpoint without = load_checkpoint(paths.checkpoint_without);
    check_checkpoint_matches(without, mw, paths.checkpoint_without);
    const DatasetTable table = load_table(config);
    const ContentEncoder content = make_content_encoder(config);
    AblationReport a = run_ablation(table, *ckpt, without, content, config.protocol,
                                    config.grid, config.scales);
    for (const auto f : config.formats) {
      const std::filesystem::path out = paths.ablation_stem.string() + ext_for(f);
      emit_ablation(a, f, out);
      if (f != ReportFormat::kPlots) written.push_back(out);
    }
    result.ablation = std::move(a);
    result.executed.push_back(Stage::kAblation);
  }

  nlohmann::json artifacts = nlohmann::json::object();
  for (const auto& p : written) {
    const std::string name = p.lexically_relative(config.work).generic_string();
    result.fingerprints[name] = sha256_file(p);
    artifacts[name] = result.fingerprints[name];
  }
  std::vector<std::string> executed;
  for (const auto s : result.executed) executed.emplace_back(to_string(s));
  const nlohmann::json summary{{"format", "triqa-pipeline"},
                               {"seed", config.seed},
                               {"stages", executed},
                               {"config", config.to_text()},
                               {"artifacts", artifacts}};
  std::ofstream out(paths.summary);
  if (!out) throw DataError("cannot write " + paths.summary.string());
  out << summary.dump(2) << '\n';
  return result;
}

}  // namespace triqa
