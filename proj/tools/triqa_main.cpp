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

// triqa: command-line entry point for the whole pipeline.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "triqa/dataset.hpp"
#include "triqa/distortion.hpp"
#include "triqa/encoder.hpp"
#include "triqa/errors.hpp"
#include "triqa/eval.hpp"
#include "triqa/features.hpp"
#include "triqa/fr.hpp"
#include "triqa/pipeline.hpp"
#include "triqa/svr.hpp"
#include "triqa/synthetic.hpp"
#include "triqa/triplets.hpp"

namespace fs = std::filesystem;
using namespace triqa;

namespace {

void log_config(const std::string& command, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string line;
  for (const auto& [k, v] : kv) line += " " + k + "=" + v;
  spdlog::info("{}:{}", command, line);
}

std::string str(uint64_t v) { return std::to_string(v); }

DatasetTable table_or_directory(const fs::path& dataset, const fs::path& images) {
  if (!dataset.empty()) return read_dataset(dataset, images);
  // Every image of the directory, unrated.
  DatasetTable t;
  t.name = images.filename().string();
  t.root = images;
  for (const auto& [id, path] : list_corpus(images)) t.rows.push_back({path, 0.0, std::nullopt});
  return t;
}

ContentEncoder content_for(const Checkpoint& ckpt, const fs::path& weights, uint64_t seed) {
  return weights.empty() ? ContentEncoder(ckpt.config.preset, seed)
                         : ContentEncoder::from_weights(ckpt.config.preset, weights);
}

std::vector<ReportFormat> parse_formats(const std::vector<std::string>& names) {
  std::vector<ReportFormat> out;
  for (const auto& n : names) out.push_back(parse_report_format(n));
  return out;
}

fs::path output_for(const fs::path& report, ReportFormat f, size_t n_formats) {
  if (n_formats == 1) return report;
  fs::path stem = report;
  stem.replace_extension();
  switch (f) {
    case ReportFormat::kJson:
      return stem.string() + ".json";
    case ReportFormat::kCsv:
      return stem.string() + ".csv";
    case ReportFormat::kTableText:
      return stem.string() + ".txt";
    case ReportFormat::kPlots:
      return stem.string() + "_plots";
  }
  return report;
}

int run(int argc, char** argv) {
  CLI::App app{"TRIQA: triplet-trained image quality assessment"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Write a synthetic pristine corpus (and toy MOS tables)");
  fs::path synth_out;
  int synth_count = 8, synth_size = 288, synth_toy = 0;
  uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--count", synth_count, "Number of pristine images")->capture_default_str();
  synth->add_option("--size", synth_size, "Side length in pixels (>= 256)")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Master seed")->capture_default_str();
  synth->add_option("--toy", synth_toy,
                    "Also render this many rated distorted images with toy_mos.csv and toy_fr.csv")
      ->capture_default_str();

  // ---- forge ----
  auto* forge = app.add_subcommand("forge", "Build the triplet manifest for a pristine corpus");
  fs::path forge_images, forge_out, forge_materialize;
  bool include_combined = true;
  uint64_t forge_seed = 0;
  std::string grouping_version = default_grouping().version();
  std::vector<int> positive_levels{1, 3}, added_levels{1, 3};
  forge->add_option("--images", forge_images, "Directory of pristine images")->required();
  forge->add_option("--out", forge_out, "Manifest path (JSON Lines)")->required();
  forge->add_flag("--include-combined,!--no-combined", include_combined,
                  "Include cross-group combined triplets")
      ->capture_default_str();
  forge->add_option("--seed", forge_seed, "Master seed")->capture_default_str();
  forge->add_option("--grouping-version", grouping_version, "Distortion grouping table")
      ->capture_default_str();
  forge->add_option("--positive-levels", positive_levels, "Levels of the first distortion")
      ->delimiter(',')
      ->capture_default_str();
  forge->add_option("--added-levels", added_levels, "Levels of the added distortion")
      ->delimiter(',')
      ->capture_default_str();
  forge->add_option("--materialize", forge_materialize,
                    "Also render every distinct chain to DIR/<image>/<chain>.png");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Train the quality encoder on a manifest");
  fs::path train_manifest, train_images, train_out, train_validation;
  EncoderConfig enc;
  std::string preset_name = "desk-scale";
  train_cmd->add_option("--manifest", train_manifest, "Triplet manifest")->required();
  train_cmd->add_option("--images", train_images, "Directory of the manifest's pristine images")
      ->required();
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--preset", preset_name, "desk-scale or paper-scale")->capture_default_str();
  train_cmd->add_option("--epochs", enc.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--margin", enc.margin, "Triplet margin")->capture_default_str();
  train_cmd->add_option("--lr", enc.learning_rate, "Base learning rate")->capture_default_str();
  train_cmd->add_option("--batch", enc.batch_size, "Triplets per optimizer step")
      ->capture_default_str();
  train_cmd->add_option("--crop", enc.crop_size, "Synchronized crop size")->capture_default_str();
  train_cmd->add_option("--embedding-dim", enc.embedding_dim, "Projection head width")
      ->capture_default_str();
  train_cmd->add_option("--max-steps", enc.max_steps, "Stop after N steps (0 = full run)")
      ->capture_default_str();
  train_cmd->add_option("--seed", enc.seed, "Master seed")->capture_default_str();
  train_cmd->add_option("--validation-manifest", train_validation,
                        "Held-out manifest (same image directory) for progress reports");
  train_cmd->add_flag("--keep-best", enc.keep_best, "Return the best-validation checkpoint");

  // ---- extract ----
  auto* extract_cmd = app.add_subcommand("extract", "Extract fused content + quality features");
  fs::path ex_images, ex_dataset, ex_ckpt, ex_out, ex_content_weights;
  std::string ex_scales = "full,half";
  uint64_t ex_content_seed = ContentEncoder::kDefaultSeed, ex_seed = 0;
  extract_cmd->add_option("--images", ex_images, "Image root (all images when no --dataset)")
      ->required();
  extract_cmd->add_option("--dataset", ex_dataset, "MOS table selecting and ordering images");
  extract_cmd->add_option("--ckpt", ex_ckpt, "Quality encoder checkpoint")->required();
  extract_cmd->add_option("--out", ex_out, "Feature file (sidecar written to OUT.json)")
      ->required();
  extract_cmd->add_option("--scales", ex_scales, "full, half or full,half")->capture_default_str();
  extract_cmd->add_option("--content-weights", ex_content_weights, "Frozen content weights");
  extract_cmd->add_option("--content-seed", ex_content_seed, "Seed of the default content encoder")
      ->capture_default_str();
  extract_cmd->add_option("--seed", ex_seed, "Master seed recorded in the sidecar")
      ->capture_default_str();

  // ---- fit-head ----
  auto* fit_cmd = app.add_subcommand("fit-head", "Fit the SVR head and run the split protocol");
  fs::path fit_features, fit_mos, fit_images, fit_out;
  SplitProtocol fit_protocol;
  SvrGrid grid;
  fit_cmd->add_option("--features", fit_features, "Feature file from 'extract'")->required();
  fit_cmd->add_option("--mos", fit_mos, "MOS table (path,mos)")->required();
  fit_cmd->add_option("--images", fit_images, "Image root the features were extracted from");
  fit_cmd->add_option("--iters", fit_protocol.iterations, "Protocol iterations")
      ->capture_default_str();
  fit_cmd->add_option("--train-fraction", fit_protocol.train_fraction, "Train share per split")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit_protocol.seed, "Master seed")->capture_default_str();
  fit_cmd->add_flag("--large", fit_protocol.large, "Single iteration for very large corpora");
  fit_cmd->add_option("--c-grid", grid.c, "Regularization grid")->delimiter(',');
  fit_cmd->add_option("--epsilon-grid", grid.epsilon, "Epsilon grid")->delimiter(',');
  fit_cmd->add_option("--folds", grid.folds, "Cross-validation folds")->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "Model file")->required();

  // ---- score ----
  auto* score_cmd = app.add_subcommand("score", "Predict the quality of one image");
  fs::path sc_image, sc_ckpt, sc_model, sc_content_weights;
  score_cmd->add_option("--image", sc_image, "Image")->required();
  score_cmd->add_option("--ckpt", sc_ckpt, "Quality encoder checkpoint")->required();
  score_cmd->add_option("--model", sc_model, "Model from 'fit-head'")->required();
  score_cmd->add_option("--content-weights", sc_content_weights, "Frozen content weights");

  // ---- score-fr ----
  auto* score_fr_cmd = app.add_subcommand("score-fr", "Full-reference cosine score of one pair");
  fs::path fr_ref, fr_dist, fr_ckpt;
  std::string fr_scales = "full,half";
  score_fr_cmd->add_option("--ref", fr_ref, "Reference image")->required();
  score_fr_cmd->add_option("--dist", fr_dist, "Distorted image")->required();
  score_fr_cmd->add_option("--ckpt", fr_ckpt, "Quality encoder checkpoint")->required();
  score_fr_cmd->add_option("--scales", fr_scales, "full, half or full,half")->capture_default_str();

  // ---- eval-fr ----
  auto* eval_fr_cmd = app.add_subcommand("eval-fr", "Full-reference evaluation of MOS tables");
  std::vector<fs::path> efr_tables;
  fs::path efr_images, efr_ckpt, efr_report;
  std::vector<std::string> efr_formats{"json"};
  std::string efr_scales = "full,half";
  bool efr_logistic = false;
  eval_fr_cmd->add_option("--table", efr_tables, "reference_path,distorted_path,mos table(s)")
      ->required();
  eval_fr_cmd->add_option("--images", efr_images, "Image root of the tables");
  eval_fr_cmd->add_option("--ckpt", efr_ckpt, "Quality encoder checkpoint")->required();
  eval_fr_cmd->add_option("--report", efr_report, "Report output")->required();
  eval_fr_cmd->add_option("--format", efr_formats, "json, csv, table-text, plots")
      ->delimiter(',')
      ->capture_default_str();
  eval_fr_cmd->add_option("--scales", efr_scales, "full, half or full,half")->capture_default_str();
  eval_fr_cmd->add_flag("--logistic-fit", efr_logistic, "Also report PLCC after a logistic fit");

  // ---- eval ----
  auto* eval_cmd = app.add_subcommand("eval", "No-reference evaluation with the split protocol");
  fs::path ev_dataset, ev_images, ev_ckpt, ev_report, ev_content_weights;
  SplitProtocol ev_protocol;
  std::vector<std::string> ev_formats{"json"};
  std::string ev_scales = "full,half";
  uint64_t ev_content_seed = ContentEncoder::kDefaultSeed;
  eval_cmd->add_option("--dataset", ev_dataset, "MOS table (path,mos)")->required();
  eval_cmd->add_option("--images", ev_images, "Image root of the table");
  eval_cmd->add_option("--ckpt", ev_ckpt, "Quality encoder checkpoint")->required();
  eval_cmd->add_option("--iters", ev_protocol.iterations, "Protocol iterations")
      ->capture_default_str();
  eval_cmd->add_option("--train-fraction", ev_protocol.train_fraction, "Train share per split")
      ->capture_default_str();
  eval_cmd->add_option("--seed", ev_protocol.seed, "Master seed")->capture_default_str();
  eval_cmd->add_flag("--large", ev_protocol.large, "Single iteration for very large corpora");
  eval_cmd->add_flag("--logistic-fit", ev_protocol.logistic_fit,
                     "Also report PLCC after a logistic fit");
  eval_cmd->add_option("--report", ev_report, "Report output (directory for plots)")->required();
  eval_cmd->add_option("--format", ev_formats, "json, csv, table-text, plots")
      ->delimiter(',')
      ->capture_default_str();
  eval_cmd->add_option("--scales", ev_scales, "full, half or full,half")->capture_default_str();
  eval_cmd->add_option("--content-weights", ev_content_weights, "Frozen content weights");
  eval_cmd->add_option("--content-seed", ev_content_seed, "Seed of the default content encoder")
      ->capture_default_str();

  // ---- ablation ----
  auto* abl_cmd = app.add_subcommand("ablation", "Compare checkpoints with and without combined triplets");
  fs::path ab_with, ab_without, ab_dataset, ab_images, ab_report;
  SplitProtocol ab_protocol;
  std::vector<std::string> ab_formats{"table-text"};
  abl_cmd->add_option("--with", ab_with, "Checkpoint trained with combined triplets")->required();
  abl_cmd->add_option("--without", ab_without, "Checkpoint trained without them")->required();
  abl_cmd->add_option("--dataset", ab_dataset, "MOS table (path,mos)")->required();
  abl_cmd->add_option("--images", ab_images, "Image root of the table");
  abl_cmd->add_option("--iters", ab_protocol.iterations, "Protocol iterations")
      ->capture_default_str();
  abl_cmd->add_option("--seed", ab_protocol.seed, "Master seed")->capture_default_str();
  abl_cmd->add_option("--report", ab_report, "Report output")->required();
  abl_cmd->add_option("--format", ab_formats, "json, csv, table-text, plots")
      ->delimiter(',')
      ->capture_default_str();

  // ---- pipeline ----
  auto* pipe_cmd = app.add_subcommand("pipeline", "Run pipeline stages from a config file");
  fs::path pipe_config;
  std::string pipe_stages = "all";
  std::vector<std::string> pipe_sets;
  std::optional<uint64_t> pipe_seed;
  std::optional<std::string> pipe_work;
  bool pipe_print = false;
  pipe_cmd->add_option("--config", pipe_config, "INI config file")->check(CLI::ExistingFile);
  pipe_cmd->add_option("--stages", pipe_stages,
                       "Comma list of forge,train,extract,fit-head,eval,eval-fr,ablation or 'all'")
      ->capture_default_str();
  pipe_cmd->add_option("--set", pipe_sets, "Override a setting: section.key=value (repeatable)");
  pipe_cmd->add_option("--seed", pipe_seed, "Master seed (same as --set run.seed=N)");
  pipe_cmd->add_option("--work", pipe_work, "Work directory (same as --set paths.work=DIR)");
  pipe_cmd->add_flag("--print-config", pipe_print, "Print the resolved config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version report success; every other parse error is a usage error.
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  auto logger = spdlog::stderr_color_mt("triqa");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(quiet ? spdlog::level::warn : verbose ? spdlog::level::debug : spdlog::level::info);

  if (synth->parsed()) {
    log_config("synth", {{"out", synth_out.string()}, {"count", std::to_string(synth_count)},
                         {"size", std::to_string(synth_size)}, {"toy", std::to_string(synth_toy)},
                         {"seed", str(synth_seed)}});
    const auto refs = write_synthetic_corpus(synth_out / "pristine", synth_count, synth_size, synth_seed);
    spdlog::info("synth: wrote {} pristine images to {}", refs.size(), (synth_out / "pristine").string());
    if (synth_toy > 0) {
      const auto t = write_toy_tables(synth_out / "rated", refs, synth_toy, synth_seed);
      spdlog::info("synth: wrote {} and {}", t.nr_table.string(), t.fr_table.string());
    }
    return 0;
  }

  if (forge->parsed()) {
    log_config("forge", {{"images", forge_images.string()}, {"out", forge_out.string()},
                         {"include_combined", include_combined ? "true" : "false"},
                         {"grouping_version", grouping_version}, {"seed", str(forge_seed)}});
    const auto items = list_corpus(forge_images);
    std::vector<std::string> ids;
    for (const auto& [id, p] : items) ids.push_back(id);
    ManifestOptions opts;
    opts.include_combined = include_combined;
    opts.positive_levels = positive_levels;
    opts.added_levels = added_levels;
    const Manifest m = build_manifest(ids, grouping_for_version(grouping_version), forge_seed, opts);
    write_manifest(m, forge_out);
    spdlog::info("forge: {} triplets ({} single, {} combined), fingerprint {}", m.entries.size(),
                 m.header.counts.single, m.header.counts.combined, manifest_fingerprint(m));
    if (!forge_materialize.empty()) {
      ChainRenderer corpus = load_corpus(items);
      std::set<std::pair<std::string, std::string>> done;
      for (const auto& t : m.entries) {
        for (const auto* chain : {&t.anchor, &t.positive, &t.negative}) {
          const std::string key = chain->rank_key();
          if (!done.emplace(t.image_id, key).second) continue;
          const fs::path dir = forge_materialize / t.image_id;
          fs::create_directories(dir);
          write_png(corpus.render(t.image_id, *chain, t.seed), dir / (key + ".png"));
        }
      }
      spdlog::info("forge: materialized {} images under {}", done.size(), forge_materialize.string());
    }
    return 0;
  }

  if (train_cmd->parsed()) {
    enc.preset = parse_preset(preset_name);
    enc.validate();
    log_config("train", {{"manifest", train_manifest.string()}, {"preset", preset_name},
                         {"epochs", std::to_string(enc.epochs)}, {"batch", std::to_string(enc.batch_size)},
                         {"lr", std::to_string(enc.learning_rate)}, {"margin", std::to_string(enc.margin)},
                         {"seed", str(enc.seed)}});
    const Manifest m = read_manifest(train_manifest);
    std::vector<std::pair<std::string, fs::path>> items;
    std::map<std::string, fs::path> by_id;
    for (const auto& [id, p] : list_corpus(train_images)) by_id[id] = p;
    std::optional<Manifest> validation;
    if (!train_validation.empty()) validation = read_manifest(train_validation);
    std::set<std::string> needed(m.header.image_ids.begin(), m.header.image_ids.end());
    if (validation) needed.insert(validation->header.image_ids.begin(), validation->header.image_ids.end());
    for (const auto& id : needed) {
      if (!by_id.contains(id)) throw DataError("image '" + id + "' of the manifest is not in " + train_images.string());
      items.emplace_back(id, by_id[id]);
    }
    ChainRenderer corpus = load_corpus(items);
    TrainResult r = train(m, corpus, enc, validation ? &*validation : nullptr,
                          [](const TrainProgress& p) {
                            if (p.validation) {
                              spdlog::info("step {}/{} lr {:.3e} loss {:.4f} val_loss {:.4f} val_acc {:.3f}",
                                           p.step, p.total_steps, p.learning_rate, p.train_loss,
                                           p.validation->mean_loss, p.validation->accuracy);
                            } else {
                              spdlog::info("step {}/{} lr {:.3e} loss {:.4f}", p.step, p.total_steps,
                                           p.learning_rate, p.train_loss);
                            }
                          });
    save_checkpoint(r.checkpoint, train_out);
    spdlog::info("train: wrote {} (fingerprint {})", train_out.string(), r.checkpoint.fingerprint());
    return 0;
  }

  if (extract_cmd->parsed()) {
    log_config("extract", {{"images", ex_images.string()}, {"ckpt", ex_ckpt.string()},
                           {"scales", ex_scales}, {"seed", str(ex_seed)},
                           {"content_seed", str(ex_content_seed)}});
    const QualityScales scales = parse_scales(ex_scales);
    const Checkpoint ckpt = load_checkpoint(ex_ckpt);
    const DatasetTable table = table_or_directory(ex_dataset, ex_images);
    const ContentEncoder content = content_for(ckpt, ex_content_weights, ex_content_seed);
    FeatureMatrix f = extract_feature_matrix(table.paths(), table.names(), ckpt, content, scales);
    f.seed = ex_seed;
    write_features(f, ex_out);
    spdlog::info("extract: {} x {} features -> {}", f.values.rows(), f.values.cols(), ex_out.string());
    return 0;
  }

  if (fit_cmd->parsed()) {
    log_config("fit-head", {{"features", fit_features.string()}, {"mos", fit_mos.string()},
                            {"iters", std::to_string(fit_protocol.iterations)},
                            {"seed", str(fit_protocol.seed)}});
    fit_protocol.validate();
    const FeatureMatrix f = read_features(fit_features);
    const DatasetTable table = read_dataset(fit_mos, fit_images);
    std::map<std::string, double> mos_of;
    const auto names = table.names();
    for (size_t i = 0; i < names.size(); ++i) mos_of[names[i]] = table.rows[i].mos;
    std::vector<double> mos;
    for (const auto& name : f.images) {
      const auto it = mos_of.find(name);
      if (it == mos_of.end()) throw DataError("no MOS for feature row '" + name + "'");
      mos.push_back(it->second);
    }
    const ProtocolResult pr = run_protocol(f.values, mos, fit_protocol, grid);
    spdlog::info("fit-head: {} iteration(s) median SRCC {:.4f} (std {:.4f}) PLCC {:.4f} (std {:.4f})",
                 pr.iterations.size(), pr.median_srcc, pr.std_srcc, pr.median_plcc, pr.std_plcc);
    RegressionModel model = fit(f.values, mos, grid);
    model.source = f.source();
    model.seed = fit_protocol.seed;
    save_model(model, fit_out);
    std::printf("median_srcc=%.6f median_plcc=%.6f std_srcc=%.6f std_plcc=%.6f C=%g epsilon=%g\n",
                pr.median_srcc, pr.median_plcc, pr.std_srcc, pr.std_plcc, model.c, model.epsilon);
    return 0;
  }

  if (score_cmd->parsed()) {
    log_config("score", {{"image", sc_image.string()}, {"ckpt", sc_ckpt.string()},
                         {"model", sc_model.string()}});
    const Checkpoint ckpt = load_checkpoint(sc_ckpt);
    const RegressionModel model = load_model(sc_model);
    if (!model.source) throw DataError("model " + sc_model.string() + " lacks feature provenance");
    const FeatureSource& src = *model.source;
    if (src.checkpoint_fingerprint != ckpt.fingerprint()) {
      throw DataError("model was fitted on features of a different checkpoint");
    }
    const ContentEncoder content = content_for(ckpt, sc_content_weights, src.content_seed);
    if (content.fingerprint() != src.content_fingerprint) {
      throw DataError("content encoder does not match the one the model was fitted with");
    }
    const ImageBuffer img = read_image(sc_image);
    const FeatureVector fused =
        fuse(extract_content_features(img, content), extract_quality_features(img, ckpt, src.scales));
    std::printf("%.6f\n", predict(model, fused.values));
    return 0;
  }

  if (score_fr_cmd->parsed()) {
    log_config("score-fr", {{"ref", fr_ref.string()}, {"dist", fr_dist.string()},
                            {"ckpt", fr_ckpt.string()}, {"scales", fr_scales}});
    const Checkpoint ckpt = load_checkpoint(fr_ckpt);
    const FRScore s = score_fr(read_image(fr_ref), read_image(fr_dist), ckpt,
                               parse_scales(fr_scales), fr_ref.string(), fr_dist.string());
    std::printf("%.9f\n", s.value);
    return 0;
  }

  if (eval_fr_cmd->parsed()) {
    log_config("eval-fr", {{"ckpt", efr_ckpt.string()}, {"scales", efr_scales},
                           {"logistic_fit", efr_logistic ? "true" : "false"}});
    const auto formats = parse_formats(efr_formats);
    const Checkpoint ckpt = load_checkpoint(efr_ckpt);
    std::vector<DatasetTable> tables;
    for (const auto& t : efr_tables) tables.push_back(read_dataset(t, efr_images));
    const EvalReport report = evaluate_fr_report(tables, ckpt, {parse_scales(efr_scales), efr_logistic});
    for (const auto f : formats) emit_report(report, f, output_for(efr_report, f, formats.size()));
    std::cout << report_to_table(report);
    return 0;
  }

  if (eval_cmd->parsed()) {
    log_config("eval", {{"dataset", ev_dataset.string()}, {"ckpt", ev_ckpt.string()},
                        {"iters", std::to_string(ev_protocol.iterations)},
                        {"seed", str(ev_protocol.seed)}, {"scales", ev_scales}});
    const auto formats = parse_formats(ev_formats);
    ev_protocol.validate();
    const Checkpoint ckpt = load_checkpoint(ev_ckpt);
    const DatasetTable table = read_dataset(ev_dataset, ev_images);
    const ContentEncoder content = content_for(ckpt, ev_content_weights, ev_content_seed);
    const EvalReport report =
        evaluate_nr(table, ckpt, content, ev_protocol, {}, parse_scales(ev_scales));
    for (const auto f : formats) emit_report(report, f, output_for(ev_report, f, formats.size()));
    std::cout << report_to_table(report);
    return 0;
  }

  if (abl_cmd->parsed()) {
    log_config("ablation", {{"with", ab_with.string()}, {"without", ab_without.string()},
                            {"iters", std::to_string(ab_protocol.iterations)},
                            {"seed", str(ab_protocol.seed)}});
    const auto formats = parse_formats(ab_formats);
    ab_protocol.validate();
    const Checkpoint with = load_checkpoint(ab_with);
    const Checkpoint without = load_checkpoint(ab_without);
    const DatasetTable table = read_dataset(ab_dataset, ab_images);
    const ContentEncoder content(with.config.preset);
    const AblationReport r = run_ablation(table, with, without, content, ab_protocol);
    for (const auto f : formats) emit_ablation(r, f, output_for(ab_report, f, formats.size()));
    return 0;
  }

  if (pipe_cmd->parsed()) {
    PipelineConfig config;
    if (!pipe_config.empty()) config = load_config(pipe_config);
    for (const auto& s : pipe_sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects section.key=value, got '" + s + "'");
      config.set(s.substr(0, eq), s.substr(eq + 1));
    }
    if (pipe_seed) config.seed = *pipe_seed;
    if (pipe_work) config.work = *pipe_work;
    config.finalize();
    if (pipe_print) {
      std::cout << config.to_text();
      return 0;
    }
    const auto stages = parse_stages(pipe_stages, config);
    spdlog::info("pipeline: seed {} stages {}", config.seed, pipe_stages);
    spdlog::info("pipeline: resolved config\n{}", config.to_text());
    const PipelineResult r = run_pipeline(config, stages);
    for (const auto& [name, sha] : r.fingerprints) std::printf("%s  %s\n", sha.c_str(), name.c_str());
    if (r.report) std::cout << report_to_table(*r.report);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "triqa: numerical error: %s\n", e.what());
    return static_cast<int>(ExitCode::kNumerical);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "triqa: usage error: %s\n", e.what());
    return static_cast<int>(ExitCode::kUsage);
  } catch (const DataError& e) {
    std::fprintf(stderr, "triqa: data error: %s\n", e.what());
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "triqa: error: %s\n", e.what());
    return static_cast<int>(ExitCode::kData);
  }
}
