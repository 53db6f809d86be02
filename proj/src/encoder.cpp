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

#include "triqa/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "triqa/errors.hpp"
#include "triqa/fingerprint.hpp"
#include "triqa/loss.hpp"
#include "triqa/seeding.hpp"

namespace triqa {

using nlohmann::json;

std::string_view to_string(Preset preset) {
  return preset == Preset::kDesk ? "desk-scale" : "paper-scale";
}

Preset parse_preset(std::string_view name) {
  if (name == "desk-scale" || name == "desk") return Preset::kDesk;
  if (name == "paper-scale" || name == "paper") return Preset::kPaper;
  throw ConfigError("unknown preset '" + std::string(name) +
                    "' (expected desk-scale or paper-scale)");
}

nn::BackboneSpec quality_backbone(Preset preset, int embedding_dim) {
  if (embedding_dim <= 0) throw ConfigError("embedding dimension must be positive");
  nn::BackboneSpec spec;
  if (preset == Preset::kDesk) {
    spec.convs = {{3, 32, 4, 4, 0},
                  {32, 64, 3, 2, 1},
                  {64, 128, 3, 2, 1},
                  {128, 256, 3, 2, 1},
                  {256, 256, 3, 1, 1}};
  } else {
    // Patchify stem and stage widths of a ConvNeXt-T-sized trunk.
    spec.convs = {{3, 96, 4, 4, 0},
                  {96, 192, 3, 2, 1},
                  {192, 384, 3, 2, 1},
                  {384, 768, 3, 2, 1}};
  }
  spec.projection_dim = embedding_dim;
  return spec;
}

nn::BackboneSpec content_backbone(Preset preset) {
  nn::BackboneSpec spec;
  if (preset == Preset::kDesk) {
    spec.convs = {{3, 24, 4, 4, 0}, {24, 48, 3, 2, 1}, {48, 96, 3, 2, 1}, {96, 192, 3, 2, 1}};
  } else {
    spec.convs = {{3, 128, 4, 4, 0},
                  {128, 256, 3, 2, 1},
                  {256, 512, 3, 2, 1},
                  {512, 1024, 3, 2, 1},
                  {1024, 1536, 3, 2, 1}};
  }
  return spec;
}

void EncoderConfig::validate() const {
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(adam_eps > 0.0)) throw ConfigError("optimizer epsilon must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("optimizer betas must lie in [0, 1)");
  }
  if (schedule != "cosine") throw ConfigError("only the cosine schedule is supported");
  if (embedding_dim <= 0) throw ConfigError("embedding dimension must be positive");
  if (crop_size <= 0) throw ConfigError("crop size must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(validation_fraction > 0.0 && validation_fraction <= 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1]");
  }
  if (max_steps < 0) throw ConfigError("max_steps must be non-negative");
  if (crop_size < quality_backbone(preset, embedding_dim).total_stride()) {
    throw ConfigError("crop size is below the backbone minimum");
  }
}

namespace {

json config_to_json(const EncoderConfig& c) {
  return json{{"preset", to_string(c.preset)},
              {"embedding_dim", c.embedding_dim},
              {"margin", c.margin},
              {"learning_rate", c.learning_rate},
              {"adam_eps", c.adam_eps},
              {"betas", {c.beta1, c.beta2}},
              {"schedule", c.schedule},
              {"crop_size", c.crop_size},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"validation_fraction", c.validation_fraction},
              {"max_validation_triplets", c.max_validation_triplets},
              {"keep_best", c.keep_best},
              {"max_steps", c.max_steps}};
}

EncoderConfig config_from_json(const json& j) {
  EncoderConfig c;
  c.preset = parse_preset(j.at("preset").get<std::string>());
  c.embedding_dim = j.at("embedding_dim").get<int>();
  c.margin = j.at("margin").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.adam_eps = j.at("adam_eps").get<double>();
  c.beta1 = j.at("betas").at(0).get<double>();
  c.beta2 = j.at("betas").at(1).get<double>();
  c.schedule = j.at("schedule").get<std::string>();
  c.crop_size = j.at("crop_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  c.validation_fraction = j.at("validation_fraction").get<double>();
  c.max_validation_triplets = j.at("max_validation_triplets").get<int>();
  c.keep_best = j.at("keep_best").get<bool>();
  c.max_steps = j.at("max_steps").get<int64_t>();
  return c;
}

constexpr char kCheckpointMagic[8] = {'T', 'R', 'I', 'Q', 'A', 'C', 'K', '1'};

std::vector<double> to_double(std::span<const float> v) {
  return {v.begin(), v.end()};
}

}  // namespace

std::string Checkpoint::fingerprint() const {
  return sha256_hex(network.parameter_bytes());
}

Checkpoint init_checkpoint(const EncoderConfig& config) {
  config.validate();
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.network = nn::Network(quality_backbone(config.preset, config.embedding_dim),
                             derive_seed(config.seed, streams::kInit));
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  json tensors = json::array();
  for (const auto& p : ckpt.network.params()) {
    tensors.push_back({{"name", p.name}, {"shape", p.shape}});
  }
  const std::string blob = ckpt.network.parameter_bytes();
  const json header{{"format", "triqa-checkpoint"},
                    {"config", config_to_json(ckpt.config)},
                    {"step", ckpt.step},
                    {"manifest_fingerprint", ckpt.manifest_fingerprint},
                    {"tensors", tensors},
                    {"dtype", "float32-le"},
                    {"parameter_sha256", sha256_hex(blob)}};
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const uint64_t length = text.size();
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  uint64_t length = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw DataError(path.string() + " is not a triqa checkpoint");
  }
  if (length > (1u << 26)) throw DataError("checkpoint header is implausibly large");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  std::ostringstream rest;
  rest << in.rdbuf();
  const std::string blob = rest.str();

  Checkpoint ckpt;
  try {
    const json header = json::parse(text);
    ckpt.config = config_from_json(header.at("config"));
    ckpt.config.validate();
    ckpt.step = header.at("step").get<int64_t>();
    ckpt.manifest_fingerprint = header.at("manifest_fingerprint").get<std::string>();
    ckpt.network = nn::Network(
        quality_backbone(ckpt.config.preset, ckpt.config.embedding_dim), 0);
    const auto& tensors = header.at("tensors");
    const auto& params = ckpt.network.params();
    if (tensors.size() != params.size()) throw DataError("checkpoint tensor table mismatch");
    for (size_t i = 0; i < params.size(); ++i) {
      if (tensors[i].at("name").get<std::string>() != params[i].name ||
          tensors[i].at("shape").get<std::vector<int>>() != params[i].shape) {
        throw DataError("checkpoint tensor '" + params[i].name + "' has the wrong shape");
      }
    }
    if (sha256_hex(blob) != header.at("parameter_sha256").get<std::string>()) {
      throw DataError("checkpoint parameters are corrupt (digest mismatch)");
    }
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint header: " + std::string(e.what()));
  }
  ckpt.network.load_parameter_bytes(blob);
  return ckpt;
}

QualityEmbedding embed(const ImageBuffer& img, const Checkpoint& ckpt) {
  nn::Tape tape;
  ckpt.network.forward(nn::to_input(img), tape);
  return {to_double(tape.embedding)};
}

CropWindow draw_crop(int height, int width, int crop, uint64_t seed) {
  if (crop <= 0) throw UsageError("crop size must be positive");
  if (height < crop || width < crop) {
    throw DataError("image " + std::to_string(height) + "x" + std::to_string(width) +
                    " smaller than crop " + std::to_string(crop));
  }
  Rng rng(seed);
  CropWindow w;
  w.size = crop;
  w.y = static_cast<int>(rng.below(static_cast<uint64_t>(height - crop + 1)));
  w.x = static_cast<int>(rng.below(static_cast<uint64_t>(width - crop + 1)));
  return w;
}

CroppedTriplet synchronized_crop(const ImageBuffer& anchor, const ImageBuffer& positive,
                                 const ImageBuffer& negative, int crop, uint64_t seed) {
  for (const auto* img : {&positive, &negative}) {
    if (img->height() != anchor.height() || img->width() != anchor.width()) {
      throw DataError("triplet members have different dimensions");
    }
  }
  const CropWindow w = draw_crop(anchor.height(), anchor.width(), crop, seed);
  return {{anchor.crop(w.y, w.x, crop, crop), positive.crop(w.y, w.x, crop, crop),
           negative.crop(w.y, w.x, crop, crop)},
          w};
}

namespace {

ImageBuffer center_crop(const ImageBuffer& img, int crop) {
  require_min_size(img, crop, "center crop");
  return img.crop((img.height() - crop) / 2, (img.width() - crop) / 2, crop, crop);
}

std::vector<size_t> validation_subset(const Manifest& manifest, size_t max_triplets) {
  std::vector<size_t> idx(manifest.entries.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (max_triplets == 0 || max_triplets >= idx.size()) return idx;
  // Evenly strided so every distortion family is represented.
  std::vector<size_t> picked;
  picked.reserve(max_triplets);
  for (size_t i = 0; i < max_triplets; ++i) {
    picked.push_back(i * idx.size() / max_triplets);
  }
  return picked;
}

struct TripletForward {
  std::array<nn::Tape, 3> tapes;
  TripletLossGrad loss;
};

TripletForward forward_triplet(const nn::Network& net,
                               const std::array<ImageBuffer, 3>& images, double margin) {
  TripletForward f;
  for (int k = 0; k < 3; ++k) net.forward(nn::to_input(images[k]), f.tapes[k]);
  f.loss = triplet_margin_loss_grad(to_double(f.tapes[0].embedding),
                                    to_double(f.tapes[1].embedding),
                                    to_double(f.tapes[2].embedding), margin);
  return f;
}

}  // namespace

OrderingStats evaluate_ordering(const Manifest& manifest, ChainRenderer& corpus,
                                const Checkpoint& ckpt, size_t max_triplets) {
  OrderingStats stats;
  if (manifest.entries.empty()) return stats;
  size_t correct = 0;
  double loss_sum = 0.0;
  for (const size_t i : validation_subset(manifest, max_triplets)) {
    const auto rendered = corpus.render(manifest.entries[i]);
    std::array<ImageBuffer, 3> crops;
    for (int k = 0; k < 3; ++k) crops[k] = center_crop(rendered[k], ckpt.config.crop_size);
    const auto f = forward_triplet(ckpt.network, crops, ckpt.config.margin);
    loss_sum += f.loss.loss;
    if (f.loss.d_ap < f.loss.d_an) ++correct;
    ++stats.count;
  }
  stats.mean_loss = loss_sum / static_cast<double>(stats.count);
  stats.accuracy = static_cast<double>(correct) / static_cast<double>(stats.count);
  return stats;
}

TrainResult train(const Manifest& manifest, ChainRenderer& corpus,
                  const EncoderConfig& config, const Manifest* validation,
                  const ProgressCallback& progress) {
  config.validate();
  if (manifest.entries.empty()) throw DataError("training manifest is empty");
  for (const auto& id : manifest.header.image_ids) {
    if (!corpus.has_image(id)) throw DataError("manifest image '" + id + "' missing from corpus");
    const auto& img = corpus.pristine(id);
    if (img.height() < config.crop_size || img.width() < config.crop_size) {
      throw ConfigError("crop size exceeds the smallest dimension of image '" + id + "'");
    }
  }
  if (validation) {
    for (const auto& id : validation->header.image_ids) {
      if (!corpus.has_image(id)) {
        throw DataError("validation image '" + id + "' missing from corpus");
      }
    }
  }

  TrainResult result;
  result.checkpoint = init_checkpoint(config);
  result.checkpoint.manifest_fingerprint = manifest_fingerprint(manifest);
  nn::Network& net = result.checkpoint.network;
  nn::Adam adam(net.params(), {config.beta1, config.beta2, config.adam_eps});

  const size_t n = manifest.entries.size();
  const auto batch = static_cast<size_t>(config.batch_size);
  const int64_t steps_per_epoch = static_cast<int64_t>((n + batch - 1) / batch);
  int64_t total_steps = steps_per_epoch * config.epochs;
  if (config.max_steps > 0) total_steps = std::min(total_steps, config.max_steps);
  const int64_t report_every = std::max<int64_t>(
      1, static_cast<int64_t>(std::llround(config.validation_fraction *
                                           static_cast<double>(total_steps))));

  const uint64_t crop_stream = derive_seed(config.seed, streams::kCrops);
  const uint64_t shuffle_stream = derive_seed(config.seed, streams::kShuffle);
  std::optional<nn::Network> best;
  double best_accuracy = -1.0;
  double window_loss = 0.0;
  int64_t window_steps = 0;
  int64_t step = 0;
  uint64_t position = 0;

  for (int epoch = 0; epoch < config.epochs && step < total_steps; ++epoch) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    Rng shuffler(derive_seed(shuffle_stream, static_cast<uint64_t>(epoch)));
    shuffler.shuffle(order.begin(), order.end());

    for (size_t start = 0; start < n && step < total_steps; start += batch) {
      const size_t end = std::min(n, start + batch);
      net.zero_grad();
      double batch_loss = 0.0;
      for (size_t k = start; k < end; ++k, ++position) {
        const TripletSpec& spec = manifest.entries[order[k]];
        const auto rendered = corpus.render(spec);
        const auto cropped =
            synchronized_crop(rendered[0], rendered[1], rendered[2], config.crop_size,
                              derive_seed(crop_stream, position));
        const auto f = forward_triplet(net, cropped.images, config.margin);
        if (!std::isfinite(f.loss.loss)) {
          throw NumericalError("non-finite loss at step " + std::to_string(step) +
                               " on triplet [" + spec.anchor.rank_key() + ", " +
                               spec.positive.rank_key() + ", " +
                               spec.negative.rank_key() + "] of image '" +
                               spec.image_id + "' (d_ap=" + std::to_string(f.loss.d_ap) +
                               ", d_an=" + std::to_string(f.loss.d_an) + ")");
        }
        batch_loss += f.loss.loss;
        if (f.loss.loss > 0.0) {
          const std::array<const std::vector<double>*, 3> grads = {
              &f.loss.grad_a, &f.loss.grad_p, &f.loss.grad_n};
          for (int m = 0; m < 3; ++m) {
            const std::vector<float> g(grads[m]->begin(), grads[m]->end());
            net.backward(f.tapes[m], g);
          }
        }
      }
      const double count = static_cast<double>(end - start);
      const double lr = nn::cosine_lr(config.learning_rate, step, total_steps);
      adam.step(net.params(), lr, 1.0 / count);
      ++step;
      const double mean_loss = batch_loss / count;
      result.step_losses.push_back(mean_loss);
      window_loss += mean_loss;
      ++window_steps;

      if (step % report_every == 0 || step == total_steps) {
        TrainProgress report;
        report.step = step;
        report.total_steps = total_steps;
        report.learning_rate = lr;
        report.train_loss = window_loss / static_cast<double>(window_steps);
        window_loss = 0.0;
        window_steps = 0;
        if (validation && !validation->entries.empty()) {
          result.checkpoint.step = step;
          report.validation = evaluate_ordering(
              *validation, corpus, result.checkpoint,
              static_cast<size_t>(std::max(0, config.max_validation_triplets)));
          if (config.keep_best && report.validation->accuracy > best_accuracy) {
            best_accuracy = report.validation->accuracy;
            best = net;
          }
        }
        result.reports.push_back(report);
        if (progress) progress(report);
      }
    }
  }
  result.checkpoint.step = step;
  if (config.keep_best && best) result.checkpoint.network = std::move(*best);
  return result;
}

}  // namespace triqa
