// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/trainer.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mprnn/checkpoint.h"
#include "mprnn/error.h"
#include "mprnn/mixture.h"

namespace mprnn {

namespace {

const std::vector<std::string> kTrainKeys = {"epochs",    "lr",     "batch_size",
                                             "clip_norm", "seed",   "metric",
                                             "lr_schedule", "patience"};

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteText(const std::filesystem::path &path, const std::string &text) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

double SpeakerMean(const PermutationResult &r) {
  return r.total / static_cast<double>(r.pair_scores.size());
}

}  // namespace

TrainConfig TrainConfig::FromConfig(const KeyValueConfig &cfg) {
  const auto unknown = cfg.UnknownKeys("train", kTrainKeys);
  if (!unknown.empty()) throw InvalidArgument("unknown config key 'train." + unknown[0] + "'");
  const KeyValueConfig s = cfg.Section("train");
  TrainConfig c;
  c.epochs = static_cast<int>(s.GetInt("epochs", c.epochs));
  c.lr = s.GetDouble("lr", c.lr);
  c.batch_size = static_cast<int>(s.GetInt("batch_size", c.batch_size));
  c.clip_norm = s.GetDouble("clip_norm", c.clip_norm);
  c.seed = static_cast<uint64_t>(s.GetInt("seed", 0));
  c.selection_metric = ParseMetric(s.GetString("metric", MetricName(c.selection_metric)));
  const std::string schedule = s.GetString("lr_schedule", "constant");
  if (schedule == "constant") {
    c.halve_on_plateau = false;
  } else if (schedule == "halve_on_plateau") {
    c.halve_on_plateau = true;
  } else {
    throw InvalidArgument("train.lr_schedule must be constant or halve_on_plateau, got '" +
                          schedule + "'");
  }
  c.plateau_patience = static_cast<int>(s.GetInt("patience", c.plateau_patience));
  c.Validate();
  return c;
}

KeyValueConfig TrainConfig::ToConfig() const {
  KeyValueConfig c;
  c.Set("train.epochs", std::to_string(epochs));
  c.Set("train.lr", Num(lr));
  c.Set("train.batch_size", std::to_string(batch_size));
  c.Set("train.clip_norm", Num(clip_norm));
  c.Set("train.seed", std::to_string(seed));
  c.Set("train.metric", MetricName(selection_metric));
  c.Set("train.lr_schedule", halve_on_plateau ? "halve_on_plateau" : "constant");
  c.Set("train.patience", std::to_string(plateau_patience));
  return c;
}

void TrainConfig::Validate() const {
  MPRNN_CHECK(epochs >= 1, "train.epochs must be at least 1, got " << epochs);
  MPRNN_CHECK(lr > 0 && std::isfinite(lr), "train.lr must be positive, got " << lr);
  MPRNN_CHECK(batch_size >= 1, "train.batch_size must be at least 1, got " << batch_size);
  MPRNN_CHECK(std::isfinite(clip_norm), "train.clip_norm must be finite");
  MPRNN_CHECK(plateau_patience >= 1, "train.patience must be at least 1");
}

void TrainLog::AddEpoch(const EpochRecord &r) {
  epochs.push_back(r);
  if (best_epoch == 0 || r.val_score > best_score) {
    best_epoch = r.epoch;
    best_score = r.val_score;
  }
}

std::string TrainLog::EpochsCsv() const {
  std::ostringstream os;
  os << "epoch,train_loss,val_score,lr,seconds,best\n";
  for (const auto &r : epochs) {
    os << r.epoch << ',' << Num(r.train_loss) << ',' << Num(r.val_score) << ',' << Num(r.lr)
       << ',' << Num(r.seconds) << ',' << (r.epoch == best_epoch ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string TrainLog::StepsTable() const {
  std::ostringstream os;
  os << "# step loss\n";
  for (size_t i = 0; i < step_losses.size(); ++i) os << i + 1 << ' ' << Num(step_losses[i]) << '\n';
  return os.str();
}

double Validate(const Separator<float> &model, const std::vector<LoadedExample> &examples,
                Metric metric) {
  MPRNN_CHECK(!examples.empty(), "validation set is empty");
  double sum = 0;
  for (const auto &ex : examples) {
    sum += SpeakerMean(UpitScore(model.Forward(ex.mixture), ex.sources, metric));
  }
  return sum / static_cast<double>(examples.size());
}

double TrainStep(Separator<float> &model, AdamState<float> &adam,
                 const std::vector<const LoadedExample *> &batch, double clip_norm,
                 double *pre_clip_norm) {
  MPRNN_CHECK(!batch.empty(), "empty batch");
  model.params().ZeroGrad();
  const float inv_batch = 1.0f / static_cast<float>(batch.size());
  double loss_sum = 0;
  for (const LoadedExample *ex : batch) {
    Separator<float>::Cache cache;
    const auto est = model.Forward(ex->mixture, &cache);
    std::vector<std::vector<float>> grads;
    const double loss = UpitSdSdrLoss(est, ex->sources, grads);
    if (!std::isfinite(loss)) {
      model.params().ZeroGrad();
      throw NumericError("non-finite training loss on example " + ex->id);
    }
    for (auto &g : grads) {
      for (float &v : g) v *= inv_batch;
    }
    model.Backward(cache, grads);
    loss_sum += loss;
  }
  const double norm = ClipGradNorm(model.params(), clip_norm);
  if (pre_clip_norm) *pre_clip_norm = norm;
  if (!std::isfinite(norm)) {
    model.params().ZeroGrad();
    throw NumericError("non-finite gradient norm on example " + batch.front()->id);
  }
  AdamStep(model.params(), adam);
  return loss_sum / static_cast<double>(batch.size());
}

TrainResult Train(const ModelConfig &model_config, const TrainConfig &config,
                  const std::vector<LoadedExample> &train,
                  const std::vector<LoadedExample> &val, const Validator &validator) {
  config.Validate();
  MPRNN_CHECK(!train.empty(), "training set is empty");
  if (!validator) MPRNN_CHECK(!val.empty(), "validation set is empty");
  std::set<std::string> val_ids;
  for (const auto &ex : val) val_ids.insert(ex.id);
  for (const auto &ex : train) {
    if (val_ids.contains(ex.id)) {
      throw InvalidArgument("example " + ex.id + " appears in both training and validation sets");
    }
  }

  Separator<float> model(model_config);
  std::optional<Separator<float>> best;
  AdamState<float> adam;
  adam.options.lr = config.lr;
  TrainLog log;
  Rng order_rng(config.seed);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  int since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(Uniform01(order_rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[j]);
    }
    double loss_sum = 0;
    for (size_t s = 0; s < order.size(); s += config.batch_size) {
      std::vector<const LoadedExample *> batch;
      for (size_t k = s; k < std::min(order.size(), s + config.batch_size); ++k) {
        batch.push_back(&train[order[k]]);
      }
      const double loss = TrainStep(model, adam, batch, config.clip_norm);
      for (const LoadedExample *ex : batch) {
        if (val_ids.contains(ex->id)) {
          throw Error("validation example " + ex->id + " reached an optimizer step");
        }
        log.updated_ids.insert(ex->id);
      }
      log.step_losses.push_back(loss);
      loss_sum += loss * static_cast<double>(batch.size());
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.lr = adam.options.lr;
    rec.val_score = validator ? validator(model, epoch)
                              : Validate(model, val, config.selection_metric);
    if (!std::isfinite(rec.val_score)) {
      throw NumericError("non-finite validation score after epoch " + std::to_string(epoch));
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const int prev_best = log.best_epoch;
    log.AddEpoch(rec);
    if (log.best_epoch != prev_best) {
      best.emplace(model.Cast<float>());
      since_best = 0;
    } else if (config.halve_on_plateau && ++since_best >= config.plateau_patience) {
      adam.options.lr /= 2;
      since_best = 0;
    }

    if (!config.out_dir.empty()) {
      const std::filesystem::path dir(config.out_dir);
      SaveCheckpoint(*best, (dir / "best.ckpt").string());
      SaveCheckpoint(model, (dir / "last.ckpt").string());
      WriteText(dir / "train_log.csv", log.EpochsCsv());
      WriteText(dir / "train_steps.dat", log.StepsTable());
    }
  }
  return TrainResult{std::move(*best), std::move(model), std::move(log)};
}

OverfitResult OverfitSingleBatch(const ModelConfig &model_config, const LoadedExample &example,
                                 int steps, const TrainConfig &config, double target_db,
                                 bool stop_at_target) {
  config.Validate();
  MPRNN_CHECK(steps >= 1, "steps must be at least 1");
  Separator<float> model(model_config);
  AdamState<float> adam;
  adam.options.lr = config.lr;
  OverfitResult r;
  const std::vector<const LoadedExample *> batch = {&example};
  for (int s = 0; s < steps; ++s) {
    const double loss = TrainStep(model, adam, batch, config.clip_norm);
    r.log.step_losses.push_back(loss);
    r.log.updated_ids.insert(example.id);
    // The loss was measured before this step's update.
    if (r.first_step_above < 0 && -loss > target_db) {
      r.first_step_above = s;
      if (stop_at_target) break;
    }
  }
  r.final_sd_sdr = SpeakerMean(UpitScore(model.Forward(example.mixture), example.sources,
                                         Metric::kSdSdr));
  if (r.first_step_above < 0 && r.final_sd_sdr > target_db) {
    r.first_step_above = static_cast<int>(r.log.step_losses.size());
  }
  return r;
}

std::vector<LoadedExample> LoadExamples(const Manifest &manifest) {
  std::vector<LoadedExample> out;
  out.reserve(manifest.entries.size());
  for (const auto &e : manifest.entries) out.push_back(LoadExample(manifest, e));
  return out;
}

}  // namespace mprnn
