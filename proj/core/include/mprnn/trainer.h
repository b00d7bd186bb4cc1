// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_TRAINER_H_
#define MPRNN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mprnn/adam.h"
#include "mprnn/config.h"
#include "mprnn/manifest.h"
#include "mprnn/metrics.h"
#include "mprnn/separator.h"

namespace mprnn {

struct TrainConfig {
  int epochs = 150;
  double lr = 1e-3;
  int batch_size = 1;
  double clip_norm = 5.0;  // <= 0 disables clipping
  uint64_t seed = 0;       // example order
  Metric selection_metric = Metric::kSdSdr;
  bool halve_on_plateau = false;
  int plateau_patience = 3;
  // When set, best.ckpt, last.ckpt, train_log.csv and train_steps.dat are
  // rewritten after every epoch.
  std::string out_dir;

  // "train.*" keys: epochs, lr, batch_size, clip_norm, seed, metric,
  // lr_schedule (constant | halve_on_plateau), patience.
  static TrainConfig FromConfig(const KeyValueConfig &cfg);
  KeyValueConfig ToConfig() const;
  void Validate() const;
};

struct EpochRecord {
  int epoch = 0;            // 1-based
  double train_loss = 0;    // mean negative SD-SDR over the epoch's examples
  double val_score = 0;     // dB
  double lr = 0;
  double seconds = 0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::vector<double> step_losses;  // one per optimizer step
  int best_epoch = 0;               // 1-based; 0 until an epoch completes
  double best_score = 0;
  std::set<std::string> updated_ids;  // examples that contributed to a step

  // Keeps the earliest epoch among equal scores.
  void AddEpoch(const EpochRecord &r);
  std::string EpochsCsv() const;
  // Whitespace-separated "step loss" rows with a '#' header.
  std::string StepsTable() const;
};

using Validator = std::function<double(const Separator<float> &model, int epoch)>;

struct TrainResult {
  Separator<float> best;
  Separator<float> last;
  TrainLog log;
};

// Mean over examples of the best-permutation, speaker-averaged score.
double Validate(const Separator<float> &model, const std::vector<LoadedExample> &examples,
                Metric metric);

// One optimizer step on `batch`: forward, uPIT SD-SDR loss, backward, clip,
// Adam. Returns the mean loss. Throws NumericError naming the example whose
// loss is not finite; parameters are untouched in that case.
double TrainStep(Separator<float> &model, AdamState<float> &adam,
                 const std::vector<const LoadedExample *> &batch, double clip_norm,
                 double *pre_clip_norm = nullptr);

// `validator` replaces Validate(model, val, metric) when set.
TrainResult Train(const ModelConfig &model_config, const TrainConfig &config,
                  const std::vector<LoadedExample> &train,
                  const std::vector<LoadedExample> &val, const Validator &validator = {});

struct OverfitResult {
  TrainLog log;
  double final_sd_sdr = 0;  // speaker-averaged best-permutation SD-SDR after the last step
  int first_step_above = -1;  // first step count whose score exceeds `target_db`
};

// Repeated steps on one example. Stops early once the score exceeds
// target_db when stop_at_target is set.
OverfitResult OverfitSingleBatch(const ModelConfig &model_config, const LoadedExample &example,
                                 int steps, const TrainConfig &config, double target_db = 20.0,
                                 bool stop_at_target = false);

std::vector<LoadedExample> LoadExamples(const Manifest &manifest);

}  // namespace mprnn

#endif  // MPRNN_TRAINER_H_
