// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_EVAL_REPORT_H_
#define MPRNN_EVAL_REPORT_H_

#include <functional>
#include <string>
#include <vector>

#include "mprnn/manifest.h"
#include "mprnn/metrics.h"
#include "mprnn/separator.h"

namespace mprnn {

// Report columns: "si-sdr", "sd-sdr", "bss-sdr" (best-permutation mean over
// speakers) and "si-sdri" (si-sdr minus the si-sdr of the unprocessed
// mixture).
std::vector<std::string> ParseMetricList(const std::string &csv);

struct EvalExample {
  std::string id;
  std::string separator;
  std::string framework;
  double duration_s = 0;
  std::vector<double> scores;  // aligned with EvalReport::metrics
};

struct EvalCell {
  std::string separator;
  std::string framework;
  double duration_s = 0;
  int64_t count = 0;
  std::vector<double> means;
};

struct EvalReport {
  std::vector<std::string> metrics;
  std::vector<EvalExample> examples;
  std::vector<EvalCell> cells;  // sorted by (separator, framework, duration)

  // Recomputes `cells` from `examples`.
  void Aggregate();
  void Merge(const EvalReport &other);
  std::string CellsCsv() const;
  std::string ExamplesCsv() const;
  std::string Table() const;
};

using Estimator =
    std::function<std::vector<std::vector<float>>(const LoadedExample &example)>;

struct EvalOptions {
  std::vector<std::string> metrics = {"si-sdr", "sd-sdr"};
  int jobs = 1;
  std::string separator = "?";
  std::string framework = "?";
};

// Scores one example's estimates against its references.
EvalExample ScoreExample(const LoadedExample &example,
                         const std::vector<std::vector<float>> &estimates,
                         const std::vector<std::string> &metrics);

// Loads every entry first; unreadable entries abort with an IoError that
// lists all offenders. Results do not depend on `jobs`.
EvalReport EvaluateManifest(const Manifest &manifest, const Estimator &estimator,
                            const EvalOptions &options);

EvalReport EvaluateModel(const Separator<float> &model, const Manifest &manifest,
                         EvalOptions options);

// Returns the references themselves: every score sits at the cap.
Estimator OracleEstimator();

}  // namespace mprnn

#endif  // MPRNN_EVAL_REPORT_H_
