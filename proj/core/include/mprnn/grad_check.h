// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_GRAD_CHECK_H_
#define MPRNN_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "mprnn/tensor.h"

namespace mprnn {

// A tensor perturbed in place by the checker, with the analytic gradient of
// the loss with respect to it.
struct GradCheckTarget {
  std::string name;
  Tensor<double> *value = nullptr;
  const Tensor<double> *analytic = nullptr;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // |a - n| / max(|a|, |n|, abs_floor); keeps near-zero gradients from
  // dominating through round-off alone.
  double abs_floor = 1e-6;
  // Per-target cap on checked coordinates (evenly spread); <= 0 checks all.
  int64_t max_coords = 0;
  // A coordinate outside tolerance is re-measured with step/10, step/100, ...
  // this many times. A kink closer than `step` spoils one difference but not
  // the smaller ones; a wrong analytic gradient disagrees at every step.
  int refinements = 0;
};

struct GradCheckResult {
  bool passed = false;
  double max_rel_error = 0;
  std::string worst_target;
  int64_t worst_index = -1;
  double worst_analytic = 0;
  double worst_numeric = 0;
  int64_t coords_checked = 0;
  int64_t coords_refined = 0;  // passed only after a smaller step
};

// Central differences of loss() against every target. loss must read the
// current target values each time it is called.
GradCheckResult GradCheck(const std::function<double()> &loss,
                          std::span<const GradCheckTarget> targets,
                          const GradCheckOptions &options = {});

}  // namespace mprnn

#endif  // MPRNN_GRAD_CHECK_H_
