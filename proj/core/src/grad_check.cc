// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/grad_check.h"

#include <algorithm>
#include <cmath>

namespace mprnn {

GradCheckResult GradCheck(const std::function<double()> &loss,
                          std::span<const GradCheckTarget> targets,
                          const GradCheckOptions &options) {
  GradCheckResult result;
  for (const GradCheckTarget &target : targets) {
    MPRNN_CHECK(target.value && target.analytic, "grad check target " << target.name
                                                                      << " not bound");
    MPRNN_CHECK(target.value->shape() == target.analytic->shape(),
                "grad check shape mismatch for " << target.name);
    const int64_t n = target.value->size();
    int64_t stride = 1;
    if (options.max_coords > 0 && n > options.max_coords) {
      stride = (n + options.max_coords - 1) / options.max_coords;
    }
    for (int64_t i = 0; i < n; i += stride) {
      double &x = (*target.value)[i];
      const double saved = x;
      const double analytic = (*target.analytic)[i];
      auto central = [&](double h) {
        x = saved + h;
        const double up = loss();
        x = saved - h;
        const double down = loss();
        x = saved;
        return (up - down) / (2 * h);
      };
      auto rel_error = [&](double numeric) {
        const double denom =
            std::max({std::abs(analytic), std::abs(numeric), options.abs_floor});
        return std::abs(analytic - numeric) / denom;
      };
      double numeric = central(options.step);
      double rel = rel_error(numeric);
      double h = options.step;
      for (int k = 0; k < options.refinements && rel > options.tolerance; ++k) {
        h /= 10;
        const double refined = central(h);
        if (rel_error(refined) < rel) {
          numeric = refined;
          rel = rel_error(refined);
        }
        if (rel <= options.tolerance) ++result.coords_refined;
      }
      ++result.coords_checked;
      if (rel > result.max_rel_error || result.worst_index < 0) {
        result.max_rel_error = rel;
        result.worst_target = target.name;
        result.worst_index = i;
        result.worst_analytic = analytic;
        result.worst_numeric = numeric;
      }
    }
  }
  result.passed = result.max_rel_error <= options.tolerance;
  return result;
}

}  // namespace mprnn
