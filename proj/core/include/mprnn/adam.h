// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_ADAM_H_
#define MPRNN_ADAM_H_

#include <cmath>
#include <map>
#include <string>

#include "mprnn/param_store.h"

namespace mprnn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamOptions options;
  int64_t step = 0;
  std::map<std::string, Tensor<T>> first_moment;
  std::map<std::string, Tensor<T>> second_moment;
};

// One bias-corrected Adam update over every parameter in the store, then
// zeroes the gradients.
template <typename T>
void AdamStep(ParamStore<T> &store, AdamState<T> &state) {
  const AdamOptions &o = state.options;
  ++state.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (auto &[name, p] : store) {
    auto [mit, m_new] = state.first_moment.try_emplace(name, p.value.shape());
    auto [vit, v_new] = state.second_moment.try_emplace(name, p.value.shape());
    Tensor<T> &m = mit->second;
    Tensor<T> &v = vit->second;
    MPRNN_CHECK(m.shape() == p.value.shape(), "adam moment shape mismatch for " << name);
    for (int64_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      const double mi = o.beta1 * m[i] + (1.0 - o.beta1) * g;
      const double vi = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = o.lr * (mi / bc1) / (std::sqrt(vi / bc2) + o.epsilon);
      p.value[i] = static_cast<T>(p.value[i] - update);
    }
    p.grad.SetZero();
  }
}

}  // namespace mprnn

#endif  // MPRNN_ADAM_H_
