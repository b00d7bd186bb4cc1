// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_PARAM_STORE_H_
#define MPRNN_PARAM_STORE_H_

#include <map>
#include <string>

#include "mprnn/tensor.h"

namespace mprnn {

template <typename T>
struct Param {
  Tensor<T> value;
  Tensor<T> grad;
};

// Named trainable arrays. Iteration is in name order, so it depends only on
// the set of names, never on registration order. Param addresses are stable
// for the lifetime of the store.
template <typename T>
class ParamStore {
 public:
  using Map = std::map<std::string, Param<T>>;

  ParamStore() = default;
  ParamStore(const ParamStore &) = delete;
  ParamStore &operator=(const ParamStore &) = delete;
  ParamStore(ParamStore &&) = default;
  ParamStore &operator=(ParamStore &&) = default;

  Param<T> &Add(const std::string &name, Tensor<T> value) {
    MPRNN_CHECK(!entries_.contains(name), "duplicate parameter name " << name);
    Tensor<T> grad(value.shape());
    auto [it, ok] = entries_.emplace(name, Param<T>{std::move(value), std::move(grad)});
    return it->second;
  }

  bool Contains(const std::string &name) const { return entries_.contains(name); }

  Param<T> &Get(const std::string &name) {
    auto it = entries_.find(name);
    MPRNN_CHECK(it != entries_.end(), "unknown parameter name " << name);
    return it->second;
  }
  const Param<T> &Get(const std::string &name) const {
    auto it = entries_.find(name);
    MPRNN_CHECK(it != entries_.end(), "unknown parameter name " << name);
    return it->second;
  }

  void ZeroGrad() {
    for (auto &[name, p] : entries_) p.grad.SetZero();
  }

  int64_t NumScalars() const {
    int64_t n = 0;
    for (const auto &[name, p] : entries_) n += p.value.size();
    return n;
  }

  size_t size() const { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  Map entries_;
};

// L2 norm over every gradient in the store.
template <typename T>
double GradNorm(const ParamStore<T> &store) {
  double sq = 0;
  for (const auto &[name, p] : store) {
    for (T g : p.grad.values()) sq += static_cast<double>(g) * g;
  }
  return std::sqrt(sq);
}

// Rescales gradients so their global norm is at most max_norm. Returns the
// norm before clipping.
template <typename T>
double ClipGradNorm(ParamStore<T> &store, double max_norm) {
  const double norm = GradNorm(store);
  if (max_norm > 0 && norm > max_norm) {
    const T scale = static_cast<T>(max_norm / norm);
    for (auto &[name, p] : store) {
      for (T &g : p.grad.values()) g *= scale;
    }
  }
  return norm;
}

template <typename T>
bool AllParamsFinite(const ParamStore<T> &store, std::string *first_bad = nullptr) {
  for (const auto &[name, p] : store) {
    if (!AllFinite(p.value.values())) {
      if (first_bad) *first_bad = name;
      return false;
    }
  }
  return true;
}

}  // namespace mprnn

#endif  // MPRNN_PARAM_STORE_H_
