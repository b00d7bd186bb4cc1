// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/mprnn_block.h"

#include <cmath>

namespace mprnn {

void BlockConfig::Validate() const {
  MPRNN_CHECK(levels >= 1, "levels must be >= 1, got " << levels);
  MPRNN_CHECK(features >= 1 && hidden >= 1, "feature and hidden dims must be positive");
  MPRNN_CHECK(blocks >= 1, "need at least one block, got " << blocks);
  MPRNN_CHECK(static_cast<int>(bidirectional.size()) == levels + 1,
              "directionality list needs " << levels + 1 << " entries, got "
                                           << bidirectional.size());
}

std::vector<bool> DirectionalityFor(int levels, bool online) {
  std::vector<bool> dirs(static_cast<size_t>(levels + 1), true);
  if (online) dirs.back() = false;
  return dirs;
}

namespace {

std::vector<int> ViewPermutation(int rank, int level) {
  MPRNN_CHECK(level >= 1 && level <= rank - 1,
              "level " << level << " out of range [1, " << rank - 1 << "]");
  std::vector<int> perm = {0, level};
  for (int a = 1; a < rank; ++a) {
    if (a != level) perm.push_back(a);
  }
  return perm;
}

}  // namespace

template <typename T>
Tensor<T> LevelView(const Tensor<T> &hier, int level) {
  const std::vector<int> perm = ViewPermutation(hier.rank(), level);
  Tensor<T> p = Permute(hier, perm);
  const int64_t n = hier.dim(0), steps = hier.dim(level);
  return p.Reshape({n, steps, hier.size() / (n * steps)});
}

template <typename T>
Tensor<T> InverseLevelView(const Tensor<T> &view, int level, const Shape &hier_shape) {
  const int rank = static_cast<int>(hier_shape.size());
  const std::vector<int> perm = ViewPermutation(rank, level);
  MPRNN_CHECK(view.size() == NumElements(hier_shape), "level view size mismatch");
  Shape permuted(rank);
  for (int i = 0; i < rank; ++i) permuted[i] = hier_shape[perm[i]];
  const std::vector<int> inv = InversePermutation(perm);
  return Permute(view.Reshape(permuted), inv);
}

template <typename T>
std::vector<Block<T>> RegisterBlocks(ParamStore<T> &store, const BlockConfig &config,
                                     const std::string &prefix) {
  config.Validate();
  const int64_t n = config.features, h = config.hidden;
  auto add = [&](const std::string &name, Shape shape) {
    return &store.Add(prefix + name, Tensor<T>(std::move(shape)));
  };
  auto add_lstm = [&](const std::string &base) {
    LstmParams<T> p;
    p.w_ih = add(base + "/w_ih", {4 * h, n});
    p.w_hh = add(base + "/w_hh", {4 * h, h});
    p.bias = add(base + "/bias", {4 * h});
    return p;
  };
  std::vector<Block<T>> blocks;
  for (int b = 0; b < config.blocks; ++b) {
    Block<T> block;
    for (int m = 1; m <= config.levels + 1; ++m) {
      const std::string base = "block" + std::to_string(b) + "/sub" + std::to_string(m);
      SubModule<T> sub;
      sub.level = m;
      sub.bidirectional = config.bidirectional[static_cast<size_t>(m - 1)];
      sub.fwd = add_lstm(base + "/rnn_fwd");
      if (sub.bidirectional) sub.bwd = add_lstm(base + "/rnn_bwd");
      const int64_t rnn_out = sub.bidirectional ? 2 * h : h;
      sub.fc_weight = add(base + "/fc/weight", {n, rnn_out});
      sub.fc_bias = add(base + "/fc/bias", {n});
      sub.ln_gain = add(base + "/ln/gain", {n});
      sub.ln_bias = add(base + "/ln/bias", {n});
      block.push_back(sub);
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

namespace {

template <typename T>
void FillUniform(Tensor<T> &t, double bound, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (T &v : t.values()) v = static_cast<T>(dist(rng));
}

template <typename T>
void InitLstm(const LstmParams<T> &p, std::mt19937_64 &rng) {
  const int64_t h = p.w_hh->value.dim(1);
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  FillUniform(p.w_ih->value, bound, rng);
  FillUniform(p.w_hh->value, bound, rng);
  p.bias->value.SetZero();
  for (int64_t i = h; i < 2 * h; ++i) p.bias->value[i] = T(1);
}

}  // namespace

template <typename T>
void InitBlocks(std::vector<Block<T>> &blocks, std::mt19937_64 &rng) {
  for (Block<T> &block : blocks) {
    for (SubModule<T> &sub : block) {
      InitLstm(sub.fwd, rng);
      if (sub.bidirectional) InitLstm(sub.bwd, rng);
      const double fan_in = static_cast<double>(sub.fc_weight->value.dim(1));
      FillUniform(sub.fc_weight->value, 1.0 / std::sqrt(fan_in), rng);
      sub.fc_bias->value.SetZero();
      sub.ln_gain->value.Fill(T(1));
      sub.ln_bias->value.SetZero();
    }
  }
}

template <typename T>
Tensor<T> SubModuleForward(const Tensor<T> &in, const SubModule<T> &sub,
                           SubModuleCache<T> *cache) {
  MPRNN_CHECK(in.dim(0) == sub.fc_weight->value.dim(0),
              "sub-module feature extent mismatch: input " << ShapeString(in.shape()));
  const Tensor<T> view = LevelView(in, sub.level);
  Tensor<T> rnn_out;
  if (sub.bidirectional) {
    rnn_out = BiLstmForward(view, sub.fwd.weights(), sub.bwd.weights(),
                            cache ? &cache->fwd : nullptr, cache ? &cache->bwd : nullptr);
  } else {
    rnn_out = LstmForward(view, sub.fwd.weights(), Direction::kForward,
                          cache ? &cache->fwd : nullptr);
  }
  Tensor<T> projected = Linear(rnn_out, sub.fc_weight->value, sub.fc_bias->value);
  Tensor<T> normed = LayerNorm(projected, sub.ln_gain->value, sub.ln_bias->value,
                               T(kLayerNormEps), cache ? &cache->ln : nullptr);
  Tensor<T> out = InverseLevelView(normed, sub.level, in.shape());
  out += in;
  if (cache) cache->rnn_out = std::move(rnn_out);
  return out;
}

template <typename T>
Tensor<T> SubModuleBackward(const SubModule<T> &sub, const SubModuleCache<T> &cache,
                            const Tensor<T> &dout) {
  const Tensor<T> dnormed = LevelView(dout, sub.level);
  const Tensor<T> dprojected = LayerNormBackward(cache.ln, sub.ln_gain->value, dnormed,
                                                 sub.ln_gain->grad, sub.ln_bias->grad);
  const Tensor<T> drnn = LinearBackward(cache.rnn_out, sub.fc_weight->value, dprojected,
                                        sub.fc_weight->grad, sub.fc_bias->grad);
  Tensor<T> dview;
  if (sub.bidirectional) {
    dview = BiLstmBackward(cache.fwd, cache.bwd, sub.fwd.weights(), sub.bwd.weights(),
                           drnn, sub.fwd.grads(), sub.bwd.grads());
  } else {
    dview = LstmBackward(cache.fwd, sub.fwd.weights(), drnn, sub.fwd.grads());
  }
  Tensor<T> din = InverseLevelView(dview, sub.level, dout.shape());
  din += dout;
  return din;
}

template <typename T>
Tensor<T> BlockForward(const Tensor<T> &in, const Block<T> &block, BlockCache<T> *cache) {
  if (cache) cache->assign(block.size(), SubModuleCache<T>{});
  Tensor<T> cur = in;
  for (size_t i = 0; i < block.size(); ++i) {
    cur = SubModuleForward(cur, block[i], cache ? &(*cache)[i] : nullptr);
  }
  return cur;
}

template <typename T>
Tensor<T> BlockBackward(const Block<T> &block, const BlockCache<T> &cache,
                        const Tensor<T> &dout) {
  MPRNN_CHECK(cache.size() == block.size(), "block cache does not match block");
  Tensor<T> grad = dout;
  for (size_t i = block.size(); i-- > 0;) {
    grad = SubModuleBackward(block[i], cache[i], grad);
  }
  return grad;
}

int64_t SubModuleParamCount(int64_t features, int64_t hidden, bool bidirectional) {
  const int64_t dirs = bidirectional ? 2 : 1;
  const int64_t lstm = dirs * 4 * (hidden * (features + hidden) + hidden);
  const int64_t fc = dirs * hidden * features + features;
  const int64_t ln = 2 * features;
  return lstm + fc + ln;
}

int64_t BlockStackParamCount(const BlockConfig &config) {
  config.Validate();
  int64_t per_block = 0;
  for (bool bi : config.bidirectional) {
    per_block += SubModuleParamCount(config.features, config.hidden, bi);
  }
  return per_block * config.blocks;
}

#define MPRNN_INSTANTIATE_BLOCK(T)                                                   \
  template Tensor<T> LevelView(const Tensor<T> &, int);                              \
  template Tensor<T> InverseLevelView(const Tensor<T> &, int, const Shape &);        \
  template std::vector<Block<T>> RegisterBlocks(ParamStore<T> &, const BlockConfig &,\
                                                const std::string &);                \
  template void InitBlocks(std::vector<Block<T>> &, std::mt19937_64 &);              \
  template Tensor<T> SubModuleForward(const Tensor<T> &, const SubModule<T> &,       \
                                      SubModuleCache<T> *);                          \
  template Tensor<T> SubModuleBackward(const SubModule<T> &, const SubModuleCache<T> &,\
                                       const Tensor<T> &);                           \
  template Tensor<T> BlockForward(const Tensor<T> &, const Block<T> &, BlockCache<T> *);\
  template Tensor<T> BlockBackward(const Block<T> &, const BlockCache<T> &,          \
                                   const Tensor<T> &);

MPRNN_INSTANTIATE_BLOCK(float)
MPRNN_INSTANTIATE_BLOCK(double)

}  // namespace mprnn
