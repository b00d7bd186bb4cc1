// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_MPRNN_BLOCK_H_
#define MPRNN_MPRNN_BLOCK_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mprnn/lstm.h"
#include "mprnn/ops.h"
#include "mprnn/param_store.h"
#include "mprnn/segmentation.h"

namespace mprnn {

// Stack of B blocks over an M-level segmentation; each block holds M + 1
// sub-modules, finest (level 1) to coarsest (level M + 1). M = 1 is DPRNN.
struct BlockConfig {
  int levels = 2;
  int64_t features = 64;
  int64_t hidden = 128;  // per direction
  std::vector<bool> bidirectional;  // M + 1 entries
  int blocks = 3;

  void Validate() const;
};

// Levels 1..M bidirectional; level M + 1 bidirectional only when offline.
std::vector<bool> DirectionalityFor(int levels, bool online);

// Moves the level-m time axis next to the feature axis:
// {N, K_1, ..., K_M, S_M} -> [N x steps x examples], remaining axes flattened
// in their original order (last fastest). For M = 2: m=1 -> N x K1 x (K2*S2),
// m=2 -> N x K2 x (K1*S2), m=3 -> N x S2 x (K1*K2).
template <typename T>
Tensor<T> LevelView(const Tensor<T> &hier, int level);

// Inverse of LevelView; hier_shape is the shape of the original tensor.
template <typename T>
Tensor<T> InverseLevelView(const Tensor<T> &view, int level, const Shape &hier_shape);

template <typename T>
struct LstmParams {
  Param<T> *w_ih = nullptr;
  Param<T> *w_hh = nullptr;
  Param<T> *bias = nullptr;

  LstmWeights<T> weights() const { return {&w_ih->value, &w_hh->value, &bias->value}; }
  LstmGrads<T> grads() const { return {&w_ih->grad, &w_hh->grad, &bias->grad}; }
};

template <typename T>
struct SubModule {
  int level = 1;
  bool bidirectional = true;
  LstmParams<T> fwd;
  LstmParams<T> bwd;  // unused when unidirectional
  Param<T> *fc_weight = nullptr;  // [N x H] or [N x 2H]
  Param<T> *fc_bias = nullptr;    // [N]
  Param<T> *ln_gain = nullptr;    // [N]
  Param<T> *ln_bias = nullptr;    // [N]
};

template <typename T>
using Block = std::vector<SubModule<T>>;

template <typename T>
struct SubModuleCache {
  LstmCache<T> fwd;
  LstmCache<T> bwd;
  Tensor<T> rnn_out;
  LayerNormCache<T> ln;
};

template <typename T>
using BlockCache = std::vector<SubModuleCache<T>>;

// Registers "block<b>/sub<m>/..." parameters for every block and returns
// bound handles. Values are zero until InitBlocks is called.
template <typename T>
std::vector<Block<T>> RegisterBlocks(ParamStore<T> &store, const BlockConfig &config,
                                     const std::string &prefix = "");

// LSTM weights uniform in +-1/sqrt(H), forget-gate bias 1, FC uniform in
// +-1/sqrt(fan_in) with zero bias, LN gain 1 and bias 0.
template <typename T>
void InitBlocks(std::vector<Block<T>> &blocks, std::mt19937_64 &rng);

// out = in + InverseLevelView(LN(FC(RNN(LevelView(in, m))))).
template <typename T>
Tensor<T> SubModuleForward(const Tensor<T> &in, const SubModule<T> &sub,
                           SubModuleCache<T> *cache = nullptr);

template <typename T>
Tensor<T> SubModuleBackward(const SubModule<T> &sub, const SubModuleCache<T> &cache,
                            const Tensor<T> &dout);

// Sub-modules applied finest to coarsest.
template <typename T>
Tensor<T> BlockForward(const Tensor<T> &in, const Block<T> &block,
                       BlockCache<T> *cache = nullptr);

template <typename T>
Tensor<T> BlockBackward(const Block<T> &block, const BlockCache<T> &cache,
                        const Tensor<T> &dout);

// Trainable scalars of one sub-module:
// LSTM D * 4(H(N+H) + H), FC (D*H*N + N), LN 2N, D = 1 or 2.
int64_t SubModuleParamCount(int64_t features, int64_t hidden, bool bidirectional);
int64_t BlockStackParamCount(const BlockConfig &config);

}  // namespace mprnn

#endif  // MPRNN_MPRNN_BLOCK_H_
