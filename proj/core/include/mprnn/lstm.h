// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_LSTM_H_
#define MPRNN_LSTM_H_

#include "mprnn/tensor.h"

namespace mprnn {

enum class Direction { kForward, kBackward };

// Gate rows are stacked [input; forget; cell; output], each H rows. A single
// bias vector is shared by the input and recurrent paths.
template <typename T>
struct LstmWeights {
  const Tensor<T> *w_ih = nullptr;  // [4H x N]
  const Tensor<T> *w_hh = nullptr;  // [4H x H]
  const Tensor<T> *bias = nullptr;  // [4H]

  int64_t hidden() const { return w_hh->dim(1); }
  int64_t input() const { return w_ih->dim(1); }
};

template <typename T>
struct LstmGrads {
  Tensor<T> *w_ih = nullptr;
  Tensor<T> *w_hh = nullptr;
  Tensor<T> *bias = nullptr;
};

template <typename T>
struct LstmCache {
  Direction direction = Direction::kForward;
  Tensor<T> x;      // [N x T x B], time-reversed for kBackward
  Tensor<T> gates;  // [4H x T x B], post-activation
  Tensor<T> cell;   // [H x T x B]
  Tensor<T> hidden; // [H x T x B]
};

// x: [N x T] (one sequence) or [N x T x B] (B independent sequences, zero
// initial state each). Returns [H x T] or [H x T x B]. kBackward runs over
// reversed time and un-reverses the output.
template <typename T>
Tensor<T> LstmForward(const Tensor<T> &x, const LstmWeights<T> &w,
                      Direction direction, LstmCache<T> *cache = nullptr);

// dh has the shape of the forward output. Returns dx.
template <typename T>
Tensor<T> LstmBackward(const LstmCache<T> &cache, const LstmWeights<T> &w,
                       const Tensor<T> &dh, const LstmGrads<T> &grads);

// Forward and backward passes concatenated along the feature axis:
// rows [0, H) forward, [H, 2H) backward.
template <typename T>
Tensor<T> BiLstmForward(const Tensor<T> &x, const LstmWeights<T> &fwd,
                        const LstmWeights<T> &bwd, LstmCache<T> *fwd_cache,
                        LstmCache<T> *bwd_cache);

template <typename T>
Tensor<T> BiLstmBackward(const LstmCache<T> &fwd_cache,
                         const LstmCache<T> &bwd_cache,
                         const LstmWeights<T> &fwd, const LstmWeights<T> &bwd,
                         const Tensor<T> &dh, const LstmGrads<T> &fwd_grads,
                         const LstmGrads<T> &bwd_grads);

}  // namespace mprnn

#endif  // MPRNN_LSTM_H_
