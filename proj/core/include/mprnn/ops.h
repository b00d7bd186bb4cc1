// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_OPS_H_
#define MPRNN_OPS_H_

#include "mprnn/tensor.h"

namespace mprnn {

// Differentiable primitives. Every *Backward function returns the gradient
// with respect to the op input and accumulates (+=) parameter gradients into
// the tensors passed by reference.

// x: [C_in x T], kernel: [C_out x C_in x W] -> [C_out x L]. With pad_end the
// input is zero-extended so that L = ceil(T / stride); otherwise
// L = floor((T - W) / stride) + 1.
int64_t Conv1dOutputLength(int64_t input_len, int64_t width, int stride,
                           bool pad_end);

template <typename T>
Tensor<T> Conv1d(const Tensor<T> &x, const Tensor<T> &kernel, int stride,
                 bool pad_end);

template <typename T>
Tensor<T> Conv1dBackward(const Tensor<T> &x, const Tensor<T> &kernel,
                         int stride, bool pad_end, const Tensor<T> &dy,
                         Tensor<T> &dkernel);

// y: [C_out x L], kernel: [C_out x C_in x W] -> [C_in x ((L-1)*stride + W)].
// Exact adjoint of the unpadded Conv1d.
template <typename T>
Tensor<T> ConvTranspose1d(const Tensor<T> &y, const Tensor<T> &kernel,
                          int stride);

template <typename T>
Tensor<T> ConvTranspose1dBackward(const Tensor<T> &y, const Tensor<T> &kernel,
                                  int stride, const Tensor<T> &dout,
                                  Tensor<T> &dkernel);

// x: [D_in x ...] treated as [D_in x S]; weight: [D_out x D_in]; bias: [D_out].
// Output keeps the trailing extents of x.
template <typename T>
Tensor<T> Linear(const Tensor<T> &x, const Tensor<T> &weight,
                 const Tensor<T> &bias);

template <typename T>
Tensor<T> LinearBackward(const Tensor<T> &x, const Tensor<T> &weight,
                         const Tensor<T> &dy, Tensor<T> &dweight,
                         Tensor<T> &dbias);

template <typename T>
struct LayerNormCache {
  Tensor<T> normalized;           // pre-affine values, same shape as x
  std::vector<T> inv_std;         // one per position
};

inline constexpr double kLayerNormEps = 1e-8;

// Normalizes over axis 0 independently at every remaining index position,
// using the population variance.
template <typename T>
Tensor<T> LayerNorm(const Tensor<T> &x, const Tensor<T> &gain,
                    const Tensor<T> &bias, T eps = T(kLayerNormEps),
                    LayerNormCache<T> *cache = nullptr);

template <typename T>
Tensor<T> LayerNormBackward(const LayerNormCache<T> &cache,
                            const Tensor<T> &gain, const Tensor<T> &dy,
                            Tensor<T> &dgain, Tensor<T> &dbias);

enum class Activation { kRelu, kPrelu, kSigmoid, kTanh };

// prelu_slope is only read for kPrelu.
template <typename T>
Tensor<T> Pointwise(const Tensor<T> &x, Activation fn, T prelu_slope = T(0));

// dprelu_slope may be null unless fn is kPrelu.
template <typename T>
Tensor<T> PointwiseBackward(const Tensor<T> &x, Activation fn,
                            const Tensor<T> &dy, T prelu_slope = T(0),
                            T *dprelu_slope = nullptr);

template <typename T>
T Relu(T v) {
  return v > T(0) ? v : T(0);
}

template <typename T>
T Sigmoid(T v) {
  return T(1) / (T(1) + std::exp(-v));
}

}  // namespace mprnn

#endif  // MPRNN_OPS_H_
