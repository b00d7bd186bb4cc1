// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/tensor.h"

#include <sstream>

namespace mprnn {

std::string ShapeString(const Shape &shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

std::vector<int> InversePermutation(std::span<const int> perm) {
  std::vector<int> inv(perm.size(), -1);
  for (size_t i = 0; i < perm.size(); ++i) {
    const int p = perm[i];
    MPRNN_CHECK(p >= 0 && p < static_cast<int>(perm.size()) && inv[p] < 0,
                "not a permutation");
    inv[static_cast<size_t>(p)] = static_cast<int>(i);
  }
  return inv;
}

template <typename T>
Tensor<T> Permute(const Tensor<T> &in, std::span<const int> perm) {
  const int rank = in.rank();
  MPRNN_CHECK(static_cast<int>(perm.size()) == rank, "permutation rank mismatch");
  InversePermutation(perm);  // validates

  bool identity = true;
  for (int i = 0; i < rank; ++i) identity &= perm[i] == i;
  if (identity) return in;

  Shape out_shape(rank);
  std::vector<int64_t> in_strides(rank), strides(rank);
  int64_t s = 1;
  for (int i = rank - 1; i >= 0; --i) {
    in_strides[i] = s;
    s *= in.dim(i);
  }
  for (int i = 0; i < rank; ++i) {
    out_shape[i] = in.dim(perm[i]);
    strides[i] = in_strides[perm[i]];
  }
  Tensor<T> out(out_shape);

  // Odometer over the output; innermost axis handled as a strided copy.
  const int64_t inner = out_shape[rank - 1];
  const int64_t inner_stride = strides[rank - 1];
  std::vector<int64_t> idx(rank, 0);
  T *dst = out.data();
  const T *src = in.data();
  const int64_t outer = out.size() / inner;
  int64_t base = 0;
  for (int64_t o = 0; o < outer; ++o) {
    const T *p = src + base;
    for (int64_t k = 0; k < inner; ++k) dst[k] = p[k * inner_stride];
    dst += inner;
    for (int axis = rank - 2; axis >= 0; --axis) {
      base += strides[axis];
      if (++idx[axis] < out_shape[axis]) break;
      base -= strides[axis] * out_shape[axis];
      idx[axis] = 0;
    }
  }
  return out;
}

template <typename T>
Tensor<T> ReverseAxis1(const Tensor<T> &in) {
  MPRNN_CHECK(in.rank() == 3, "ReverseAxis1 expects rank 3");
  const int64_t a = in.dim(0), b = in.dim(1), c = in.dim(2);
  Tensor<T> out(in.shape());
  for (int64_t i = 0; i < a; ++i) {
    for (int64_t j = 0; j < b; ++j) {
      const T *src = in.data() + (i * b + j) * c;
      T *dst = out.data() + (i * b + (b - 1 - j)) * c;
      std::copy(src, src + c, dst);
    }
  }
  return out;
}

template Tensor<float> Permute(const Tensor<float> &, std::span<const int>);
template Tensor<double> Permute(const Tensor<double> &, std::span<const int>);
template Tensor<float> ReverseAxis1(const Tensor<float> &);
template Tensor<double> ReverseAxis1(const Tensor<double> &);

}  // namespace mprnn
