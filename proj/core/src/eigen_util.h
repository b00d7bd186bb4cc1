// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_SRC_EIGEN_UTIL_H_
#define MPRNN_SRC_EIGEN_UTIL_H_

#include <Eigen/Core>

#include "mprnn/tensor.h"

namespace mprnn::internal {

template <typename T>
using MatrixRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRM = Eigen::Map<MatrixRM<T>>;
template <typename T>
using ConstMapRM = Eigen::Map<const MatrixRM<T>>;
template <typename T>
using VecMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using ConstVecMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

// Views a tensor as [dim(0) x rest] row-major.
template <typename T>
ConstMapRM<T> AsMatrix(const Tensor<T> &t) {
  const int64_t rows = t.dim(0);
  return ConstMapRM<T>(t.data(), rows, t.size() / rows);
}

template <typename T>
MapRM<T> AsMatrix(Tensor<T> &t) {
  const int64_t rows = t.dim(0);
  return MapRM<T>(t.data(), rows, t.size() / rows);
}

template <typename T>
ConstVecMap<T> AsVector(const Tensor<T> &t) {
  return ConstVecMap<T>(t.data(), t.size());
}

template <typename T>
VecMap<T> AsVector(Tensor<T> &t) {
  return VecMap<T>(t.data(), t.size());
}

}  // namespace mprnn::internal

#endif  // MPRNN_SRC_EIGEN_UTIL_H_
