// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_TENSOR_H_
#define MPRNN_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mprnn/error.h"

namespace mprnn {

using Shape = std::vector<int64_t>;

// 64-byte aligned storage. Vectorized kernels split work by pointer
// alignment, so a fixed alignment keeps results bit-identical across runs.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlign{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U> &) {}

  T *allocate(size_t n) { return static_cast<T *>(::operator new(n * sizeof(T), kAlign)); }
  void deallocate(T *p, size_t) { ::operator delete(p, kAlign); }

  template <typename U>
  bool operator==(const AlignedAllocator<U> &) const { return true; }
};

template <typename T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

inline int64_t NumElements(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), int64_t{1},
                         std::multiplies<int64_t>());
}

std::string ShapeString(const Shape &shape);

// Dense row-major array, last index fastest. Axis 0 is the feature axis for
// every tensor that flows between layers.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0)) : shape_(std::move(shape)) {
    CheckShape();
    data_.assign(static_cast<size_t>(NumElements(shape_)), fill);
  }
  Tensor(Shape shape, std::initializer_list<T> data)
      : Tensor(std::move(shape), AlignedVector<T>(data)) {}
  Tensor(Shape shape, const std::vector<T> &data)
      : Tensor(std::move(shape), AlignedVector<T>(data.begin(), data.end())) {}
  Tensor(Shape shape, AlignedVector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    CheckShape();
    MPRNN_CHECK(static_cast<int64_t>(data_.size()) == NumElements(shape_),
                "tensor data length " << data_.size() << " does not match shape "
                                      << ShapeString(shape_));
  }

  const Shape &shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int axis) const { return shape_.at(static_cast<size_t>(axis)); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T *data() { return data_.data(); }
  const T *data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  AlignedVector<T> &storage() { return data_; }
  const AlignedVector<T> &storage() const { return data_; }
  std::vector<T> ToVector() const { return std::vector<T>(data_.begin(), data_.end()); }

  T &operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T &operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  template <typename... Idx>
  T &operator()(Idx... idx) {
    return data_[static_cast<size_t>(Offset({static_cast<int64_t>(idx)...}))];
  }
  template <typename... Idx>
  const T &operator()(Idx... idx) const {
    return data_[static_cast<size_t>(Offset({static_cast<int64_t>(idx)...}))];
  }

  int64_t Offset(std::initializer_list<int64_t> idx) const {
    MPRNN_CHECK(idx.size() == shape_.size(), "index rank mismatch");
    int64_t off = 0;
    size_t axis = 0;
    for (int64_t i : idx) off = off * shape_[axis++] + i;
    return off;
  }

  // Same memory order, new extents.
  Tensor Reshape(Shape shape) const {
    MPRNN_CHECK(NumElements(shape) == size(),
                "cannot reshape " << ShapeString(shape_) << " to "
                                  << ShapeString(shape));
    return Tensor(std::move(shape), data_);
  }

  void Fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void SetZero() { Fill(T(0)); }

  template <typename U>
  Tensor<U> Cast() const {
    AlignedVector<U> out(data_.begin(), data_.end());
    return Tensor<U>(shape_, std::move(out));
  }

  Tensor &operator+=(const Tensor &other) {
    MPRNN_CHECK(shape_ == other.shape_, "shape mismatch in +=: "
                                            << ShapeString(shape_) << " vs "
                                            << ShapeString(other.shape_));
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  bool operator==(const Tensor &other) const = default;

 private:
  void CheckShape() const {
    for (int64_t d : shape_) {
      MPRNN_CHECK(d > 0, "tensor extents must be positive, got "
                             << ShapeString(shape_));
    }
  }

  Shape shape_;
  AlignedVector<T> data_;
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

// out.shape[i] = in.shape[perm[i]].
template <typename T>
Tensor<T> Permute(const Tensor<T> &in, std::span<const int> perm);

std::vector<int> InversePermutation(std::span<const int> perm);

// Reverses the middle axis of a [A x B x C] tensor.
template <typename T>
Tensor<T> ReverseAxis1(const Tensor<T> &in);

template <typename T>
T MaxAbsDiff(const Tensor<T> &a, const Tensor<T> &b) {
  MPRNN_CHECK(a.shape() == b.shape(), "shape mismatch");
  T m = 0;
  for (int64_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename T>
bool AllFinite(std::span<const T> v) {
  return std::all_of(v.begin(), v.end(), [](T x) { return std::isfinite(x); });
}

}  // namespace mprnn

#endif  // MPRNN_TENSOR_H_
