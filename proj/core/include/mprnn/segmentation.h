// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_SEGMENTATION_H_
#define MPRNN_SEGMENTATION_H_

#include <cstdint>
#include <vector>

#include "mprnn/tensor.h"

namespace mprnn {

// Per-level chunk lengths and hops. Level 1 counts frames; level m > 1 counts
// whole level-(m-1) chunks.
struct SegConfig {
  std::vector<int64_t> chunk;
  std::vector<int64_t> hop;

  int levels() const { return static_cast<int>(chunk.size()); }
  void Validate() const;

  static SegConfig Dprnn() { return {{100}, {50}}; }
  static SegConfig Mprnn() { return {{100, 60}, {50, 30}}; }
};

// Shape plan for one input length. counts[m-1] = S_m = ceil(S_{m-1} / P_m)
// with S_0 = frames; padding[m-1] is the number of zero elements appended at
// level m so that the padded length equals (S_m - 1) * P_m + K_m.
struct SegMeta {
  int64_t frames = 0;
  int64_t features = 0;
  std::vector<int64_t> chunk;
  std::vector<int64_t> hop;
  std::vector<int64_t> counts;
  std::vector<int64_t> padding;

  int levels() const { return static_cast<int>(chunk.size()); }
  // Length of the level-m sequence before chunking (S_{m-1}); m is 1-based.
  int64_t InputLength(int level) const {
    return level == 1 ? frames : counts[static_cast<size_t>(level - 2)];
  }
  int64_t PaddedLength(int level) const {
    const size_t i = static_cast<size_t>(level - 1);
    return (counts[i] - 1) * hop[i] + chunk[i];
  }
  // {N, K_1, ..., K_M, S_M}
  Shape TensorShape() const;

  bool operator==(const SegMeta &) const = default;
};

SegMeta Plan(int64_t frames, const SegConfig &config, int64_t features = 1);

template <typename T>
struct HierTensor {
  Tensor<T> data;  // TensorShape() of meta
  SegMeta meta;
};

// W: [N x L]. Level-1 chunk s holds frames [s*P_1, s*P_1 + K_1), zero past L;
// coarser levels group the previous level's chunks the same way.
template <typename T>
HierTensor<T> Segment(const Tensor<T> &frames, const SegConfig &config);

// Overlap-add at every level, dividing by the per-element contribution
// count, then trimming to L. Left inverse of Segment.
template <typename T>
Tensor<T> Merge(const HierTensor<T> &segmented);

// Adjoints, used for backpropagation.
template <typename T>
Tensor<T> SegmentAdjoint(const Tensor<T> &grad, const SegMeta &meta);
template <typename T>
Tensor<T> MergeAdjoint(const Tensor<T> &grad, const SegMeta &meta);

// Frame index (or -1 for padding) of every HierTensor position along the
// chunk axes, in row-major order over {K_1, ..., K_M, S_M}.
std::vector<int64_t> FrameIndexMap(const SegMeta &meta);

}  // namespace mprnn

#endif  // MPRNN_SEGMENTATION_H_
