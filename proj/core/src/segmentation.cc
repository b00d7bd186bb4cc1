// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/segmentation.h"

namespace mprnn {

void SegConfig::Validate() const {
  MPRNN_CHECK(!chunk.empty(), "segmentation needs at least one level");
  MPRNN_CHECK(chunk.size() == hop.size(), "chunk and hop lists differ in length ("
                                              << chunk.size() << " vs "
                                              << hop.size() << ")");
  for (size_t m = 0; m < chunk.size(); ++m) {
    MPRNN_CHECK(hop[m] >= 1 && hop[m] <= chunk[m],
                "level " << m + 1 << ": need 1 <= hop <= chunk, got chunk "
                         << chunk[m] << " hop " << hop[m]);
  }
}

Shape SegMeta::TensorShape() const {
  Shape s;
  s.push_back(features);
  s.insert(s.end(), chunk.begin(), chunk.end());
  s.push_back(counts.back());
  return s;
}

SegMeta Plan(int64_t frames, const SegConfig &config, int64_t features) {
  MPRNN_CHECK(frames >= 1, "frame count must be positive, got " << frames);
  MPRNN_CHECK(features >= 1, "feature dim must be positive");
  config.Validate();
  SegMeta meta;
  meta.frames = frames;
  meta.features = features;
  meta.chunk = config.chunk;
  meta.hop = config.hop;
  int64_t prev = frames;
  for (int m = 0; m < config.levels(); ++m) {
    const int64_t s = (prev + config.hop[m] - 1) / config.hop[m];
    meta.counts.push_back(s);
    meta.padding.push_back((s - 1) * config.hop[m] + config.chunk[m] - prev);
    prev = s;
  }
  return meta;
}

namespace {

// in: [prefix x len] -> out: [prefix x K x S]; out[p,k,s] = in[p, s*P + k].
template <typename T>
std::vector<T> Chunk(const std::vector<T> &in, int64_t prefix, int64_t len,
                     int64_t k_len, int64_t hop, int64_t count) {
  std::vector<T> out(static_cast<size_t>(prefix * k_len * count), T(0));
  for (int64_t p = 0; p < prefix; ++p) {
    const T *src = in.data() + p * len;
    T *dst = out.data() + p * k_len * count;
    for (int64_t k = 0; k < k_len; ++k) {
      T *row = dst + k * count;
      for (int64_t s = 0; s < count; ++s) {
        const int64_t j = s * hop + k;
        if (j < len) row[s] = src[j];
      }
    }
  }
  return out;
}

// Adjoint of Chunk: out[p, s*P + k] += in[p,k,s] for indices inside len.
template <typename T>
std::vector<T> OverlapAdd(const std::vector<T> &in, int64_t prefix, int64_t len,
                          int64_t k_len, int64_t hop, int64_t count) {
  std::vector<T> out(static_cast<size_t>(prefix * len), T(0));
  for (int64_t p = 0; p < prefix; ++p) {
    const T *src = in.data() + p * k_len * count;
    T *dst = out.data() + p * len;
    for (int64_t k = 0; k < k_len; ++k) {
      const T *row = src + k * count;
      for (int64_t s = 0; s < count; ++s) {
        const int64_t j = s * hop + k;
        if (j < len) dst[j] += row[s];
      }
    }
  }
  return out;
}

// Number of (k, s) pairs covering each of the first len positions.
std::vector<int64_t> Coverage(int64_t len, int64_t k_len, int64_t hop,
                              int64_t count) {
  std::vector<int64_t> c(static_cast<size_t>(len), 0);
  for (int64_t s = 0; s < count; ++s) {
    for (int64_t k = 0; k < k_len; ++k) {
      const int64_t j = s * hop + k;
      if (j < len) ++c[static_cast<size_t>(j)];
    }
  }
  return c;
}

template <typename T>
void DivideByCoverage(std::vector<T> &v, int64_t prefix,
                      const std::vector<int64_t> &coverage) {
  const int64_t len = static_cast<int64_t>(coverage.size());
  for (int64_t p = 0; p < prefix; ++p) {
    T *row = v.data() + p * len;
    for (int64_t j = 0; j < len; ++j) row[j] /= static_cast<T>(coverage[j]);
  }
}

int64_t Prefix(const SegMeta &meta, int level) {
  int64_t p = meta.features;
  for (int m = 1; m < level; ++m) p *= meta.chunk[m - 1];
  return p;
}

void CheckMeta(const SegMeta &meta) {
  MPRNN_CHECK(meta.levels() >= 1 &&
                  meta.hop.size() == meta.chunk.size() &&
                  meta.counts.size() == meta.chunk.size() &&
                  meta.padding.size() == meta.chunk.size(),
              "inconsistent segmentation meta");
  MPRNN_CHECK(Plan(meta.frames, SegConfig{meta.chunk, meta.hop}, meta.features) == meta,
              "segmentation meta does not match its own plan");
}

}  // namespace

template <typename T>
HierTensor<T> Segment(const Tensor<T> &frames, const SegConfig &config) {
  MPRNN_CHECK(frames.rank() == 2, "segment expects [N x L], got "
                                      << ShapeString(frames.shape()));
  SegMeta meta = Plan(frames.dim(1), config, frames.dim(0));
  std::vector<T> cur = frames.ToVector();
  for (int m = 1; m <= meta.levels(); ++m) {
    cur = Chunk(cur, Prefix(meta, m), meta.InputLength(m), meta.chunk[m - 1],
                meta.hop[m - 1], meta.counts[m - 1]);
  }
  Tensor<T> data(meta.TensorShape(), std::move(cur));
  return {std::move(data), std::move(meta)};
}

template <typename T>
Tensor<T> Merge(const HierTensor<T> &segmented) {
  const SegMeta &meta = segmented.meta;
  CheckMeta(meta);
  MPRNN_CHECK(segmented.data.shape() == meta.TensorShape(),
              "tensor shape " << ShapeString(segmented.data.shape())
                              << " does not match meta "
                              << ShapeString(meta.TensorShape()));
  std::vector<T> cur = segmented.data.ToVector();
  for (int m = meta.levels(); m >= 1; --m) {
    const int64_t len = meta.InputLength(m);
    const int64_t prefix = Prefix(meta, m);
    cur = OverlapAdd(cur, prefix, len, meta.chunk[m - 1], meta.hop[m - 1],
                     meta.counts[m - 1]);
    DivideByCoverage(cur, prefix,
                     Coverage(len, meta.chunk[m - 1], meta.hop[m - 1],
                              meta.counts[m - 1]));
  }
  return Tensor<T>({meta.features, meta.frames}, std::move(cur));
}

template <typename T>
Tensor<T> SegmentAdjoint(const Tensor<T> &grad, const SegMeta &meta) {
  MPRNN_CHECK(grad.shape() == meta.TensorShape(), "segment adjoint shape mismatch");
  std::vector<T> cur = grad.ToVector();
  for (int m = meta.levels(); m >= 1; --m) {
    cur = OverlapAdd(cur, Prefix(meta, m), meta.InputLength(m), meta.chunk[m - 1],
                     meta.hop[m - 1], meta.counts[m - 1]);
  }
  return Tensor<T>({meta.features, meta.frames}, std::move(cur));
}

template <typename T>
Tensor<T> MergeAdjoint(const Tensor<T> &grad, const SegMeta &meta) {
  MPRNN_CHECK(grad.rank() == 2 && grad.dim(0) == meta.features &&
                  grad.dim(1) == meta.frames,
              "merge adjoint shape mismatch");
  std::vector<T> cur = grad.ToVector();
  for (int m = 1; m <= meta.levels(); ++m) {
    const int64_t len = meta.InputLength(m);
    const int64_t prefix = Prefix(meta, m);
    DivideByCoverage(cur, prefix,
                     Coverage(len, meta.chunk[m - 1], meta.hop[m - 1],
                              meta.counts[m - 1]));
    cur = Chunk(cur, prefix, len, meta.chunk[m - 1], meta.hop[m - 1],
                meta.counts[m - 1]);
  }
  return Tensor<T>(meta.TensorShape(), std::move(cur));
}

std::vector<int64_t> FrameIndexMap(const SegMeta &meta) {
  Shape inner(meta.chunk.begin(), meta.chunk.end());
  inner.push_back(meta.counts.back());
  const int64_t total = NumElements(inner);
  std::vector<int64_t> out(static_cast<size_t>(total));
  std::vector<int64_t> idx(inner.size(), 0);
  const int levels = meta.levels();
  for (int64_t flat = 0; flat < total; ++flat) {
    // idx = (k_1, ..., k_M, s_M); unroll from the coarsest level down.
    int64_t c = idx[static_cast<size_t>(levels)];
    for (int m = levels; m >= 1; --m) c = c * meta.hop[m - 1] + idx[m - 1];
    out[static_cast<size_t>(flat)] = c < meta.frames ? c : -1;
    for (int a = static_cast<int>(inner.size()) - 1; a >= 0; --a) {
      if (++idx[a] < inner[a]) break;
      idx[a] = 0;
    }
  }
  return out;
}

#define MPRNN_INSTANTIATE_SEG(T)                                              \
  template HierTensor<T> Segment(const Tensor<T> &, const SegConfig &);       \
  template Tensor<T> Merge(const HierTensor<T> &);                            \
  template Tensor<T> SegmentAdjoint(const Tensor<T> &, const SegMeta &);      \
  template Tensor<T> MergeAdjoint(const Tensor<T> &, const SegMeta &);

MPRNN_INSTANTIATE_SEG(float)
MPRNN_INSTANTIATE_SEG(double)

}  // namespace mprnn
