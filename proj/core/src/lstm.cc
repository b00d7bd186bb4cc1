// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/lstm.h"

#include "eigen_util.h"

namespace mprnn {

using internal::AsMatrix;
using internal::MatrixRM;

namespace {

template <typename T>
void CheckWeights(const LstmWeights<T> &w) {
  MPRNN_CHECK(w.w_ih && w.w_hh && w.bias, "lstm weights not bound");
  const int64_t h = w.w_hh->dim(1);
  MPRNN_CHECK(w.w_hh->rank() == 2 && w.w_hh->dim(0) == 4 * h,
              "lstm w_hh must be [4H x H], got " << ShapeString(w.w_hh->shape()));
  MPRNN_CHECK(w.w_ih->rank() == 2 && w.w_ih->dim(0) == 4 * h,
              "lstm w_ih must be [4H x N], got " << ShapeString(w.w_ih->shape()));
  MPRNN_CHECK(w.bias->size() == 4 * h, "lstm bias must have 4H entries");
}

template <typename T>
Tensor<T> As3d(const Tensor<T> &x) {
  if (x.rank() == 3) return x;
  MPRNN_CHECK(x.rank() == 2, "lstm input must be [N x T] or [N x T x B]");
  return x.Reshape({x.dim(0), x.dim(1), 1});
}

// Runs the recurrence over x ([N x T x B], already in processing order).
template <typename T>
Tensor<T> RunForward(const Tensor<T> &x, const LstmWeights<T> &w,
                     LstmCache<T> *cache) {
  const int64_t hid = w.hidden();
  const int64_t steps = x.dim(1), batch = x.dim(2);
  const int64_t cols = steps * batch;

  MatrixRM<T> gates = AsMatrix(*w.w_ih) * AsMatrix(x);
  gates.colwise() += internal::AsVector(*w.bias);
  MatrixRM<T> cell(hid, cols), hidden(hid, cols);
  auto w_hh = AsMatrix(*w.w_hh);

  for (int64_t t = 0; t < steps; ++t) {
    auto g = gates.middleCols(t * batch, batch);
    if (t > 0) g.noalias() += w_hh * hidden.middleCols((t - 1) * batch, batch);
    g.topRows(2 * hid).array() = g.topRows(2 * hid).array().logistic();
    g.middleRows(2 * hid, hid).array() = g.middleRows(2 * hid, hid).array().tanh();
    g.bottomRows(hid).array() = g.bottomRows(hid).array().logistic();

    auto c = cell.middleCols(t * batch, batch);
    c.array() = g.topRows(hid).array() * g.middleRows(2 * hid, hid).array();
    if (t > 0) {
      c.array() += g.middleRows(hid, hid).array() *
                   cell.middleCols((t - 1) * batch, batch).array();
    }
    hidden.middleCols(t * batch, batch).array() =
        g.bottomRows(hid).array() * c.array().tanh();
  }

  Tensor<T> out({hid, steps, batch});
  AsMatrix(out) = hidden;
  if (cache) {
    cache->x = x;
    cache->gates = Tensor<T>({4 * hid, steps, batch});
    AsMatrix(cache->gates) = gates;
    cache->cell = Tensor<T>({hid, steps, batch});
    AsMatrix(cache->cell) = cell;
    cache->hidden = out;
  }
  return out;
}

// BPTT over the cached (processing-order) sequence; dh in processing order.
template <typename T>
Tensor<T> RunBackward(const LstmCache<T> &cache, const LstmWeights<T> &w,
                      const Tensor<T> &dh, const LstmGrads<T> &grads) {
  const int64_t hid = w.hidden();
  const int64_t steps = cache.x.dim(1), batch = cache.x.dim(2);
  const int64_t cols = steps * batch;
  auto gates = AsMatrix(cache.gates);
  auto cell = AsMatrix(cache.cell);
  auto hidden = AsMatrix(cache.hidden);
  auto dh_in = AsMatrix(dh);
  auto w_hh = AsMatrix(*w.w_hh);

  MatrixRM<T> dgates(4 * hid, cols);
  MatrixRM<T> dh_next = MatrixRM<T>::Zero(hid, batch);
  MatrixRM<T> dc_next = MatrixRM<T>::Zero(hid, batch);
  MatrixRM<T> dhid(hid, batch), dc(hid, batch), tanh_c(hid, batch);

  for (int64_t t = steps - 1; t >= 0; --t) {
    auto g = gates.middleCols(t * batch, batch);
    auto gi = g.topRows(hid).array();
    auto gf = g.middleRows(hid, hid).array();
    auto gg = g.middleRows(2 * hid, hid).array();
    auto go = g.bottomRows(hid).array();
    auto c = cell.middleCols(t * batch, batch).array();

    dhid = dh_in.middleCols(t * batch, batch) + dh_next;
    tanh_c.array() = c.tanh();
    dc.array() = dhid.array() * go * (T(1) - tanh_c.array().square()) +
                 dc_next.array();

    auto da = dgates.middleCols(t * batch, batch);
    da.topRows(hid).array() = dc.array() * gg * gi * (T(1) - gi);
    if (t > 0) {
      da.middleRows(hid, hid).array() =
          dc.array() * cell.middleCols((t - 1) * batch, batch).array() * gf *
          (T(1) - gf);
    } else {
      da.middleRows(hid, hid).setZero();
    }
    da.middleRows(2 * hid, hid).array() = dc.array() * gi * (T(1) - gg.square());
    da.bottomRows(hid).array() = dhid.array() * tanh_c.array() * go * (T(1) - go);

    dc_next.array() = dc.array() * gf;
    if (t > 0) {
      dh_next.noalias() = w_hh.transpose() * da;
      AsMatrix(*grads.w_hh).noalias() +=
          da * hidden.middleCols((t - 1) * batch, batch).transpose();
    }
  }

  auto x = AsMatrix(cache.x);
  AsMatrix(*grads.w_ih).noalias() += dgates * x.transpose();
  internal::AsVector(*grads.bias) += dgates.rowwise().sum();
  Tensor<T> dx(cache.x.shape());
  AsMatrix(dx).noalias() = AsMatrix(*w.w_ih).transpose() * dgates;
  return dx;
}

}  // namespace

template <typename T>
Tensor<T> LstmForward(const Tensor<T> &x, const LstmWeights<T> &w,
                      Direction direction, LstmCache<T> *cache) {
  CheckWeights(w);
  Tensor<T> x3 = As3d(x);
  MPRNN_CHECK(x3.dim(0) == w.input(), "lstm input features " << x3.dim(0)
                                                             << " != weight input "
                                                             << w.input());
  if (cache) cache->direction = direction;
  Tensor<T> out;
  if (direction == Direction::kForward) {
    out = RunForward(x3, w, cache);
  } else {
    out = ReverseAxis1(RunForward(ReverseAxis1(x3), w, cache));
  }
  if (x.rank() == 2) return out.Reshape({out.dim(0), out.dim(1)});
  return out;
}

template <typename T>
Tensor<T> LstmBackward(const LstmCache<T> &cache, const LstmWeights<T> &w,
                       const Tensor<T> &dh, const LstmGrads<T> &grads) {
  CheckWeights(w);
  MPRNN_CHECK(grads.w_ih && grads.w_hh && grads.bias, "lstm grads not bound");
  const Tensor<T> dh3 = As3d(dh);
  MPRNN_CHECK(dh3.shape() == cache.hidden.shape(), "lstm gradient shape mismatch");
  Tensor<T> dx;
  if (cache.direction == Direction::kForward) {
    dx = RunBackward(cache, w, dh3, grads);
  } else {
    dx = ReverseAxis1(RunBackward(cache, w, ReverseAxis1(dh3), grads));
  }
  if (dh.rank() == 2) return dx.Reshape({dx.dim(0), dx.dim(1)});
  return dx;
}

template <typename T>
Tensor<T> BiLstmForward(const Tensor<T> &x, const LstmWeights<T> &fwd,
                        const LstmWeights<T> &bwd, LstmCache<T> *fwd_cache,
                        LstmCache<T> *bwd_cache) {
  Tensor<T> hf = LstmForward(x, fwd, Direction::kForward, fwd_cache);
  Tensor<T> hb = LstmForward(x, bwd, Direction::kBackward, bwd_cache);
  Shape shape = hf.shape();
  shape[0] = hf.dim(0) + hb.dim(0);
  AlignedVector<T> data;
  data.reserve(static_cast<size_t>(hf.size() + hb.size()));
  data.insert(data.end(), hf.storage().begin(), hf.storage().end());
  data.insert(data.end(), hb.storage().begin(), hb.storage().end());
  return Tensor<T>(shape, std::move(data));
}

template <typename T>
Tensor<T> BiLstmBackward(const LstmCache<T> &fwd_cache,
                         const LstmCache<T> &bwd_cache,
                         const LstmWeights<T> &fwd, const LstmWeights<T> &bwd,
                         const Tensor<T> &dh, const LstmGrads<T> &fwd_grads,
                         const LstmGrads<T> &bwd_grads) {
  const int64_t hf = fwd.hidden();
  const int64_t hb = bwd.hidden();
  MPRNN_CHECK(dh.dim(0) == hf + hb, "bilstm gradient feature extent mismatch");
  const int64_t per_row = dh.size() / dh.dim(0);
  Shape sf = dh.shape(), sb = dh.shape();
  sf[0] = hf;
  sb[0] = hb;
  const auto split = dh.storage().begin() + static_cast<ptrdiff_t>(hf * per_row);
  Tensor<T> dhf(sf, AlignedVector<T>(dh.storage().begin(), split));
  Tensor<T> dhb(sb, AlignedVector<T>(split, dh.storage().end()));
  Tensor<T> dx = LstmBackward(fwd_cache, fwd, dhf, fwd_grads);
  dx += LstmBackward(bwd_cache, bwd, dhb, bwd_grads);
  return dx;
}

#define MPRNN_INSTANTIATE_LSTM(T)                                              \
  template Tensor<T> LstmForward(const Tensor<T> &, const LstmWeights<T> &,   \
                                 Direction, LstmCache<T> *);                  \
  template Tensor<T> LstmBackward(const LstmCache<T> &, const LstmWeights<T> &,\
                                  const Tensor<T> &, const LstmGrads<T> &);   \
  template Tensor<T> BiLstmForward(const Tensor<T> &, const LstmWeights<T> &, \
                                   const LstmWeights<T> &, LstmCache<T> *,    \
                                   LstmCache<T> *);                           \
  template Tensor<T> BiLstmBackward(                                          \
      const LstmCache<T> &, const LstmCache<T> &, const LstmWeights<T> &,     \
      const LstmWeights<T> &, const Tensor<T> &, const LstmGrads<T> &,        \
      const LstmGrads<T> &);

MPRNN_INSTANTIATE_LSTM(float)
MPRNN_INSTANTIATE_LSTM(double)

}  // namespace mprnn
