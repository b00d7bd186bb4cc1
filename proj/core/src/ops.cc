// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/ops.h"

#include "eigen_util.h"

namespace mprnn {

using internal::AsMatrix;
using internal::ConstMapRM;
using internal::MapRM;
using internal::MatrixRM;

int64_t Conv1dOutputLength(int64_t input_len, int64_t width, int stride,
                           bool pad_end) {
  MPRNN_CHECK(stride > 0, "stride must be positive, got " << stride);
  MPRNN_CHECK(width >= stride, "kernel width " << width
                                               << " smaller than stride "
                                               << stride);
  if (pad_end) return (input_len + stride - 1) / stride;
  MPRNN_CHECK(width <= input_len, "kernel width " << width
                                                  << " exceeds input length "
                                                  << input_len);
  return (input_len - width) / stride + 1;
}

namespace {

// cols(i*W + w, l) = x[i, l*stride + w], zero past the end of x.
template <typename T>
MatrixRM<T> Im2Col(const Tensor<T> &x, int64_t width, int stride,
                   int64_t out_len) {
  const int64_t c_in = x.dim(0), len = x.dim(1);
  MatrixRM<T> cols(c_in * width, out_len);
  for (int64_t i = 0; i < c_in; ++i) {
    const T *row = x.data() + i * len;
    for (int64_t w = 0; w < width; ++w) {
      T *dst = cols.data() + (i * width + w) * out_len;
      for (int64_t l = 0; l < out_len; ++l) {
        const int64_t t = l * stride + w;
        dst[l] = t < len ? row[t] : T(0);
      }
    }
  }
  return cols;
}

// Adjoint of Im2Col: out[i, l*stride + w] += cols(i*W + w, l), dropping
// indices past out_len.
template <typename T>
void Col2Im(const MatrixRM<T> &cols, int64_t width, int stride,
            Tensor<T> &out) {
  const int64_t c_in = out.dim(0), len = out.dim(1);
  const int64_t n = cols.cols();
  for (int64_t i = 0; i < c_in; ++i) {
    T *row = out.data() + i * len;
    for (int64_t w = 0; w < width; ++w) {
      const T *src = cols.data() + (i * width + w) * n;
      for (int64_t l = 0; l < n; ++l) {
        const int64_t t = l * stride + w;
        if (t < len) row[t] += src[l];
      }
    }
  }
}

template <typename T>
ConstMapRM<T> KernelMatrix(const Tensor<T> &kernel) {
  return ConstMapRM<T>(kernel.data(), kernel.dim(0),
                       kernel.dim(1) * kernel.dim(2));
}

template <typename T>
MapRM<T> KernelMatrix(Tensor<T> &kernel) {
  return MapRM<T>(kernel.data(), kernel.dim(0), kernel.dim(1) * kernel.dim(2));
}

}  // namespace

template <typename T>
Tensor<T> Conv1d(const Tensor<T> &x, const Tensor<T> &kernel, int stride,
                 bool pad_end) {
  MPRNN_CHECK(x.rank() == 2 && kernel.rank() == 3,
              "conv1d expects x [C_in x T] and kernel [C_out x C_in x W]");
  MPRNN_CHECK(kernel.dim(1) == x.dim(0), "conv1d channel mismatch: x "
                                             << ShapeString(x.shape())
                                             << ", kernel "
                                             << ShapeString(kernel.shape()));
  const int64_t width = kernel.dim(2);
  const int64_t out_len = Conv1dOutputLength(x.dim(1), width, stride, pad_end);
  MatrixRM<T> cols = Im2Col(x, width, stride, out_len);
  Tensor<T> y({kernel.dim(0), out_len});
  AsMatrix(y).noalias() = KernelMatrix(kernel) * cols;
  return y;
}

template <typename T>
Tensor<T> Conv1dBackward(const Tensor<T> &x, const Tensor<T> &kernel,
                         int stride, bool pad_end, const Tensor<T> &dy,
                         Tensor<T> &dkernel) {
  const int64_t width = kernel.dim(2);
  const int64_t out_len = Conv1dOutputLength(x.dim(1), width, stride, pad_end);
  MPRNN_CHECK(dy.rank() == 2 && dy.dim(0) == kernel.dim(0) &&
                  dy.dim(1) == out_len,
              "conv1d gradient shape mismatch");
  MatrixRM<T> cols = Im2Col(x, width, stride, out_len);
  auto dy_m = AsMatrix(dy);
  KernelMatrix(dkernel).noalias() += dy_m * cols.transpose();
  MatrixRM<T> dcols = KernelMatrix(kernel).transpose() * dy_m;
  Tensor<T> dx(x.shape());
  Col2Im(dcols, width, stride, dx);
  return dx;
}

template <typename T>
Tensor<T> ConvTranspose1d(const Tensor<T> &y, const Tensor<T> &kernel,
                          int stride) {
  MPRNN_CHECK(y.rank() == 2 && kernel.rank() == 3,
              "conv_transpose1d expects y [C_out x L] and kernel [C_out x C_in x W]");
  MPRNN_CHECK(kernel.dim(0) == y.dim(0), "conv_transpose1d channel mismatch: y "
                                             << ShapeString(y.shape())
                                             << ", kernel "
                                             << ShapeString(kernel.shape()));
  MPRNN_CHECK(stride > 0, "stride must be positive");
  const int64_t width = kernel.dim(2);
  const int64_t out_len = (y.dim(1) - 1) * stride + width;
  MatrixRM<T> cols = KernelMatrix(kernel).transpose() * AsMatrix(y);
  Tensor<T> out({kernel.dim(1), out_len});
  Col2Im(cols, width, stride, out);
  return out;
}

template <typename T>
Tensor<T> ConvTranspose1dBackward(const Tensor<T> &y, const Tensor<T> &kernel,
                                  int stride, const Tensor<T> &dout,
                                  Tensor<T> &dkernel) {
  const int64_t width = kernel.dim(2);
  const int64_t len = y.dim(1);
  MPRNN_CHECK(dout.rank() == 2 && dout.dim(0) == kernel.dim(1) &&
                  dout.dim(1) == (len - 1) * stride + width,
              "conv_transpose1d gradient shape mismatch");
  MatrixRM<T> dcols = Im2Col(dout, width, stride, len);
  auto y_m = AsMatrix(y);
  KernelMatrix(dkernel).noalias() += y_m * dcols.transpose();
  Tensor<T> dy(y.shape());
  AsMatrix(dy).noalias() = KernelMatrix(kernel) * dcols;
  return dy;
}

template <typename T>
Tensor<T> Linear(const Tensor<T> &x, const Tensor<T> &weight,
                 const Tensor<T> &bias) {
  MPRNN_CHECK(weight.rank() == 2 && weight.dim(1) == x.dim(0),
              "linear: weight " << ShapeString(weight.shape())
                                << " incompatible with input "
                                << ShapeString(x.shape()));
  MPRNN_CHECK(bias.size() == weight.dim(0), "linear: bias length mismatch");
  Shape out_shape = x.shape();
  out_shape[0] = weight.dim(0);
  Tensor<T> y(out_shape);
  auto y_m = AsMatrix(y);
  y_m.noalias() = AsMatrix(weight) * AsMatrix(x);
  y_m.colwise() += internal::AsVector(bias);
  return y;
}

template <typename T>
Tensor<T> LinearBackward(const Tensor<T> &x, const Tensor<T> &weight,
                         const Tensor<T> &dy, Tensor<T> &dweight,
                         Tensor<T> &dbias) {
  MPRNN_CHECK(dy.dim(0) == weight.dim(0) && dy.size() / dy.dim(0) == x.size() / x.dim(0),
              "linear gradient shape mismatch");
  auto dy_m = AsMatrix(dy);
  AsMatrix(dweight).noalias() += dy_m * AsMatrix(x).transpose();
  internal::AsVector(dbias) += dy_m.rowwise().sum();
  Tensor<T> dx(x.shape());
  AsMatrix(dx).noalias() = AsMatrix(weight).transpose() * dy_m;
  return dx;
}

template <typename T>
Tensor<T> LayerNorm(const Tensor<T> &x, const Tensor<T> &gain,
                    const Tensor<T> &bias, T eps, LayerNormCache<T> *cache) {
  const int64_t n = x.dim(0);
  MPRNN_CHECK(gain.size() == n && bias.size() == n,
              "layer_norm: gain/bias length must equal feature extent " << n);
  const int64_t s = x.size() / n;
  std::vector<T> mean(s, T(0)), var(s, T(0));
  const T *xd = x.data();
  for (int64_t f = 0; f < n; ++f) {
    const T *row = xd + f * s;
    for (int64_t j = 0; j < s; ++j) mean[j] += row[j];
  }
  for (int64_t j = 0; j < s; ++j) mean[j] /= T(n);
  for (int64_t f = 0; f < n; ++f) {
    const T *row = xd + f * s;
    for (int64_t j = 0; j < s; ++j) {
      const T d = row[j] - mean[j];
      var[j] += d * d;
    }
  }
  std::vector<T> inv_std(s);
  for (int64_t j = 0; j < s; ++j) inv_std[j] = T(1) / std::sqrt(var[j] / T(n) + eps);

  Tensor<T> normalized(x.shape());
  Tensor<T> y(x.shape());
  for (int64_t f = 0; f < n; ++f) {
    const T *row = xd + f * s;
    T *nrow = normalized.data() + f * s;
    T *yrow = y.data() + f * s;
    const T g = gain[f], b = bias[f];
    for (int64_t j = 0; j < s; ++j) {
      nrow[j] = (row[j] - mean[j]) * inv_std[j];
      yrow[j] = g * nrow[j] + b;
    }
  }
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <typename T>
Tensor<T> LayerNormBackward(const LayerNormCache<T> &cache,
                            const Tensor<T> &gain, const Tensor<T> &dy,
                            Tensor<T> &dgain, Tensor<T> &dbias) {
  const Tensor<T> &xhat = cache.normalized;
  MPRNN_CHECK(dy.shape() == xhat.shape(), "layer_norm gradient shape mismatch");
  const int64_t n = xhat.dim(0);
  const int64_t s = xhat.size() / n;
  std::vector<T> sum_d(s, T(0)), sum_dx(s, T(0));
  for (int64_t f = 0; f < n; ++f) {
    const T *dyr = dy.data() + f * s;
    const T *xr = xhat.data() + f * s;
    const T g = gain[f];
    T dg = 0, db = 0;
    for (int64_t j = 0; j < s; ++j) {
      dg += dyr[j] * xr[j];
      db += dyr[j];
      const T d = dyr[j] * g;
      sum_d[j] += d;
      sum_dx[j] += d * xr[j];
    }
    dgain[f] += dg;
    dbias[f] += db;
  }
  Tensor<T> dx(xhat.shape());
  const T inv_n = T(1) / T(n);
  for (int64_t f = 0; f < n; ++f) {
    const T *dyr = dy.data() + f * s;
    const T *xr = xhat.data() + f * s;
    T *dxr = dx.data() + f * s;
    const T g = gain[f];
    for (int64_t j = 0; j < s; ++j) {
      dxr[j] = cache.inv_std[j] *
               (dyr[j] * g - inv_n * (sum_d[j] + xr[j] * sum_dx[j]));
    }
  }
  return dx;
}

template <typename T>
Tensor<T> Pointwise(const Tensor<T> &x, Activation fn, T prelu_slope) {
  Tensor<T> y(x.shape());
  const T *src = x.data();
  T *dst = y.data();
  const int64_t n = x.size();
  switch (fn) {
    case Activation::kRelu:
      for (int64_t i = 0; i < n; ++i) dst[i] = Relu(src[i]);
      break;
    case Activation::kPrelu:
      for (int64_t i = 0; i < n; ++i)
        dst[i] = src[i] > T(0) ? src[i] : prelu_slope * src[i];
      break;
    case Activation::kSigmoid:
      for (int64_t i = 0; i < n; ++i) dst[i] = Sigmoid(src[i]);
      break;
    case Activation::kTanh:
      for (int64_t i = 0; i < n; ++i) dst[i] = std::tanh(src[i]);
      break;
  }
  return y;
}

template <typename T>
Tensor<T> PointwiseBackward(const Tensor<T> &x, Activation fn,
                            const Tensor<T> &dy, T prelu_slope,
                            T *dprelu_slope) {
  MPRNN_CHECK(x.shape() == dy.shape(), "pointwise gradient shape mismatch");
  Tensor<T> dx(x.shape());
  const T *src = x.data();
  const T *g = dy.data();
  T *dst = dx.data();
  const int64_t n = x.size();
  switch (fn) {
    case Activation::kRelu:
      for (int64_t i = 0; i < n; ++i) dst[i] = src[i] > T(0) ? g[i] : T(0);
      break;
    case Activation::kPrelu: {
      MPRNN_CHECK(dprelu_slope != nullptr, "prelu backward needs a slope slot");
      T da = 0;
      for (int64_t i = 0; i < n; ++i) {
        if (src[i] > T(0)) {
          dst[i] = g[i];
        } else {
          dst[i] = prelu_slope * g[i];
          da += src[i] * g[i];
        }
      }
      *dprelu_slope += da;
      break;
    }
    case Activation::kSigmoid:
      for (int64_t i = 0; i < n; ++i) {
        const T s = Sigmoid(src[i]);
        dst[i] = g[i] * s * (T(1) - s);
      }
      break;
    case Activation::kTanh:
      for (int64_t i = 0; i < n; ++i) {
        const T t = std::tanh(src[i]);
        dst[i] = g[i] * (T(1) - t * t);
      }
      break;
  }
  return dx;
}

#define MPRNN_INSTANTIATE_OPS(T)                                               \
  template Tensor<T> Conv1d(const Tensor<T> &, const Tensor<T> &, int, bool);  \
  template Tensor<T> Conv1dBackward(const Tensor<T> &, const Tensor<T> &, int, \
                                    bool, const Tensor<T> &, Tensor<T> &);     \
  template Tensor<T> ConvTranspose1d(const Tensor<T> &, const Tensor<T> &,     \
                                     int);                                     \
  template Tensor<T> ConvTranspose1dBackward(                                  \
      const Tensor<T> &, const Tensor<T> &, int, const Tensor<T> &,            \
      Tensor<T> &);                                                            \
  template Tensor<T> Linear(const Tensor<T> &, const Tensor<T> &,              \
                            const Tensor<T> &);                                \
  template Tensor<T> LinearBackward(const Tensor<T> &, const Tensor<T> &,      \
                                    const Tensor<T> &, Tensor<T> &,            \
                                    Tensor<T> &);                              \
  template Tensor<T> LayerNorm(const Tensor<T> &, const Tensor<T> &,           \
                               const Tensor<T> &, T, LayerNormCache<T> *);     \
  template Tensor<T> LayerNormBackward(const LayerNormCache<T> &,              \
                                       const Tensor<T> &, const Tensor<T> &,   \
                                       Tensor<T> &, Tensor<T> &);              \
  template Tensor<T> Pointwise(const Tensor<T> &, Activation, T);              \
  template Tensor<T> PointwiseBackward(const Tensor<T> &, Activation,          \
                                       const Tensor<T> &, T, T *);

MPRNN_INSTANTIATE_OPS(float)
MPRNN_INSTANTIATE_OPS(double)

}  // namespace mprnn
