// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "reference_dprnn.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "test_util.h"

namespace mprnn::testing {

std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

double Sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

const Tensor<double> &Value(const ParamStore<double> &p, const std::string &name) {
  return p.Get(name).value;
}

// seq[t] is the feature vector at step t.
Matrix RunPath(const ParamStore<double> &params, const std::string &base, const Matrix &seq,
               bool bidirectional) {
  const size_t steps = seq.size();
  const size_t n = seq[0].size();
  Matrix rnn = ReferenceLstm(params, base + "/rnn_fwd", seq, false);
  if (bidirectional) {
    const Matrix back = ReferenceLstm(params, base + "/rnn_bwd", seq, true);
    for (size_t t = 0; t < steps; ++t) rnn[t].insert(rnn[t].end(), back[t].begin(), back[t].end());
  }
  const Tensor<double> &w = Value(params, base + "/fc/weight");
  const Tensor<double> &b = Value(params, base + "/fc/bias");
  const Tensor<double> &gain = Value(params, base + "/ln/gain");
  const Tensor<double> &beta = Value(params, base + "/ln/bias");
  Matrix out(steps, std::vector<double>(n));
  for (size_t t = 0; t < steps; ++t) {
    std::vector<double> proj(n);
    for (size_t i = 0; i < n; ++i) {
      double s = b[i];
      for (size_t j = 0; j < rnn[t].size(); ++j) s += w(i, j) * rnn[t][j];
      proj[i] = s;
    }
    double mean = 0;
    for (double v : proj) mean += v;
    mean /= n;
    double var = 0;
    for (double v : proj) var += (v - mean) * (v - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + 1e-8);
    for (size_t i = 0; i < n; ++i) {
      out[t][i] = seq[t][i] + gain[i] * (proj[i] - mean) * inv + beta[i];
    }
  }
  return out;
}

}  // namespace

Matrix ReferenceLstm(const ParamStore<double> &params, const std::string &base,
                     const Matrix &sequence, bool reverse) {
  const Tensor<double> &w_ih = Value(params, base + "/w_ih");
  const Tensor<double> &w_hh = Value(params, base + "/w_hh");
  const Tensor<double> &bias = Value(params, base + "/bias");
  const size_t h = static_cast<size_t>(w_hh.dim(1));
  const size_t steps = sequence.size();
  Matrix out(steps, std::vector<double>(h));
  std::vector<double> hid(h, 0.0), cell(h, 0.0), z(4 * h);
  for (size_t k = 0; k < steps; ++k) {
    const size_t t = reverse ? steps - 1 - k : k;
    const std::vector<double> &x = sequence[t];
    for (size_t r = 0; r < 4 * h; ++r) {
      double s = bias[r];
      for (size_t j = 0; j < x.size(); ++j) s += w_ih(r, j) * x[j];
      for (size_t j = 0; j < h; ++j) s += w_hh(r, j) * hid[j];
      z[r] = s;
    }
    for (size_t u = 0; u < h; ++u) {
      const double i = Sig(z[u]);
      const double f = Sig(z[h + u]);
      const double g = std::tanh(z[2 * h + u]);
      const double o = Sig(z[3 * h + u]);
      cell[u] = f * cell[u] + i * g;
      hid[u] = o * std::tanh(cell[u]);
    }
    out[t] = hid;
  }
  return out;
}

Matrix ReferenceDprnn(const ParamStore<double> &params, const Matrix &frames,
                      const ReferenceDprnnConfig &config) {
  const int64_t n = static_cast<int64_t>(frames.size());
  const int64_t len = static_cast<int64_t>(frames[0].size());
  const int64_t k_len = config.chunk, hop = config.hop;
  const int64_t chunks = (len + hop - 1) / hop;

  // chunked[s][k] = feature vector of frame s*hop + k (zero past the end).
  std::vector<Matrix> chunked(chunks, Matrix(k_len, std::vector<double>(n, 0.0)));
  for (int64_t s = 0; s < chunks; ++s) {
    for (int64_t k = 0; k < k_len; ++k) {
      const int64_t l = s * hop + k;
      if (l >= len) continue;
      for (int64_t i = 0; i < n; ++i) chunked[s][k][i] = frames[i][l];
    }
  }

  for (int b = 0; b < config.blocks; ++b) {
    const std::string base = config.prefix + "block" + std::to_string(b);
    for (int64_t s = 0; s < chunks; ++s) {
      chunked[s] = RunPath(params, base + "/sub1", chunked[s], true);
    }
    for (int64_t k = 0; k < k_len; ++k) {
      Matrix across(chunks);
      for (int64_t s = 0; s < chunks; ++s) across[s] = chunked[s][k];
      const Matrix res = RunPath(params, base + "/sub2", across, config.inter_bidirectional);
      for (int64_t s = 0; s < chunks; ++s) chunked[s][k] = res[s];
    }
  }

  Matrix out(n, std::vector<double>(len, 0.0));
  std::vector<double> count(len, 0.0);
  for (int64_t s = 0; s < chunks; ++s) {
    for (int64_t k = 0; k < k_len; ++k) {
      const int64_t l = s * hop + k;
      if (l >= len) continue;
      count[l] += 1;
      for (int64_t i = 0; i < n; ++i) out[i][l] += chunked[s][k][i];
    }
  }
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t l = 0; l < len; ++l) out[i][l] /= count[l];
  }
  return out;
}

}  // namespace mprnn::testing
