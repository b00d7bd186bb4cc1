// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/metrics.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "mprnn/error.h"

namespace mprnn {

namespace {

// Floor on the target energy, relative to the reference energy, so a zero
// estimate yields a finite (very negative) score.
constexpr double kNumeratorFloor = 1e-20;

template <typename T>
void CheckPair(std::span<const T> est, std::span<const T> ref, const char *what) {
  MPRNN_CHECK(est.size() == ref.size(), what << ": estimate has " << est.size()
                                             << " samples, reference " << ref.size());
  MPRNN_CHECK(!ref.empty(), what << ": empty signals");
}

template <typename T>
double Energy(std::span<const T> x) {
  double e = 0;
  for (T v : x) e += static_cast<double>(v) * v;
  return e;
}

double SilentCheck(double ref_energy, const char *what) {
  if (!(ref_energy > 0)) throw InvalidArgument(std::string(what) + ": reference is silent");
  return ref_energy;
}

struct Ratio {
  double num = 0, den = 0;
  bool num_floored = false, den_floored = false;
  double Db() const { return 10.0 * std::log10(num / den); }
};

Ratio Floored(double num, double den, double ref_energy) {
  Ratio r;
  r.num = num;
  if (r.num < kNumeratorFloor * ref_energy) {
    r.num = kNumeratorFloor * ref_energy;
    r.num_floored = true;
  }
  r.den = den;
  if (r.den < kSdrDenominatorFloor * r.num) {
    r.den = kSdrDenominatorFloor * r.num;
    r.den_floored = true;
  }
  return r;
}

}  // namespace

std::string MetricName(Metric m) {
  switch (m) {
    case Metric::kSiSdr: return "si-sdr";
    case Metric::kSdSdr: return "sd-sdr";
    case Metric::kBssSdr: return "bss-sdr";
  }
  return "?";
}

Metric ParseMetric(const std::string &name) {
  if (name == "si-sdr") return Metric::kSiSdr;
  if (name == "sd-sdr") return Metric::kSdSdr;
  if (name == "bss-sdr") return Metric::kBssSdr;
  throw InvalidArgument("unknown metric '" + name + "' (expected si-sdr, sd-sdr or bss-sdr)");
}

template <typename T>
double SdSdr(std::span<const T> est, std::span<const T> ref) {
  CheckPair(est, ref, "sd-sdr");
  double dot = 0, err = 0;
  for (size_t t = 0; t < est.size(); ++t) {
    const double e = est[t], r = ref[t];
    dot += e * r;
    err += (e - r) * (e - r);
  }
  const double er = SilentCheck(Energy(ref), "sd-sdr");
  return Floored(dot * dot / er, err, er).Db();
}

template <typename T>
double SdSdrWithGrad(std::span<const T> est, std::span<const T> ref, std::vector<T> &grad) {
  CheckPair(est, ref, "sd-sdr");
  double dot = 0, err = 0;
  for (size_t t = 0; t < est.size(); ++t) {
    const double e = est[t], r = ref[t];
    dot += e * r;
    err += (e - r) * (e - r);
  }
  const double er = SilentCheck(Energy(ref), "sd-sdr");
  const double alpha = dot / er;
  const Ratio q = Floored(dot * dot / er, err, er);
  grad.assign(est.size(), T(0));
  if (q.den_floored) return q.Db();  // capped: locally constant
  const double k = 10.0 / std::log(10.0);
  const double cn = q.num_floored ? 0.0 : k * 2.0 * alpha / q.num;
  const double cd = k * 2.0 / q.den;
  for (size_t t = 0; t < est.size(); ++t) {
    const double e = est[t], r = ref[t];
    grad[t] = static_cast<T>(cn * r - cd * (e - r));
  }
  return q.Db();
}

template <typename T>
double SiSdr(std::span<const T> est, std::span<const T> ref) {
  CheckPair(est, ref, "si-sdr");
  double dot = 0;
  for (size_t t = 0; t < est.size(); ++t) dot += static_cast<double>(est[t]) * ref[t];
  const double er = SilentCheck(Energy(ref), "si-sdr");
  const double alpha = dot / er;
  double err = 0;
  for (size_t t = 0; t < est.size(); ++t) {
    const double d = est[t] - alpha * ref[t];
    err += d * d;
  }
  return Floored(alpha * alpha * er, err, er).Db();
}

template <typename T>
double BssSdr(std::span<const T> est, std::span<const T> ref, int filter_len) {
  CheckPair(est, ref, "bss-sdr");
  MPRNN_CHECK(filter_len >= 1, "bss-sdr: filter length must be positive");
  const int64_t n = static_cast<int64_t>(ref.size());
  const int64_t f = filter_len;
  MPRNN_CHECK(n >= f, "bss-sdr: signals of " << n << " samples are shorter than the "
                                              << f << "-tap filter");
  const double er = SilentCheck(Energy(ref), "bss-sdr");

  // Autocorrelation of the reference and cross-correlation with the estimate.
  Eigen::VectorXd acf(f), xcf(f);
  for (int64_t k = 0; k < f; ++k) {
    double a = 0, b = 0;
    for (int64_t t = k; t < n; ++t) {
      a += static_cast<double>(ref[t]) * ref[t - k];
      b += static_cast<double>(est[t]) * ref[t - k];
    }
    acf[k] = a;
    xcf[k] = b;
  }
  Eigen::MatrixXd gram(f, f);
  for (int64_t i = 0; i < f; ++i) {
    for (int64_t j = 0; j < f; ++j) gram(i, j) = acf[std::abs(i - j)];
  }
  Eigen::VectorXd h;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() == Eigen::Success) {
    h = llt.solve(xcf);
  }
  if (llt.info() != Eigen::Success || !h.allFinite()) {
    Eigen::MatrixXd ridge = gram;
    ridge.diagonal().array() += 1e-8 * gram.trace();
    h = ridge.ldlt().solve(xcf);
  }

  // proj = ref * h over the full convolution length n + f - 1; the estimate
  // is zero past n.
  double num = 0, den = 0;
  for (int64_t t = 0; t < n + f - 1; ++t) {
    double p = 0;
    const int64_t lo = std::max<int64_t>(0, t - n + 1);
    const int64_t hi = std::min<int64_t>(f - 1, t);
    for (int64_t i = lo; i <= hi; ++i) p += h[i] * ref[t - i];
    const double e = t < n ? static_cast<double>(est[t]) : 0.0;
    num += p * p;
    den += (e - p) * (e - p);
  }
  return Floored(num, den, er).Db();
}

template <typename T>
double Score(Metric metric, std::span<const T> est, std::span<const T> ref) {
  switch (metric) {
    case Metric::kSiSdr: return SiSdr(est, ref);
    case Metric::kSdSdr: return SdSdr(est, ref);
    case Metric::kBssSdr: return BssSdr(est, ref);
  }
  throw InvalidArgument("unknown metric");
}

PermutationResult BestPermutation(const std::vector<std::vector<double>> &scores) {
  const int c = static_cast<int>(scores.size());
  MPRNN_CHECK(c >= 1 && c <= 4, "permutation search supports 1 to 4 streams, got " << c);
  for (const auto &row : scores) {
    MPRNN_CHECK(static_cast<int>(row.size()) == c, "score matrix must be square");
  }
  std::vector<int> perm(c);
  std::iota(perm.begin(), perm.end(), 0);
  PermutationResult best;
  bool have = false;
  do {
    double total = 0;
    for (int i = 0; i < c; ++i) total += scores[i][perm[i]];
    if (!have || total > best.total) {
      best.total = total;
      best.assignment = perm;
      have = true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.pair_scores.resize(c);
  for (int i = 0; i < c; ++i) best.pair_scores[i] = scores[i][best.assignment[i]];
  return best;
}

template <typename T>
PermutationResult UpitScore(const std::vector<std::vector<T>> &estimates,
                            const std::vector<std::vector<T>> &references, Metric metric) {
  MPRNN_CHECK(estimates.size() == references.size(),
              "got " << estimates.size() << " estimates for " << references.size()
                     << " references");
  const size_t c = estimates.size();
  std::vector<std::vector<double>> scores(c, std::vector<double>(c));
  for (size_t i = 0; i < c; ++i) {
    for (size_t j = 0; j < c; ++j) {
      scores[i][j] = Score<T>(metric, estimates[i], references[j]);
    }
  }
  return BestPermutation(scores);
}

template <typename T>
double UpitSdSdrLoss(const std::vector<std::vector<T>> &estimates,
                     const std::vector<std::vector<T>> &references,
                     std::vector<std::vector<T>> &grads, PermutationResult *chosen) {
  PermutationResult best = UpitScore(estimates, references, Metric::kSdSdr);
  const size_t c = estimates.size();
  grads.resize(c);
  for (size_t i = 0; i < c; ++i) {
    SdSdrWithGrad<T>(estimates[i], references[best.assignment[i]], grads[i]);
    for (T &g : grads[i]) g = static_cast<T>(-g / static_cast<double>(c));
  }
  const double loss = -best.total / static_cast<double>(c);
  if (chosen) *chosen = std::move(best);
  return loss;
}

#define MPRNN_INSTANTIATE_METRICS(T)                                                         \
  template double SdSdr<T>(std::span<const T>, std::span<const T>);                          \
  template double SdSdrWithGrad<T>(std::span<const T>, std::span<const T>, std::vector<T> &); \
  template double SiSdr<T>(std::span<const T>, std::span<const T>);                          \
  template double BssSdr<T>(std::span<const T>, std::span<const T>, int);                    \
  template double Score<T>(Metric, std::span<const T>, std::span<const T>);                  \
  template PermutationResult UpitScore<T>(const std::vector<std::vector<T>> &,               \
                                          const std::vector<std::vector<T>> &, Metric);      \
  template double UpitSdSdrLoss<T>(const std::vector<std::vector<T>> &,                      \
                                   const std::vector<std::vector<T>> &,                      \
                                   std::vector<std::vector<T>> &, PermutationResult *);

MPRNN_INSTANTIATE_METRICS(float)
MPRNN_INSTANTIATE_METRICS(double)

}  // namespace mprnn
