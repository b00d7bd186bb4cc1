// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_METRICS_H_
#define MPRNN_METRICS_H_

#include <span>
#include <string>
#include <vector>

namespace mprnn {

// Distortion energy is floored at this fraction of the target energy, which
// caps every SDR-family score at 80 dB.
inline constexpr double kSdrDenominatorFloor = 1e-8;
inline constexpr double kSdrCapDb = 80.0;

enum class Metric { kSiSdr, kSdSdr, kBssSdr };

std::string MetricName(Metric m);   // "si-sdr", "sd-sdr", "bss-sdr"
Metric ParseMetric(const std::string &name);

// Scale-dependent SDR: alpha = <est,ref>/|ref|^2,
// 10 log10(|alpha ref|^2 / |est - ref|^2). Throws on a silent reference or a
// length mismatch.
template <typename T>
double SdSdr(std::span<const T> est, std::span<const T> ref);

// Same value; writes d(score)/d(est) into grad (resized to est length).
template <typename T>
double SdSdrWithGrad(std::span<const T> est, std::span<const T> ref, std::vector<T> &grad);

// Scale-invariant SDR: 10 log10(|alpha ref|^2 / |est - alpha ref|^2).
template <typename T>
double SiSdr(std::span<const T> est, std::span<const T> ref);

// Least-squares projection of est onto ref delayed by 0..filter_len-1
// (Toeplitz normal equations over the zero-padded full convolution);
// 10 log10(|proj|^2 / |est - proj|^2).
template <typename T>
double BssSdr(std::span<const T> est, std::span<const T> ref, int filter_len = 512);

template <typename T>
double Score(Metric metric, std::span<const T> est, std::span<const T> ref);

struct PermutationResult {
  std::vector<int> assignment;      // estimate i -> reference assignment[i]
  std::vector<double> pair_scores;  // score of (i, assignment[i]), dB
  double total = 0;
};

// Exhaustive search over all C! assignments (C <= 4) for the largest summed
// score; ties go to the lexicographically smallest assignment.
template <typename T>
PermutationResult UpitScore(const std::vector<std::vector<T>> &estimates,
                            const std::vector<std::vector<T>> &references, Metric metric);

// Same search over a precomputed C x C score matrix (row = estimate).
PermutationResult BestPermutation(const std::vector<std::vector<double>> &scores);

// Training objective: -(best summed SD-SDR)/C. Fills d(loss)/d(estimate).
template <typename T>
double UpitSdSdrLoss(const std::vector<std::vector<T>> &estimates,
                     const std::vector<std::vector<T>> &references,
                     std::vector<std::vector<T>> &grads, PermutationResult *chosen = nullptr);

}  // namespace mprnn

#endif  // MPRNN_METRICS_H_
