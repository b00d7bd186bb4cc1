// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/lstm.h"

#include <gtest/gtest.h>

#include <cmath>

#include "mprnn/grad_check.h"
#include "test_util.h"

namespace mprnn {
namespace {

using testing::Dot;
using testing::RandomTensor;

struct Weights {
  Tensor<double> w_ih, w_hh, bias;
  Tensor<double> g_ih, g_hh, g_bias;
  Weights(int64_t n, int64_t h, std::mt19937_64 &rng, double scale = 0.5)
      : w_ih(RandomTensor<double>({4 * h, n}, rng, scale)),
        w_hh(RandomTensor<double>({4 * h, h}, rng, scale)),
        bias(RandomTensor<double>({4 * h}, rng, scale)),
        g_ih(w_ih.shape()),
        g_hh(w_hh.shape()),
        g_bias(bias.shape()) {}
  LstmWeights<double> w() const { return {&w_ih, &w_hh, &bias}; }
  LstmGrads<double> g() { return {&g_ih, &g_hh, &g_bias}; }
};

double Sig(double v) { return 1 / (1 + std::exp(-v)); }

TEST(LstmTest, ZeroWeightsGiveZeroOutput) {
  Tensor<double> w_ih({8, 3}), w_hh({8, 2}), bias({8});
  std::mt19937_64 rng(1);
  const auto x = RandomTensor<double>({3, 5, 2}, rng);
  const auto h = LstmForward(x, LstmWeights<double>{&w_ih, &w_hh, &bias}, Direction::kForward);
  ASSERT_EQ(h.shape(), (Shape{2, 5, 2}));
  for (double v : h.values()) EXPECT_EQ(v, 0.0);
}

TEST(LstmTest, ScalarHandComputation) {
  // Gate rows: input, forget, cell, output.
  Tensor<double> w_ih({4, 1}, {0.5, -0.3, 0.8, 0.2});
  Tensor<double> w_hh({4, 1}, {0.1, 0.4, -0.6, 0.3});
  Tensor<double> bias({4}, {0.05, 1.0, -0.1, 0.0});
  Tensor<double> x({1, 2}, {0.7, -0.4});
  const auto h = LstmForward(x, LstmWeights<double>{&w_ih, &w_hh, &bias}, Direction::kForward);

  double hp = 0, cp = 0;
  std::vector<double> expect;
  for (double xt : {0.7, -0.4}) {
    const double i = Sig(0.5 * xt + 0.1 * hp + 0.05);
    const double f = Sig(-0.3 * xt + 0.4 * hp + 1.0);
    const double g = std::tanh(0.8 * xt - 0.6 * hp - 0.1);
    const double o = Sig(0.2 * xt + 0.3 * hp);
    cp = f * cp + i * g;
    hp = o * std::tanh(cp);
    expect.push_back(hp);
  }
  EXPECT_NEAR(h[0], expect[0], 1e-15);
  EXPECT_NEAR(h[1], expect[1], 1e-15);
}

TEST(LstmTest, BackwardDirectionMirrorsSymmetricInput) {
  std::mt19937_64 rng(2);
  Weights w(3, 4, rng);
  Tensor<double> x({3, 6});
  for (int i = 0; i < 3; ++i)
    for (int t = 0; t < 3; ++t) x(i, t) = x(i, 5 - t) = std::sin(1.3 * i + t);
  const auto fwd = LstmForward(x, w.w(), Direction::kForward);
  const auto bwd = LstmForward(x, w.w(), Direction::kBackward);
  for (int u = 0; u < 4; ++u)
    for (int t = 0; t < 6; ++t) EXPECT_NEAR(bwd(u, t), fwd(u, 5 - t), 1e-15);
}

TEST(LstmTest, BatchedSequencesAreIndependent) {
  std::mt19937_64 rng(3);
  Weights w(3, 4, rng);
  const auto x = RandomTensor<double>({3, 7, 5}, rng);
  const auto batched = LstmForward(x, w.w(), Direction::kForward);
  for (int b = 0; b < 5; ++b) {
    Tensor<double> one({3, 7});
    for (int i = 0; i < 3; ++i)
      for (int t = 0; t < 7; ++t) one(i, t) = x(i, t, b);
    const auto h = LstmForward(one, w.w(), Direction::kForward);
    for (int u = 0; u < 4; ++u)
      for (int t = 0; t < 7; ++t) EXPECT_NEAR(batched(u, t, b), h(u, t), 1e-14);
  }
}

TEST(BiLstmTest, StacksTwoIndependentPasses) {
  std::mt19937_64 rng(4);
  Weights f(3, 4, rng), b(3, 4, rng);
  const auto x = RandomTensor<double>({3, 6, 2}, rng);
  const auto both = BiLstmForward<double>(x, f.w(), b.w(), nullptr, nullptr);
  ASSERT_EQ(both.shape(), (Shape{8, 6, 2}));
  const auto hf = LstmForward(x, f.w(), Direction::kForward);
  const auto hb = LstmForward(x, b.w(), Direction::kBackward);
  for (int u = 0; u < 4; ++u)
    for (int t = 0; t < 6; ++t)
      for (int e = 0; e < 2; ++e) {
        EXPECT_EQ(both(u, t, e), hf(u, t, e));
        EXPECT_EQ(both(4 + u, t, e), hb(u, t, e));
      }
}

TEST(BiLstmTest, ZeroWeightsGiveZeroOutput) {
  Tensor<double> w_ih({8, 3}), w_hh({8, 2}), bias({8});
  LstmWeights<double> w{&w_ih, &w_hh, &bias};
  std::mt19937_64 rng(5);
  const auto out = BiLstmForward<double>(RandomTensor<double>({3, 4}, rng), w, w, nullptr, nullptr);
  EXPECT_EQ(out.dim(0), 4);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(LstmGradTest, ScalarSingleStep) {
  std::mt19937_64 rng(6);
  Weights w(1, 1, rng);
  auto x = RandomTensor<double>({1, 1}, rng);
  Tensor<double> proj({1, 1}, {1.0});
  LstmCache<double> cache;
  LstmForward(x, w.w(), Direction::kForward, &cache);
  const auto dx = LstmBackward(cache, w.w(), proj, w.g());
  auto loss = [&] { return LstmForward(x, w.w(), Direction::kForward)[0]; };
  const GradCheckTarget t[] = {
      {"x", &x, &dx}, {"w_ih", &w.w_ih, &w.g_ih}, {"w_hh", &w.w_hh, &w.g_hh}, {"bias", &w.bias, &w.g_bias}};
  const auto r = GradCheck(loss, t, {.tolerance = 1e-6});
  EXPECT_TRUE(r.passed) << r.worst_target << " " << r.max_rel_error;
}

TEST(LstmGradTest, BatchedSequenceBothDirections) {
  std::mt19937_64 rng(7);
  for (Direction dir : {Direction::kForward, Direction::kBackward}) {
    Weights w(3, 4, rng);
    auto x = RandomTensor<double>({3, 5, 2}, rng);
    const auto proj = RandomTensor<double>({4, 5, 2}, rng);
    LstmCache<double> cache;
    LstmForward(x, w.w(), dir, &cache);
    const auto dx = LstmBackward(cache, w.w(), proj, w.g());
    auto loss = [&] { return Dot(LstmForward(x, w.w(), dir), proj); };
    const GradCheckTarget t[] = {{"x", &x, &dx},
                                 {"w_ih", &w.w_ih, &w.g_ih},
                                 {"w_hh", &w.w_hh, &w.g_hh},
                                 {"bias", &w.bias, &w.g_bias}};
    const auto r = GradCheck(loss, t);
    EXPECT_TRUE(r.passed) << r.worst_target << " " << r.max_rel_error;
  }
}

TEST(LstmGradTest, Bidirectional) {
  std::mt19937_64 rng(8);
  Weights f(3, 2, rng), b(3, 2, rng);
  auto x = RandomTensor<double>({3, 4, 3}, rng);
  const auto proj = RandomTensor<double>({4, 4, 3}, rng);
  LstmCache<double> cf, cb;
  BiLstmForward<double>(x, f.w(), b.w(), &cf, &cb);
  const auto dx = BiLstmBackward(cf, cb, f.w(), b.w(), proj, f.g(), b.g());
  auto loss = [&] { return Dot(BiLstmForward<double>(x, f.w(), b.w(), nullptr, nullptr), proj); };
  const GradCheckTarget t[] = {{"x", &x, &dx},         {"f.w_ih", &f.w_ih, &f.g_ih},
                               {"f.w_hh", &f.w_hh, &f.g_hh}, {"f.bias", &f.bias, &f.g_bias},
                               {"b.w_ih", &b.w_ih, &b.g_ih}, {"b.w_hh", &b.w_hh, &b.g_hh},
                               {"b.bias", &b.bias, &b.g_bias}};
  const auto r = GradCheck(loss, t);
  EXPECT_TRUE(r.passed) << r.worst_target << " " << r.max_rel_error;
}

}  // namespace
}  // namespace mprnn
