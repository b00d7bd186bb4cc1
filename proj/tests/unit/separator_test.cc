// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/separator.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mprnn/error.h"
#include "mprnn/grad_check.h"
#include "test_util.h"

namespace mprnn {
namespace {

using testing::RandomVector;

ModelConfig TinyConfig(bool online, Framework f = Framework::kTwoOutput) {
  ModelConfig c = ModelConfig::Mprnn(online, f);
  c.features = 8;
  c.hidden = 8;
  c.blocks = 1;
  c.seg = SegConfig{{6, 4}, {3, 2}};
  c.seed = 17;
  return c;
}

double MaxAbs(const std::vector<double> &v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

TEST(EncoderTest, FrameCountFollowsStride) {
  EXPECT_EQ(EncodedFrames(ModelConfig::Mprnn(), 240000), 30000);
  EXPECT_EQ(EncodedFrames(ModelConfig::Mprnn(), 960000), 120000);
  EXPECT_EQ(EncodedFrames(ModelConfig::Mprnn(), 17), 3);
  const Separator<float> model(TinyConfig(false));
  std::mt19937_64 rng(1);
  const auto w = RandomVector<float>(1001, rng);
  const auto enc = model.Encode(w);
  EXPECT_EQ(enc.shape(), (Shape{8, 126}));
}

TEST(EncoderTest, ReluOutputIsNonNegative) {
  const Separator<float> model(TinyConfig(false));
  std::mt19937_64 rng(2);
  const auto enc = model.Encode(RandomVector<float>(800, rng));
  int positive = 0;
  for (float v : enc.values()) {
    EXPECT_GE(v, 0.0f);
    positive += v > 0;
  }
  EXPECT_GT(positive, 0);
}

TEST(EncoderTest, ZeroWaveformGivesZeroFeatures) {
  const Separator<float> model(TinyConfig(false));
  const auto enc = model.Encode(std::vector<float>(640, 0.0f));
  for (float v : enc.values()) EXPECT_EQ(v, 0.0f);
  EXPECT_THROW(model.Encode(std::vector<float>{}), InvalidArgument);
}

TEST(SeparatorTest, LengthPreservingAndDeterministic) {
  for (int len : {1, 7, 8, 333, 2000}) {
    const Separator<float> a(TinyConfig(false)), b(TinyConfig(false));
    std::mt19937_64 rng(len);
    const auto mix = RandomVector<float>(len, rng);
    const auto oa = a.Forward(mix), ob = b.Forward(mix);
    ASSERT_EQ(oa.size(), 2u);
    for (int c = 0; c < 2; ++c) {
      EXPECT_EQ(static_cast<int>(oa[c].size()), len);
      EXPECT_EQ(oa[c], ob[c]);
    }
  }
}

TEST(SeparatorTest, OneOutputStreamsSumToMixture) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 3; ++trial) {
    ModelConfig c = TinyConfig(trial == 1, Framework::kOneOutput);
    c.seed = 100 + trial;
    Separator<double> md(c);
    testing::RandomizeParams(md.params(), rng, 0.3);
    const auto mix = RandomVector<double>(1200, rng);
    const auto od = md.Forward(mix);
    double worst = 0;
    for (size_t i = 0; i < mix.size(); ++i)
      worst = std::max(worst, std::abs(od[0][i] + od[1][i] - mix[i]));
    EXPECT_LT(worst, 1e-15);

    const Separator<float> mf = md.Cast<float>();
    std::vector<float> mixf(mix.begin(), mix.end());
    const auto of = mf.Forward(mixf);
    float worst_f = 0;
    for (size_t i = 0; i < mixf.size(); ++i)
      worst_f = std::max(worst_f, std::abs(of[0][i] + of[1][i] - mixf[i]));
    EXPECT_LT(worst_f, 1e-6f);
  }
}

TEST(SeparatorTest, ZeroMaskHead) {
  std::mt19937_64 rng(4);
  const auto mix = RandomVector<float>(900, rng);
  for (Framework f : {Framework::kTwoOutput, Framework::kOneOutput}) {
    Separator<float> model(TinyConfig(false, f));
    model.params().Get("mask/weight").value.SetZero();
    model.params().Get("mask/bias").value.SetZero();
    const auto out = model.Forward(mix);
    for (float v : out[0]) EXPECT_EQ(v, 0.0f);
    if (f == Framework::kTwoOutput) {
      for (float v : out[1]) EXPECT_EQ(v, 0.0f);
    } else {
      EXPECT_EQ(out[1], mix);
    }
  }
}

TEST(SeparatorTest, MaskCountFollowsFramework) {
  EXPECT_EQ(TinyConfig(false).num_masks(), 2);
  EXPECT_EQ(TinyConfig(false, Framework::kOneOutput).num_masks(), 1);
  const Separator<float> two(TinyConfig(false));
  const Separator<float> one(TinyConfig(false, Framework::kOneOutput));
  EXPECT_EQ(two.params().Get("mask/weight").value.shape(), (Shape{16, 8}));
  EXPECT_EQ(one.params().Get("mask/weight").value.shape(), (Shape{8, 8}));
}

TEST(ParamCountTest, DefaultModels) {
  const int64_t dprnn = ModelParamCount(ModelConfig::Dprnn());
  const int64_t mprnn = ModelParamCount(ModelConfig::Mprnn());
  EXPECT_EQ(dprnn, 2152449);
  EXPECT_EQ(mprnn, 1938241);
  EXPECT_LT(std::abs(dprnn - 2.17e6) / 2.17e6, 0.03);
  EXPECT_LT(std::abs(mprnn - 1.95e6) / 1.95e6, 0.03);
  EXPECT_EQ(ModelParamCount(ModelConfig::Dprnn(true)) - ModelParamCount(ModelConfig::Mprnn(true)),
            192);
  EXPECT_EQ(Separator<float>(ModelConfig::Dprnn()).params().NumScalars(), dprnn);
  EXPECT_EQ(Separator<float>(ModelConfig::Mprnn(true)).params().NumScalars(),
            ModelParamCount(ModelConfig::Mprnn(true)));
}

TEST(DelayTest, DefaultConfigurations) {
  const DelayReport d = AlgorithmicDelay(ModelConfig::Dprnn(true), 240000);
  EXPECT_FALSE(d.offline);
  EXPECT_EQ(d.worst_samples, 808);
  EXPECT_NEAR(d.worst_seconds, 0.101, 1e-12);
  EXPECT_EQ(d.limiting_level, 1);

  const DelayReport m = AlgorithmicDelay(ModelConfig::Mprnn(true), 240000);
  EXPECT_EQ(m.lookahead_frames, 99 * 1 + 59 * 50 + 1);
  EXPECT_EQ(m.worst_samples, (3050 - 1) * 8 + 16);
  EXPECT_NEAR(m.worst_seconds, 3.051, 1e-12);
  EXPECT_GE(m.average_seconds, 1.5);
  EXPECT_LE(m.average_seconds, 1.6);
  EXPECT_EQ(m.limiting_level, 2);

  const DelayReport off = AlgorithmicDelay(ModelConfig::Mprnn(false), 240000);
  EXPECT_TRUE(off.offline);
  EXPECT_DOUBLE_EQ(off.worst_seconds, 30.0);
}

// Perturbs everything from `from` onward and reports the largest change in
// output samples [0, upto].
double PerturbationLeak(const Separator<float> &model, int64_t from, int64_t upto) {
  std::mt19937_64 rng(5);
  const auto mix = RandomVector<float>(4000, rng, 0.5);
  auto perturbed = mix;
  for (int64_t i = from; i < static_cast<int64_t>(perturbed.size()); ++i) perturbed[i] += 0.3f;
  const auto a = model.Forward(mix), b = model.Forward(perturbed);
  double leak = 0;
  for (int c = 0; c < 2; ++c)
    for (int64_t i = 0; i <= upto; ++i) leak = std::max(leak, std::abs(double(a[c][i]) - b[c][i]));
  return leak;
}

TEST(CausalityTest, OnlineModelIgnoresInputBeyondDelay) {
  const ModelConfig c = TinyConfig(true);
  const Separator<float> model(c);
  const int64_t delay = AlgorithmicDelay(c, 4000).worst_samples;
  EXPECT_EQ(delay, 14 * 8 + 16);
  for (int64_t t : {500, 1999, 2717}) {
    EXPECT_LT(PerturbationLeak(model, t + delay, t), 1e-6) << "t=" << t;
  }
  // Perturbing well inside the window must reach the output.
  EXPECT_GT(PerturbationLeak(model, 1900, 1999), 1e-6);
}

TEST(CausalityTest, OfflineModelIsNotCausal) {
  const ModelConfig c = TinyConfig(false);
  const Separator<float> model(c);
  const int64_t delay = AlgorithmicDelay(TinyConfig(true), 4000).worst_samples;
  EXPECT_GT(PerturbationLeak(model, 1999 + delay, 1999), 1e-6);
}

void CheckEndToEndGradient(Framework f) {
  ModelConfig c = TinyConfig(false, f);
  Separator<double> model(c);
  std::mt19937_64 rng(6);
  testing::RandomizeParams(model.params(), rng, 0.4);
  model.params().Get("mask/prelu").value[0] = 0.25;
  const auto mix = RandomVector<double>(2000, rng);  // 0.25 s
  const std::vector<std::vector<double>> proj = {RandomVector<double>(2000, rng),
                                                 RandomVector<double>(2000, rng)};
  auto loss = [&] {
    const auto out = model.Forward(mix);
    double s = 0;
    for (int k = 0; k < 2; ++k)
      for (size_t i = 0; i < mix.size(); ++i) s += out[k][i] * proj[k][i];
    return s;
  };
  Separator<double>::Cache cache;
  model.params().ZeroGrad();
  model.Forward(mix, &cache);
  model.Backward(cache, proj);
  std::vector<GradCheckTarget> targets;
  for (auto &[name, p] : model.params()) targets.push_back({name, &p.value, &p.grad});
  const auto r = GradCheck(loss, targets, {.tolerance = 1e-3, .max_coords = 10});
  EXPECT_TRUE(r.passed) << r.worst_target << "[" << r.worst_index << "] analytic "
                        << r.worst_analytic << " numeric " << r.worst_numeric;
}

TEST(SeparatorGradTest, TwoOutput) { CheckEndToEndGradient(Framework::kTwoOutput); }
TEST(SeparatorGradTest, OneOutput) { CheckEndToEndGradient(Framework::kOneOutput); }

TEST(SeparatorTest, SeparateRefusesNonFiniteParameters) {
  Separator<float> model(TinyConfig(false));
  model.params().Get("block0/sub2/fc/bias").value[3] = std::numeric_limits<float>::quiet_NaN();
  try {
    Separate(model, std::vector<float>(100, 0.1f));
    FAIL() << "expected NumericError";
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("block0/sub2/fc/bias"), std::string::npos);
  }
}

TEST(ModelConfigTest, RoundTripsThroughKeyValues) {
  ModelConfig c = TinyConfig(true, Framework::kOneOutput);
  c.bidirectional = {true, false, false};
  const ModelConfig back = ModelConfig::FromConfig(c.ToConfig());
  EXPECT_EQ(back.ToConfig().ToText(), c.ToConfig().ToText());
  EXPECT_EQ(back.Directionality(), c.bidirectional);
  EXPECT_EQ(back.framework, Framework::kOneOutput);
}

TEST(ModelConfigTest, RejectsInvalidValues) {
  KeyValueConfig cfg;
  cfg.Set("separator.mode", "sometimes");
  EXPECT_THROW(ModelConfig::FromConfig(cfg), InvalidArgument);
  KeyValueConfig unknown;
  unknown.Set("separator.colour", "blue");
  EXPECT_THROW(ModelConfig::FromConfig(unknown), InvalidArgument);
  ModelConfig c = TinyConfig(false);
  c.stride = 20;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = TinyConfig(false);
  c.speakers = 3;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

}  // namespace
}  // namespace mprnn
