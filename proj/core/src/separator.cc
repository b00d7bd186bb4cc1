// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/separator.h"

#include <cmath>
#include <random>
#include <sstream>

#include "mprnn/ops.h"

namespace mprnn {

std::string FrameworkName(Framework f) {
  return f == Framework::kTwoOutput ? "2-output" : "1-output";
}

Framework ParseFramework(const std::string &s) {
  if (s == "two_output" || s == "2-output" || s == "2") return Framework::kTwoOutput;
  if (s == "one_output" || s == "1-output" || s == "1") return Framework::kOneOutput;
  throw InvalidArgument("unknown framework '" + s + "' (two_output|one_output)");
}

ModelConfig ModelConfig::Dprnn(bool online, Framework f) {
  ModelConfig c;
  c.separator = "dprnn";
  c.online = online;
  c.framework = f;
  c.blocks = 5;
  c.seg = SegConfig::Dprnn();
  return c;
}

ModelConfig ModelConfig::Mprnn(bool online, Framework f) {
  ModelConfig c;
  c.separator = "mprnn";
  c.online = online;
  c.framework = f;
  c.blocks = 3;
  c.seg = SegConfig::Mprnn();
  return c;
}

namespace {

const std::vector<std::string> kSeparatorKeys = {
    "type", "mode", "framework", "features", "hidden", "blocks", "chunk", "hop",
    "directions", "window", "stride", "sample_rate", "speakers", "seed"};

std::string JoinInts(const std::vector<int64_t> &v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

ModelConfig ModelConfig::FromConfig(const KeyValueConfig &cfg) {
  const auto unknown = cfg.UnknownKeys("separator", kSeparatorKeys);
  if (!unknown.empty()) throw InvalidArgument("unknown config key " + unknown.front());
  const KeyValueConfig s = cfg.Section("separator");

  const std::string type = s.GetString("type", "mprnn");
  const std::string mode = s.GetString("mode", "offline");
  if (mode != "offline" && mode != "online") {
    throw InvalidArgument("separator.mode must be offline|online, got '" + mode + "'");
  }
  const bool online = mode == "online";
  const Framework fw = ParseFramework(s.GetString("framework", "two_output"));
  ModelConfig c;
  if (type == "dprnn") {
    c = Dprnn(online, fw);
  } else if (type == "mprnn") {
    c = Mprnn(online, fw);
  } else {
    throw InvalidArgument("separator.type must be dprnn|mprnn, got '" + type + "'");
  }
  c.features = s.GetInt("features", c.features);
  c.hidden = s.GetInt("hidden", c.hidden);
  c.blocks = static_cast<int>(s.GetInt("blocks", c.blocks));
  c.seg.chunk = s.GetIntList("chunk", c.seg.chunk);
  c.seg.hop = s.GetIntList("hop", c.seg.hop);
  if (auto dirs = s.Get("directions")) {
    c.bidirectional.clear();
    for (const std::string &d : SplitString(*dirs, ',')) {
      if (d == "bi") {
        c.bidirectional.push_back(true);
      } else if (d == "uni") {
        c.bidirectional.push_back(false);
      } else {
        throw InvalidArgument("separator.directions entries must be bi|uni, got '" + d + "'");
      }
    }
  }
  c.window = s.GetInt("window", c.window);
  c.stride = static_cast<int>(s.GetInt("stride", c.window / 2));
  c.sample_rate = static_cast<int>(s.GetInt("sample_rate", c.sample_rate));
  c.speakers = static_cast<int>(s.GetInt("speakers", c.speakers));
  c.seed = static_cast<uint64_t>(s.GetInt("seed", 0));
  if (type == "dprnn" && c.seg.levels() != 1) {
    throw InvalidArgument("dprnn uses exactly one segmentation level");
  }
  c.Validate();
  return c;
}

KeyValueConfig ModelConfig::ToConfig() const {
  KeyValueConfig cfg;
  cfg.Set("separator.type", separator);
  cfg.Set("separator.mode", online ? "online" : "offline");
  cfg.Set("separator.framework", framework == Framework::kTwoOutput ? "two_output" : "one_output");
  cfg.Set("separator.features", std::to_string(features));
  cfg.Set("separator.hidden", std::to_string(hidden));
  cfg.Set("separator.blocks", std::to_string(blocks));
  cfg.Set("separator.chunk", JoinInts(seg.chunk));
  cfg.Set("separator.hop", JoinInts(seg.hop));
  if (!bidirectional.empty()) {
    std::string d;
    for (size_t i = 0; i < bidirectional.size(); ++i) {
      d += (i ? "," : "");
      d += bidirectional[i] ? "bi" : "uni";
    }
    cfg.Set("separator.directions", d);
  }
  cfg.Set("separator.window", std::to_string(window));
  cfg.Set("separator.stride", std::to_string(stride));
  cfg.Set("separator.sample_rate", std::to_string(sample_rate));
  cfg.Set("separator.speakers", std::to_string(speakers));
  cfg.Set("separator.seed", std::to_string(seed));
  return cfg;
}

std::vector<bool> ModelConfig::Directionality() const {
  if (!bidirectional.empty()) return bidirectional;
  return DirectionalityFor(levels(), online);
}

BlockConfig ModelConfig::block_config() const {
  BlockConfig b;
  b.levels = levels();
  b.features = features;
  b.hidden = hidden;
  b.bidirectional = Directionality();
  b.blocks = blocks;
  return b;
}

void ModelConfig::Validate() const {
  seg.Validate();
  block_config().Validate();
  MPRNN_CHECK(stride >= 1 && window >= stride,
              "encoder needs 1 <= stride <= window, got window " << window << " stride "
                                                                 << stride);
  MPRNN_CHECK(speakers == 2, "only 2-speaker separation is supported, got " << speakers);
  MPRNN_CHECK(sample_rate > 0, "sample rate must be positive");
}

int64_t ModelParamCount(const ModelConfig &config) {
  config.Validate();
  const int64_t n = config.features;
  const int64_t c = config.num_masks();
  return 2 * n * config.window + BlockStackParamCount(config.block_config()) + 1 +
         c * n * n + c * n;
}

int64_t EncodedFrames(const ModelConfig &config, int64_t num_samples) {
  return Conv1dOutputLength(num_samples, config.window, config.stride, true);
}

DelayReport AlgorithmicDelay(const ModelConfig &config, int64_t num_samples) {
  config.Validate();
  const std::vector<bool> dirs = config.Directionality();
  DelayReport r;
  if (dirs.back()) {
    r.offline = true;
    r.lookahead_frames = EncodedFrames(config, num_samples);
    r.worst_samples = num_samples;
    r.worst_seconds = static_cast<double>(num_samples) / config.sample_rate;
    r.average_seconds = r.worst_seconds;
    return r;
  }
  // Frame span and frame hop of one level-m chunk.
  int64_t span = 1, hop = 1;
  for (int m = 1; m <= config.levels(); ++m) {
    const int64_t k = config.seg.chunk[m - 1], p = config.seg.hop[m - 1];
    const int64_t next_span = m == 1 ? k : (k - 1) * hop + span;
    const int64_t next_hop = m == 1 ? p : p * hop;
    span = next_span;
    hop = next_hop;
    if (dirs[static_cast<size_t>(m - 1)]) {
      r.lookahead_frames = span;
      r.limiting_level = m;
    }
  }
  if (r.limiting_level == 0) r.lookahead_frames = 1;
  r.worst_samples = (r.lookahead_frames - 1) * config.stride + config.window;
  r.worst_seconds = static_cast<double>(r.worst_samples) / config.sample_rate;
  r.average_seconds = r.worst_seconds / 2;
  return r;
}

template <typename T>
Separator<T>::Separator(const ModelConfig &config) : config_(config) {
  config_.Validate();
  const int64_t n = config_.features;
  const int64_t c = config_.num_masks();
  encoder_ = &params_.Add("encoder/kernel", Tensor<T>({n, 1, config_.window}));
  blocks_ = RegisterBlocks(params_, config_.block_config());
  prelu_ = &params_.Add("mask/prelu", Tensor<T>({1}));
  mask_weight_ = &params_.Add("mask/weight", Tensor<T>({c * n, n}));
  mask_bias_ = &params_.Add("mask/bias", Tensor<T>({c * n}));
  decoder_ = &params_.Add("decoder/kernel", Tensor<T>({n, 1, config_.window}));

  std::mt19937_64 rng(config_.seed);
  auto fill = [&rng](Tensor<T> &t, double bound) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (T &v : t.values()) v = static_cast<T>(dist(rng));
  };
  const double win_bound = 1.0 / std::sqrt(static_cast<double>(config_.window));
  fill(encoder_->value, win_bound);
  InitBlocks(blocks_, rng);
  prelu_->value[0] = T(0.25);
  fill(mask_weight_->value, 1.0 / std::sqrt(static_cast<double>(n)));
  fill(decoder_->value, win_bound);
}

template <typename T>
Tensor<T> Separator<T>::Encode(std::span<const T> waveform) const {
  MPRNN_CHECK(!waveform.empty(), "cannot encode an empty waveform");
  Tensor<T> x({1, static_cast<int64_t>(waveform.size())},
              std::vector<T>(waveform.begin(), waveform.end()));
  return Pointwise(Conv1d(x, encoder_->value, config_.stride, true), Activation::kRelu);
}

template <typename T>
std::vector<std::vector<T>> Separator<T>::Forward(std::span<const T> mixture,
                                                  Cache *cache) const {
  MPRNN_CHECK(!mixture.empty(), "cannot separate an empty waveform");
  const int64_t num_samples = static_cast<int64_t>(mixture.size());
  const int64_t n = config_.features;
  Tensor<T> input({1, num_samples}, std::vector<T>(mixture.begin(), mixture.end()));
  Tensor<T> enc_pre = Conv1d(input, encoder_->value, config_.stride, true);
  Tensor<T> enc = Pointwise(enc_pre, Activation::kRelu);
  const int64_t frames = enc.dim(1);

  HierTensor<T> hier = Segment(enc, config_.seg);
  std::vector<BlockCache<T>> block_caches(cache ? blocks_.size() : 0);
  Tensor<T> cur = std::move(hier.data);
  for (size_t b = 0; b < blocks_.size(); ++b) {
    cur = BlockForward(cur, blocks_[b], cache ? &block_caches[b] : nullptr);
  }
  Tensor<T> merged = Merge(HierTensor<T>{std::move(cur), hier.meta});
  Tensor<T> head_in = Pointwise(merged, Activation::kPrelu, prelu_->value[0]);
  Tensor<T> mask_pre = Linear(head_in, mask_weight_->value, mask_bias_->value);
  Tensor<T> masks = Pointwise(mask_pre, Activation::kRelu);

  const int num_masks = config_.num_masks();
  std::vector<Tensor<T>> masked;
  std::vector<std::vector<T>> outputs;
  for (int c = 0; c < num_masks; ++c) {
    Tensor<T> m({n, frames});
    const T *mask = masks.data() + c * n * frames;
    for (int64_t i = 0; i < n * frames; ++i) m[i] = mask[i] * enc[i];
    Tensor<T> decoded = ConvTranspose1d(m, decoder_->value, config_.stride);
    outputs.emplace_back(decoded.data(), decoded.data() + num_samples);
    masked.push_back(std::move(m));
  }
  if (config_.framework == Framework::kOneOutput) {
    std::vector<T> rest(static_cast<size_t>(num_samples));
    for (int64_t i = 0; i < num_samples; ++i) rest[i] = mixture[i] - outputs[0][i];
    outputs.push_back(std::move(rest));
  }

  if (cache) {
    cache->input = std::move(input);
    cache->enc_pre = std::move(enc_pre);
    cache->enc = std::move(enc);
    cache->meta = hier.meta;
    cache->blocks = std::move(block_caches);
    cache->merged = std::move(merged);
    cache->head_in = std::move(head_in);
    cache->mask_pre = std::move(mask_pre);
    cache->masks = std::move(masks);
    cache->masked = std::move(masked);
  }
  return outputs;
}

template <typename T>
void Separator<T>::Backward(const Cache &cache,
                            const std::vector<std::vector<T>> &d_estimates) {
  MPRNN_CHECK(static_cast<int>(d_estimates.size()) == config_.speakers,
              "expected " << config_.speakers << " estimate gradients");
  const int64_t num_samples = cache.input.dim(1);
  const int64_t n = config_.features;
  const int64_t frames = cache.enc.dim(1);
  const int num_masks = config_.num_masks();
  for (const auto &d : d_estimates) {
    MPRNN_CHECK(static_cast<int64_t>(d.size()) == num_samples, "estimate gradient length mismatch");
  }

  // Gradient reaching each decoder output.
  std::vector<std::vector<T>> d_decoded(static_cast<size_t>(num_masks));
  if (config_.framework == Framework::kOneOutput) {
    d_decoded[0].resize(static_cast<size_t>(num_samples));
    for (int64_t i = 0; i < num_samples; ++i) d_decoded[0][i] = d_estimates[0][i] - d_estimates[1][i];
  } else {
    for (int c = 0; c < num_masks; ++c) d_decoded[c] = d_estimates[c];
  }

  const int64_t full_len = (frames - 1) * config_.stride + config_.window;
  Tensor<T> d_enc({n, frames});
  Tensor<T> d_masks(cache.masks.shape());
  for (int c = 0; c < num_masks; ++c) {
    Tensor<T> d_out({1, full_len});
    std::copy(d_decoded[c].begin(), d_decoded[c].end(), d_out.data());
    Tensor<T> d_masked = ConvTranspose1dBackward(cache.masked[c], decoder_->value,
                                                 config_.stride, d_out, decoder_->grad);
    const T *mask = cache.masks.data() + c * n * frames;
    T *dmask = d_masks.data() + c * n * frames;
    for (int64_t i = 0; i < n * frames; ++i) {
      dmask[i] = d_masked[i] * cache.enc[i];
      d_enc[i] += d_masked[i] * mask[i];
    }
  }
  Tensor<T> d_mask_pre = PointwiseBackward(cache.mask_pre, Activation::kRelu, d_masks);
  Tensor<T> d_head_in = LinearBackward(cache.head_in, mask_weight_->value, d_mask_pre,
                                       mask_weight_->grad, mask_bias_->grad);
  Tensor<T> d_merged = PointwiseBackward(cache.merged, Activation::kPrelu, d_head_in,
                                         prelu_->value[0], &prelu_->grad[0]);
  Tensor<T> d_hier = MergeAdjoint(d_merged, cache.meta);
  for (size_t b = blocks_.size(); b-- > 0;) {
    d_hier = BlockBackward(blocks_[b], cache.blocks[b], d_hier);
  }
  d_enc += SegmentAdjoint(d_hier, cache.meta);
  Tensor<T> d_enc_pre = PointwiseBackward(cache.enc_pre, Activation::kRelu, d_enc);
  Conv1dBackward(cache.input, encoder_->value, config_.stride, true, d_enc_pre,
                 encoder_->grad);
}

std::vector<std::vector<float>> Separate(const Separator<float> &model,
                                         std::span<const float> mixture) {
  std::string bad;
  if (!AllParamsFinite(model.params(), &bad)) {
    throw NumericError("model parameter " + bad + " holds NaN or Inf; refusing to separate");
  }
  return model.Forward(mixture);
}

template class Separator<float>;
template class Separator<double>;

}  // namespace mprnn
