// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_SEPARATOR_H_
#define MPRNN_SEPARATOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mprnn/config.h"
#include "mprnn/mprnn_block.h"
#include "mprnn/param_store.h"
#include "mprnn/segmentation.h"

namespace mprnn {

enum class Framework {
  kTwoOutput,  // one mask per speaker
  kOneOutput,  // one mask; second stream = mixture - first stream
};

std::string FrameworkName(Framework f);
Framework ParseFramework(const std::string &s);

struct ModelConfig {
  std::string separator = "mprnn";  // "dprnn" (M = 1) or "mprnn"
  bool online = false;
  Framework framework = Framework::kTwoOutput;
  int64_t features = 64;
  int64_t hidden = 128;
  int blocks = 3;
  SegConfig seg = SegConfig::Mprnn();
  // Per-level directionality (M + 1 entries). Empty = derived from `online`.
  std::vector<bool> bidirectional;
  int64_t window = 16;
  int stride = 8;
  int sample_rate = 8000;
  int speakers = 2;
  uint64_t seed = 0;

  // N=64, H=128, window 16, K=100/P=50; DPRNN 5 blocks, MPRNN 3 blocks with
  // K=[100,60], P=[50,30].
  static ModelConfig Dprnn(bool online = false, Framework f = Framework::kTwoOutput);
  static ModelConfig Mprnn(bool online = false, Framework f = Framework::kTwoOutput);

  // Reads "separator.*" keys; unset keys take the defaults of the chosen type.
  static ModelConfig FromConfig(const KeyValueConfig &cfg);
  // Round-trips through FromConfig.
  KeyValueConfig ToConfig() const;

  int levels() const { return seg.levels(); }
  int num_masks() const { return framework == Framework::kTwoOutput ? speakers : 1; }
  std::vector<bool> Directionality() const;
  BlockConfig block_config() const;
  void Validate() const;
};

// Closed-form trainable scalar count: encoder N*W, decoder N*W, blocks,
// mask head 1 (PReLU) + C*N*N + C*N.
int64_t ModelParamCount(const ModelConfig &config);

struct DelayReport {
  bool offline = false;
  int64_t lookahead_frames = 0;  // span of the largest bidirectional structure
  int64_t worst_samples = 0;
  double worst_seconds = 0;
  double average_seconds = 0;
  int limiting_level = 0;        // 0 when offline
};

// Input lookahead needed before an output sample can be emitted. Worst case:
// the sample span of the coarsest bidirectionally processed chunk,
// (F - 1) * stride + window for a chunk of F frames. Average case: mean
// lookahead over positions inside that chunk, i.e. half the worst case.
// Offline models need the whole input (num_samples).
DelayReport AlgorithmicDelay(const ModelConfig &config, int64_t num_samples);

// Frame count after the encoder, ceil(num_samples / stride).
int64_t EncodedFrames(const ModelConfig &config, int64_t num_samples);

template <typename T>
class Separator {
 public:
  explicit Separator(const ModelConfig &config);

  Separator(Separator &&) = default;
  Separator &operator=(Separator &&) = default;

  struct Cache {
    Tensor<T> input;     // [1 x T]
    Tensor<T> enc_pre;   // [N x L]
    Tensor<T> enc;       // ReLU(enc_pre)
    SegMeta meta;
    std::vector<BlockCache<T>> blocks;
    Tensor<T> merged;    // [N x L]
    Tensor<T> head_in;   // PReLU(merged)
    Tensor<T> mask_pre;  // [C*N x L]
    Tensor<T> masks;     // ReLU(mask_pre)
    std::vector<Tensor<T>> masked;  // per mask, [N x L]
  };

  // Returns `speakers` waveforms of the input length.
  std::vector<std::vector<T>> Forward(std::span<const T> mixture,
                                      Cache *cache = nullptr) const;

  // Accumulates parameter gradients given d(loss)/d(estimate) per stream.
  void Backward(const Cache &cache, const std::vector<std::vector<T>> &d_estimates);

  // Encoder only: ReLU(conv1d(w)), [N x ceil(T / stride)].
  Tensor<T> Encode(std::span<const T> waveform) const;

  const ModelConfig &config() const { return config_; }
  ParamStore<T> &params() { return params_; }
  const ParamStore<T> &params() const { return params_; }
  const std::vector<Block<T>> &blocks() const { return blocks_; }

  template <typename U>
  Separator<U> Cast() const {
    Separator<U> out(config_);
    for (const auto &[name, p] : params_) out.params().Get(name).value = p.value.template Cast<U>();
    return out;
  }

 private:
  ModelConfig config_;
  ParamStore<T> params_;
  Param<T> *encoder_ = nullptr;      // [N x 1 x W]
  Param<T> *decoder_ = nullptr;      // [N x 1 x W]
  Param<T> *prelu_ = nullptr;        // [1]
  Param<T> *mask_weight_ = nullptr;  // [C*N x N]
  Param<T> *mask_bias_ = nullptr;    // [C*N]
  std::vector<Block<T>> blocks_;
};

// Inference entry point. Refuses models holding non-finite parameters.
std::vector<std::vector<float>> Separate(const Separator<float> &model,
                                         std::span<const float> mixture);

}  // namespace mprnn

#endif  // MPRNN_SEPARATOR_H_
