// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_MIXTURE_H_
#define MPRNN_MIXTURE_H_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mprnn/manifest.h"
#include "mprnn/wav.h"

namespace mprnn {

using Rng = std::mt19937_64;

// Uniform in [0, 1) from the top 53 bits of one draw.
double Uniform01(Rng &rng);
uint64_t SplitMix64(uint64_t x);
// Seed of example `index` in a dataset generated with `seed`.
uint64_t ExampleSeed(uint64_t seed, int64_t index);

struct DialogueSpec {
  double duration_s = 30;
  double frame_s = 5;
  std::array<double, 3> speaker_count_probs = {0.25, 0.5, 0.25};
  int sample_rate = 8000;
  double gain_jitter_db = 2.5;  // per-utterance gain uniform in [-x, +x] dB
  double crossfade_ms = 50;
  uint64_t seed = 0;

  int64_t num_frames() const;
  int64_t frame_samples() const;
  int64_t num_samples() const { return num_frames() * frame_samples(); }
  int64_t crossfade_samples() const;
  void Validate() const;
};

using ActivityGrid = std::vector<std::array<bool, 2>>;

// Draws 0, 1 or 2 active speakers with the configured probabilities.
int SampleSpeakerCount(const DialogueSpec &spec, Rng &rng);
// One grid without the degenerate-grid guard.
ActivityGrid SampleActivityOnce(const DialogueSpec &spec, Rng &rng);
// Redraws the whole grid until both speakers are active somewhere.
ActivityGrid SampleActivity(const DialogueSpec &spec, Rng &rng);

struct Formant {
  double center_hz = 500;
  double bandwidth_hz = 100;
};

struct SpeakerVoice {
  double f0_min_hz = 100;
  double f0_max_hz = 140;
  double rolloff = 2.0;       // harmonic k has amplitude k^-rolloff
  std::vector<Formant> formants;
  double noise_mix = 0.05;    // RMS share of band-limited noise
};

// Low voice f0 inside [85, 155] Hz, high voice inside [185, 300] Hz, returned
// in random order.
std::array<SpeakerVoice, 2> SampleVoicePair(Rng &rng);

inline constexpr double kSourceRmsDbfs = -20.0;

// Harmonic complex with slowly drifting f0 and syllable-rate amplitude
// modulation, shaped by the formant envelope, plus low-passed noise.
// Normalized to kSourceRmsDbfs.
std::vector<double> SynthSource(const SpeakerVoice &voice, int64_t num_samples,
                                int sample_rate, Rng &rng);

struct DialogueExample {
  std::vector<float> mixture;
  std::array<std::vector<float>, 2> streams;
  ActivityGrid activity;
  std::vector<std::array<double, 2>> gains_db;  // per frame; 0 when inactive
  uint64_t seed = 0;
};

// Each run of consecutive active frames of a speaker is one utterance with
// raised-cosine fades inside its first and last crossfade window. The
// mixture is the float sum of the two streams; both streams are scaled down
// together if the mixture would exceed 0.99 in magnitude.
DialogueExample RenderExample(const DialogueSpec &spec, Rng &rng);
DialogueExample RenderExample(const DialogueSpec &spec, uint64_t seed);

struct GenOptions {
  WavFormat format = WavFormat::kPcm16;
  int jobs = 1;
  std::string manifest_name = "manifest.jsonl";
};

// Writes <out>/<id>/{mixture,s1,s2}.wav and <out>/manifest.jsonl. Example i
// is rendered from ExampleSeed(spec.seed, i). On failure every file and
// directory created by the call is removed.
Manifest GenerateDataset(const DialogueSpec &spec, int64_t num_examples,
                         const std::string &out_dir, const GenOptions &options = {});

std::string ExampleId(uint64_t seed, int64_t index);

}  // namespace mprnn

#endif  // MPRNN_MIXTURE_H_
