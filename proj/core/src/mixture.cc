// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/mixture.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numbers>
#include <thread>

#include "mprnn/error.h"

namespace mprnn {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxHarmonicHz = 3600.0;
constexpr double kNoiseCutoffHz = 1000.0;
constexpr float kMixturePeak = 0.99f;

double UniformIn(Rng &rng, double lo, double hi) { return lo + (hi - lo) * Uniform01(rng); }

int64_t ExactSamples(double seconds, int sample_rate, const char *what) {
  const double s = seconds * sample_rate;
  const double r = std::round(s);
  MPRNN_CHECK(std::abs(s - r) < 1e-6 && r > 0,
              what << " of " << seconds << " s is not a positive whole number of samples");
  return static_cast<int64_t>(r);
}

double Rms(const std::vector<double> &x) {
  double e = 0;
  for (double v : x) e += v * v;
  return std::sqrt(e / static_cast<double>(x.size()));
}

}  // namespace

double Uniform01(Rng &rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t ExampleSeed(uint64_t seed, int64_t index) {
  return SplitMix64(SplitMix64(seed) ^ static_cast<uint64_t>(index));
}

std::string ExampleId(uint64_t seed, int64_t index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "d%llu_%05lld", static_cast<unsigned long long>(seed),
                static_cast<long long>(index));
  return buf;
}

int64_t DialogueSpec::frame_samples() const {
  return ExactSamples(frame_s, sample_rate, "frame length");
}

int64_t DialogueSpec::num_frames() const {
  const int64_t total = ExactSamples(duration_s, sample_rate, "duration");
  const int64_t f = frame_samples();
  MPRNN_CHECK(total % f == 0, "duration " << duration_s << " s is not a multiple of the "
                                          << frame_s << " s frame length");
  return total / f;
}

int64_t DialogueSpec::crossfade_samples() const {
  return static_cast<int64_t>(std::llround(crossfade_ms * 1e-3 * sample_rate));
}

void DialogueSpec::Validate() const {
  MPRNN_CHECK(sample_rate > 0, "sample rate must be positive");
  double sum = 0;
  for (double p : speaker_count_probs) {
    MPRNN_CHECK(p >= 0, "speaker-count probabilities must be non-negative");
    sum += p;
  }
  MPRNN_CHECK(std::abs(sum - 1.0) < 1e-9, "speaker-count probabilities sum to " << sum);
  MPRNN_CHECK(speaker_count_probs[1] + speaker_count_probs[2] > 0,
              "at least one speaker must be able to talk");
  MPRNN_CHECK(gain_jitter_db >= 0, "gain jitter must be non-negative");
  MPRNN_CHECK(crossfade_ms >= 0, "crossfade must be non-negative");
  num_frames();
  MPRNN_CHECK(2 * crossfade_samples() <= frame_samples(),
              "crossfade of " << crossfade_ms << " ms does not fit twice in a frame");
}

int SampleSpeakerCount(const DialogueSpec &spec, Rng &rng) {
  const double u = Uniform01(rng);
  const auto &p = spec.speaker_count_probs;
  if (u < p[0]) return 0;
  if (u < p[0] + p[1]) return 1;
  return 2;
}

ActivityGrid SampleActivityOnce(const DialogueSpec &spec, Rng &rng) {
  ActivityGrid grid(spec.num_frames());
  for (auto &frame : grid) {
    switch (SampleSpeakerCount(spec, rng)) {
      case 0: frame = {false, false}; break;
      case 1: {
        const bool first = Uniform01(rng) < 0.5;
        frame = {first, !first};
        break;
      }
      default: frame = {true, true}; break;
    }
  }
  return grid;
}

ActivityGrid SampleActivity(const DialogueSpec &spec, Rng &rng) {
  for (;;) {
    ActivityGrid grid = SampleActivityOnce(spec, rng);
    bool a = false, b = false;
    for (const auto &f : grid) {
      a = a || f[0];
      b = b || f[1];
    }
    if (a && b) return grid;
  }
}

std::array<SpeakerVoice, 2> SampleVoicePair(Rng &rng) {
  auto make = [&](double lo_min, double lo_max, double w_min, double w_max) {
    SpeakerVoice v;
    v.f0_min_hz = UniformIn(rng, lo_min, lo_max);
    v.f0_max_hz = v.f0_min_hz + UniformIn(rng, w_min, w_max);
    v.rolloff = UniformIn(rng, 1.8, 2.2);
    v.formants = {{UniformIn(rng, 300, 800), UniformIn(rng, 80, 160)},
                  {UniformIn(rng, 900, 2200), UniformIn(rng, 100, 200)},
                  {UniformIn(rng, 2300, 3200), UniformIn(rng, 120, 240)}};
    v.noise_mix = UniformIn(rng, 0.02, 0.08);
    return v;
  };
  SpeakerVoice low = make(85, 110, 25, 45);
  SpeakerVoice high = make(185, 220, 40, 80);
  if (Uniform01(rng) < 0.5) return {low, high};
  return {high, low};
}

std::vector<double> SynthSource(const SpeakerVoice &voice, int64_t num_samples,
                                int sample_rate, Rng &rng) {
  MPRNN_CHECK(num_samples > 0, "source length must be positive");
  MPRNN_CHECK(voice.f0_min_hz > 0 && voice.f0_max_hz >= voice.f0_min_hz,
              "invalid f0 range [" << voice.f0_min_hz << ", " << voice.f0_max_hz << "]");
  const double sr = sample_rate;
  const double width = voice.f0_max_hz - voice.f0_min_hz;
  const double drift_hz = UniformIn(rng, 0.2, 0.8), drift_phase = UniformIn(rng, 0, kTwoPi);
  const double wobble_hz = UniformIn(rng, 1.0, 3.0), wobble_phase = UniformIn(rng, 0, kTwoPi);
  const double syllable_hz = UniformIn(rng, 3.0, 5.0), syllable_phase = UniformIn(rng, 0, kTwoPi);
  const int harmonics = std::max(1, static_cast<int>(std::min(kMaxHarmonicHz, 0.45 * sr) /
                                                     voice.f0_max_hz));
  std::vector<double> amp(harmonics), phase(harmonics);
  for (int k = 0; k < harmonics; ++k) {
    amp[k] = std::pow(k + 1.0, -voice.rolloff);
    phase[k] = UniformIn(rng, 0, kTwoPi);
  }
  auto envelope = [&](double f) {
    double peak = 0;
    for (const auto &fm : voice.formants) {
      const double d = (f - fm.center_hz) / (0.5 * fm.bandwidth_hz);
      peak = std::max(peak, 1.0 / (1.0 + d * d));
    }
    return 0.5 + peak;
  };

  std::vector<double> tone(num_samples), noise(num_samples);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double pole = std::exp(-kTwoPi * kNoiseCutoffHz / sr);
  double theta = 0, lp = 0;
  for (int64_t t = 0; t < num_samples; ++t) {
    const double time = t / sr;
    const double f0 = voice.f0_min_hz +
                      width * (0.5 + 0.35 * std::sin(kTwoPi * drift_hz * time + drift_phase) +
                               0.1 * std::sin(kTwoPi * wobble_hz * time + wobble_phase));
    const double syllable = 0.6 + 0.4 * std::sin(kTwoPi * syllable_hz * time + syllable_phase);
    double v = 0;
    for (int k = 0; k < harmonics; ++k) {
      v += amp[k] * envelope((k + 1) * f0) * std::sin((k + 1) * theta + phase[k]);
    }
    tone[t] = syllable * v;
    theta = std::fmod(theta + kTwoPi * f0 / sr, kTwoPi);
    lp = pole * lp + (1.0 - pole) * gauss(rng);
    noise[t] = syllable * lp;
  }
  const double tone_rms = Rms(tone), noise_rms = Rms(noise);
  const double target = std::pow(10.0, kSourceRmsDbfs / 20.0);
  std::vector<double> out(num_samples);
  for (int64_t t = 0; t < num_samples; ++t) {
    out[t] = (1.0 - voice.noise_mix) * tone[t] / tone_rms +
             (noise_rms > 0 ? voice.noise_mix * noise[t] / noise_rms : 0.0);
  }
  const double scale = target / Rms(out);
  for (double &v : out) v *= scale;
  return out;
}

DialogueExample RenderExample(const DialogueSpec &spec, Rng &rng) {
  spec.Validate();
  const int64_t frames = spec.num_frames();
  const int64_t fs = spec.frame_samples();
  const int64_t n = frames * fs;
  const int64_t xf = spec.crossfade_samples();

  DialogueExample ex;
  ex.activity = SampleActivity(spec, rng);
  ex.gains_db.assign(frames, {0.0, 0.0});
  const auto voices = SampleVoicePair(rng);

  std::array<std::vector<double>, 2> streams;
  for (int s = 0; s < 2; ++s) {
    streams[s].assign(n, 0.0);
    for (int64_t a = 0; a < frames;) {
      if (!ex.activity[a][s]) {
        ++a;
        continue;
      }
      int64_t b = a;
      while (b < frames && ex.activity[b][s]) ++b;
      const int64_t len = (b - a) * fs;
      const std::vector<double> src = SynthSource(voices[s], len, spec.sample_rate, rng);
      const double gain_db = UniformIn(rng, -spec.gain_jitter_db, spec.gain_jitter_db);
      const double gain = std::pow(10.0, gain_db / 20.0);
      for (int64_t i = 0; i < len; ++i) {
        double w = 1.0;
        const int64_t edge = std::min(i, len - 1 - i);
        if (edge < xf) w = 0.5 * (1.0 - std::cos(std::numbers::pi * (edge + 0.5) / xf));
        streams[s][a * fs + i] = gain * w * src[i];
      }
      for (int64_t f = a; f < b; ++f) ex.gains_db[f][s] = gain_db;
      a = b;
    }
  }

  for (int s = 0; s < 2; ++s) {
    ex.streams[s].assign(streams[s].begin(), streams[s].end());
  }
  auto sum = [&] {
    ex.mixture.resize(n);
    float peak = 0;
    for (int64_t t = 0; t < n; ++t) {
      ex.mixture[t] = ex.streams[0][t] + ex.streams[1][t];
      peak = std::max(peak, std::abs(ex.mixture[t]));
    }
    return peak;
  };
  const float peak = sum();
  if (peak > kMixturePeak) {
    const float scale = kMixturePeak / peak;
    for (auto &st : ex.streams) {
      for (float &v : st) v *= scale;
    }
    sum();
  }
  return ex;
}

DialogueExample RenderExample(const DialogueSpec &spec, uint64_t seed) {
  Rng rng(seed);
  DialogueExample ex = RenderExample(spec, rng);
  ex.seed = seed;
  return ex;
}

Manifest GenerateDataset(const DialogueSpec &spec, int64_t num_examples,
                         const std::string &out_dir, const GenOptions &options) {
  spec.Validate();
  MPRNN_CHECK(num_examples >= 1, "number of examples must be at least 1");
  MPRNN_CHECK(options.jobs >= 1, "jobs must be at least 1");

  const fs::path root(out_dir);
  std::mutex created_mu;
  std::vector<fs::path> created;
  auto cleanup = [&] {
    std::error_code ec;
    for (auto it = created.rbegin(); it != created.rend(); ++it) fs::remove_all(*it, ec);
  };

  Manifest manifest;
  manifest.base_dir = root.string();
  manifest.entries.resize(num_examples);
  try {
    std::error_code ec;
    if (!fs::exists(root)) {
      if (!fs::create_directories(root, ec) || ec) {
        throw IoError("cannot create output directory " + root.string() +
                      (ec ? ": " + ec.message() : ""));
      }
      created.push_back(root);
    } else if (!fs::is_directory(root)) {
      throw IoError(root.string() + " exists and is not a directory");
    }

    std::atomic<int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
      for (;;) {
        const int64_t i = next.fetch_add(1);
        if (i >= num_examples) return;
        {
          std::lock_guard<std::mutex> lock(error_mu);
          if (error) return;
        }
        try {
          const uint64_t seed = ExampleSeed(spec.seed, i);
          const DialogueExample ex = RenderExample(spec, seed);
          ManifestEntry &e = manifest.entries[i];
          e.id = ExampleId(spec.seed, i);
          const fs::path dir = root / e.id;
          std::error_code dir_ec;
          const bool made = fs::create_directory(dir, dir_ec);
          if (dir_ec) throw IoError("cannot create " + dir.string() + ": " + dir_ec.message());
          if (made) {
            std::lock_guard<std::mutex> lock(created_mu);
            created.push_back(dir);
          }
          WriteWav((dir / "mixture.wav").string(), ex.mixture, spec.sample_rate, options.format);
          WriteWav((dir / "s1.wav").string(), ex.streams[0], spec.sample_rate, options.format);
          WriteWav((dir / "s2.wav").string(), ex.streams[1], spec.sample_rate, options.format);
          e.mixture_path = e.id + "/mixture.wav";
          e.source_paths = {e.id + "/s1.wav", e.id + "/s2.wav"};
          e.duration_s = static_cast<double>(ex.mixture.size()) / spec.sample_rate;
          e.seed = seed;
          e.activity_grid = ex.activity;
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    };
    const int threads = static_cast<int>(std::min<int64_t>(options.jobs, num_examples));
    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto &th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    const fs::path manifest_path = root / options.manifest_name;
    created.push_back(manifest_path);
    WriteManifest(manifest, manifest_path.string());
  } catch (const fs::filesystem_error &e) {
    cleanup();
    throw IoError(e.what());
  } catch (...) {
    cleanup();
    throw;
  }
  return manifest;
}

}  // namespace mprnn
