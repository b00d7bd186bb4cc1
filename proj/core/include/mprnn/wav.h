// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_WAV_H_
#define MPRNN_WAV_H_

#include <span>
#include <string>
#include <vector>

namespace mprnn {

enum class WavFormat { kPcm16, kFloat32 };

struct Wav {
  int sample_rate = 8000;
  std::vector<float> samples;  // mono, nominal range [-1, 1)
};

// PCM16 uses a 32768 full scale in both directions, so multiples of 1/32768
// in range survive a roundtrip exactly. Out-of-range samples are clipped.
std::string EncodeWav(std::span<const float> samples, int sample_rate, WavFormat format);
Wav DecodeWav(const std::string &bytes, const std::string &origin = "<memory>");

void WriteWav(const std::string &path, std::span<const float> samples, int sample_rate,
              WavFormat format);
Wav ReadWav(const std::string &path);

// The value a sample takes after a PCM16 roundtrip.
float QuantizePcm16(float x);

}  // namespace mprnn

#endif  // MPRNN_WAV_H_
