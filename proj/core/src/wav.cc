// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mprnn/error.h"

namespace mprnn {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes little-endian");

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;

template <typename U>
void Put(std::string &out, U v) {
  char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  out.append(b, sizeof(U));
}

template <typename U>
U Get(const std::string &bytes, size_t pos) {
  U v;
  std::memcpy(&v, bytes.data() + pos, sizeof(U));
  return v;
}

int16_t ToPcm16(float x) {
  const double v = std::nearbyint(static_cast<double>(x) * 32768.0);
  return static_cast<int16_t>(std::clamp(v, -32768.0, 32767.0));
}

}  // namespace

float QuantizePcm16(float x) { return static_cast<float>(ToPcm16(x)) / 32768.0f; }

std::string EncodeWav(std::span<const float> samples, int sample_rate, WavFormat format) {
  MPRNN_CHECK(sample_rate > 0, "sample rate must be positive");
  const uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const uint16_t block = bits / 8;
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * block);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  Put<uint32_t>(out, 36 + data_bytes);
  out += "WAVEfmt ";
  Put<uint32_t>(out, 16);
  Put<uint16_t>(out, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  Put<uint16_t>(out, 1);
  Put<uint32_t>(out, static_cast<uint32_t>(sample_rate));
  Put<uint32_t>(out, static_cast<uint32_t>(sample_rate) * block);
  Put<uint16_t>(out, block);
  Put<uint16_t>(out, bits);
  out += "data";
  Put<uint32_t>(out, data_bytes);
  for (float x : samples) {
    if (format == WavFormat::kPcm16) {
      Put<int16_t>(out, ToPcm16(x));
    } else {
      Put<float>(out, x);
    }
  }
  return out;
}

Wav DecodeWav(const std::string &bytes, const std::string &origin) {
  auto fail = [&](const std::string &why) { return IoError(origin + ": " + why); };
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  uint16_t fmt = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const uint32_t len = Get<uint32_t>(bytes, pos + 4);
    const size_t body = pos + 8;
    if (len > bytes.size() - body) throw fail("chunk '" + id + "' runs past end of file");
    if (id == "fmt ") {
      if (len < 16) throw fail("fmt chunk too short");
      fmt = Get<uint16_t>(bytes, body);
      channels = Get<uint16_t>(bytes, body + 2);
      rate = Get<uint32_t>(bytes, body + 4);
      bits = Get<uint16_t>(bytes, body + 14);
      if (fmt == 0xFFFE && len >= 26) fmt = Get<uint16_t>(bytes, body + 24);  // extensible
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      if (channels != 1) throw fail("expected mono audio, got " + std::to_string(channels) +
                                    " channels");
      Wav wav;
      wav.sample_rate = static_cast<int>(rate);
      if (fmt == kFormatPcm && bits == 16) {
        wav.samples.resize(len / 2);
        for (size_t i = 0; i < wav.samples.size(); ++i) {
          wav.samples[i] = static_cast<float>(Get<int16_t>(bytes, body + 2 * i)) / 32768.0f;
        }
      } else if (fmt == kFormatFloat && bits == 32) {
        wav.samples.resize(len / 4);
        std::memcpy(wav.samples.data(), bytes.data() + body, wav.samples.size() * 4);
      } else {
        throw fail("unsupported sample format (format tag " + std::to_string(fmt) + ", " +
                   std::to_string(bits) + " bits); expected 16-bit PCM or 32-bit float");
      }
      return wav;
    }
    pos = body + len + (len & 1);
  }
  throw fail("no data chunk");
}

void WriteWav(const std::string &path, std::span<const float> samples, int sample_rate,
              WavFormat format) {
  const std::string bytes = EncodeWav(samples, sample_rate, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

Wav ReadWav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DecodeWav(ss.str(), path);
}

}  // namespace mprnn
