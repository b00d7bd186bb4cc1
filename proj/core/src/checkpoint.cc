// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace mprnn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

void PutU32(std::string &out, uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

class Reader {
 public:
  explicit Reader(const std::string &bytes) : bytes_(bytes) {}

  const char *Take(size_t n, const char *what) {
    if (bytes_.size() - pos_ < n) {
      throw IoError(std::string("checkpoint truncated while reading ") + what);
    }
    const char *p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  uint32_t U32(const char *what) {
    uint32_t v;
    std::memcpy(&v, Take(4, what), 4);
    return v;
  }
  std::string Str(const char *what) {
    const uint32_t n = U32(what);
    return std::string(Take(n, what), n);
  }
  bool Done() const { return pos_ == bytes_.size(); }

 private:
  const std::string &bytes_;
  size_t pos_ = 0;
};

}  // namespace

std::string SerializeCheckpoint(const Separator<float> &model) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutU32(out, kCheckpointVersion);
  const std::string config = model.config().ToConfig().ToText();
  PutU32(out, static_cast<uint32_t>(config.size()));
  out += config;
  PutU32(out, static_cast<uint32_t>(model.params().size()));
  for (const auto &[name, p] : model.params()) {
    PutU32(out, static_cast<uint32_t>(name.size()));
    out += name;
    PutU32(out, static_cast<uint32_t>(p.value.rank()));
    for (int64_t d : p.value.shape()) PutU32(out, static_cast<uint32_t>(d));
    out.append(reinterpret_cast<const char *>(p.value.data()),
               static_cast<size_t>(p.value.size()) * sizeof(float));
  }
  return out;
}

Separator<float> DeserializeCheckpoint(const std::string &bytes) {
  Reader r(bytes);
  if (std::memcmp(r.Take(sizeof(kCheckpointMagic), "magic"), kCheckpointMagic,
                  sizeof(kCheckpointMagic)) != 0) {
    throw IoError("not a checkpoint file (bad magic)");
  }
  const uint32_t version = r.U32("version");
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                  std::to_string(kCheckpointVersion) + ")");
  }
  const std::string config_text = r.Str("config");
  ModelConfig config;
  try {
    config = ModelConfig::FromConfig(KeyValueConfig::Parse(config_text));
  } catch (const InvalidArgument &e) {
    throw IoError(std::string("checkpoint config invalid: ") + e.what());
  }
  Separator<float> model(config);
  const uint32_t count = r.U32("array count");
  std::set<std::string> seen;
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = r.Str("array name");
    if (!model.params().Contains(name)) {
      throw IoError("checkpoint holds unknown parameter '" + name + "'");
    }
    if (!seen.insert(name).second) throw IoError("checkpoint repeats parameter '" + name + "'");
    Param<float> &p = model.params().Get(name);
    const uint32_t rank = r.U32("rank");
    Shape shape;
    for (uint32_t d = 0; d < rank; ++d) shape.push_back(r.U32("extent"));
    if (shape != p.value.shape()) {
      throw IoError("parameter '" + name + "' has shape " + ShapeString(shape) +
                    ", config expects " + ShapeString(p.value.shape()));
    }
    const size_t nbytes = static_cast<size_t>(p.value.size()) * sizeof(float);
    std::memcpy(p.value.data(), r.Take(nbytes, "values"), nbytes);
  }
  if (seen.size() != model.params().size()) {
    throw IoError("checkpoint is missing " +
                  std::to_string(model.params().size() - seen.size()) + " parameters");
  }
  if (!r.Done()) throw IoError("trailing bytes after checkpoint payload");
  return model;
}

void SaveCheckpoint(const Separator<float> &model, const std::string &path) {
  const std::string bytes = SerializeCheckpoint(model);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path + ": " + ec.message());
}

Separator<float> LoadCheckpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return DeserializeCheckpoint(ss.str());
}

}  // namespace mprnn
