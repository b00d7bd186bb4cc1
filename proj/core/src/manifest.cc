// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/manifest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "mprnn/error.h"
#include "mprnn/wav.h"

namespace mprnn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Manifest::Resolve(const std::string &path) const {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).string();
}

std::string ManifestLine(const ManifestEntry &e) {
  json grid = json::array();
  for (const auto &f : e.activity_grid) grid.push_back({f[0], f[1]});
  json j;
  j["id"] = e.id;
  j["mixture_path"] = e.mixture_path;
  j["source_paths"] = {e.source_paths[0], e.source_paths[1]};
  j["duration_s"] = e.duration_s;
  j["seed"] = e.seed;
  j["activity_grid"] = grid;
  return j.dump();
}

void WriteManifest(const Manifest &manifest, const std::string &path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path);
  for (const auto &e : manifest.entries) out << ManifestLine(e) << '\n';
  if (!out) throw IoError("short write to manifest " + path);
}

Manifest LoadManifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest " + path);
  Manifest m;
  m.base_dir = fs::path(path).parent_path().string();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      e.mixture_path = j.at("mixture_path").get<std::string>();
      const auto &src = j.at("source_paths");
      if (!src.is_array() || src.size() != 2) throw IoError("source_paths must list 2 files");
      e.source_paths = {src[0].get<std::string>(), src[1].get<std::string>()};
      e.duration_s = j.at("duration_s").get<double>();
      e.seed = j.at("seed").get<uint64_t>();
      for (const auto &f : j.at("activity_grid")) {
        e.activity_grid.push_back({f.at(0).get<bool>(), f.at(1).get<bool>()});
      }
      m.entries.push_back(std::move(e));
    } catch (const json::exception &ex) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + ex.what());
    } catch (const IoError &ex) {
      throw IoError(path + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return m;
}

LoadedExample LoadExample(const Manifest &manifest, const ManifestEntry &entry) {
  LoadedExample ex;
  ex.id = entry.id;
  Wav mix = ReadWav(manifest.Resolve(entry.mixture_path));
  ex.sample_rate = mix.sample_rate;
  ex.mixture = std::move(mix.samples);
  for (const auto &p : entry.source_paths) {
    Wav s = ReadWav(manifest.Resolve(p));
    if (s.sample_rate != ex.sample_rate) {
      throw IoError(entry.id + ": source " + p + " is at " + std::to_string(s.sample_rate) +
                    " Hz, mixture at " + std::to_string(ex.sample_rate) + " Hz");
    }
    if (s.samples.size() != ex.mixture.size()) {
      throw IoError(entry.id + ": source " + p + " has " + std::to_string(s.samples.size()) +
                    " samples, mixture " + std::to_string(ex.mixture.size()));
    }
    ex.sources.push_back(std::move(s.samples));
  }
  return ex;
}

}  // namespace mprnn
