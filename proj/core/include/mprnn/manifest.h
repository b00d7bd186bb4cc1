// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_MANIFEST_H_
#define MPRNN_MANIFEST_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mprnn {

// One JSON object per line:
// {"id", "mixture_path", "source_paths": [2], "duration_s", "seed",
//  "activity_grid": [[bool, bool], ...]}
// Paths are stored relative to the manifest's directory.
struct ManifestEntry {
  std::string id;
  std::string mixture_path;
  std::array<std::string, 2> source_paths;
  double duration_s = 0;
  uint64_t seed = 0;
  std::vector<std::array<bool, 2>> activity_grid;
};

struct Manifest {
  std::string base_dir;  // directory relative paths resolve against
  std::vector<ManifestEntry> entries;

  std::string Resolve(const std::string &path) const;
};

std::string ManifestLine(const ManifestEntry &entry);
void WriteManifest(const Manifest &manifest, const std::string &path);
// Throws IoError naming the file and line on malformed input.
Manifest LoadManifest(const std::string &path);

struct LoadedExample {
  std::string id;
  int sample_rate = 0;
  std::vector<float> mixture;
  std::vector<std::vector<float>> sources;
};

// Reads the three WAVs; throws IoError on missing files, rate or length
// mismatches.
LoadedExample LoadExample(const Manifest &manifest, const ManifestEntry &entry);

}  // namespace mprnn

#endif  // MPRNN_MANIFEST_H_
