// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_CHECKPOINT_H_
#define MPRNN_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "mprnn/separator.h"

namespace mprnn {

// Binary layout, all integers little-endian uint32:
//   "MPRNNCKP" | version | config length | config text (key = value lines)
//   | array count | per array: name length | name | rank | extents... |
//   float32 values
inline constexpr char kCheckpointMagic[8] = {'M', 'P', 'R', 'N', 'N', 'C', 'K', 'P'};
inline constexpr uint32_t kCheckpointVersion = 1;

std::string SerializeCheckpoint(const Separator<float> &model);
Separator<float> DeserializeCheckpoint(const std::string &bytes);

// Writes to a temporary sibling file and renames it into place.
void SaveCheckpoint(const Separator<float> &model, const std::string &path);
Separator<float> LoadCheckpoint(const std::string &path);

}  // namespace mprnn

#endif  // MPRNN_CHECKPOINT_H_
