// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_TOOLS_CLI_H_
#define MPRNN_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace mprnn::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

// Default output directory when --out is absent.
inline constexpr char kOutDirEnv[] = "MPRNN_OUT_DIR";

// args excludes the program name.
int Run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace mprnn::cli

#endif  // MPRNN_TOOLS_CLI_H_
