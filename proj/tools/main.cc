// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <iostream>

#include "cli.h"

int main(int argc, char **argv) {
  return mprnn::cli::Run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
