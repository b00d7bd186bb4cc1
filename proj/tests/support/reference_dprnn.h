// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef MPRNN_TESTS_SUPPORT_REFERENCE_DPRNN_H_
#define MPRNN_TESTS_SUPPORT_REFERENCE_DPRNN_H_

#include <string>
#include <vector>

#include "mprnn/param_store.h"

namespace mprnn::testing {

// Direct loop implementation of a dual-path RNN stack, written against the
// textbook description: chunk the frame sequence, run the intra-chunk path
// over every chunk and the inter-chunk path over every within-chunk
// position, each path being RNN -> FC -> LN -> residual, then overlap-add
// with averaging. Only parameter values are read from the store.
//
// frames is [N][L] as nested vectors; returns the same layout.
using Matrix = std::vector<std::vector<double>>;

struct ReferenceDprnnConfig {
  int64_t chunk = 4;
  int64_t hop = 2;
  int blocks = 1;
  bool inter_bidirectional = true;
  std::string prefix;
};

Matrix ReferenceDprnn(const ParamStore<double> &params, const Matrix &frames,
                      const ReferenceDprnnConfig &config);

// Plain LSTM over a sequence of column vectors, zero initial state, gate
// order input, forget, cell, output.
Matrix ReferenceLstm(const ParamStore<double> &params, const std::string &base,
                     const Matrix &sequence, bool reverse);

}  // namespace mprnn::testing

#endif  // MPRNN_TESTS_SUPPORT_REFERENCE_DPRNN_H_
