// Copyright 2026 The MPRNN Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mprnn/tensor.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "mprnn/error.h"
#include "test_util.h"

namespace mprnn {
namespace {

using testing::RandomTensor;

TEST(TensorTest, ShapeAndRowMajorIndexing) {
  Tensor<float> t({2, 3, 4});
  EXPECT_EQ(t.size(), 24);
  EXPECT_EQ(t.rank(), 3);
  std::iota(t.storage().begin(), t.storage().end(), 0.0f);
  EXPECT_EQ(t(0, 0, 1), 1.0f);
  EXPECT_EQ(t(0, 1, 0), 4.0f);
  EXPECT_EQ(t(1, 0, 0), 12.0f);
  EXPECT_EQ(t(1, 2, 3), 23.0f);
}

TEST(TensorTest, RejectsBadShapes) {
  EXPECT_THROW(Tensor<float>({2, 0}), InvalidArgument);
  EXPECT_THROW(Tensor<float>({2, -1}), InvalidArgument);
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>(3)), InvalidArgument);
  Tensor<float> t({2, 3});
  EXPECT_THROW(t.Reshape({4, 2}), InvalidArgument);
}

TEST(TensorTest, ReshapeRoundTripIsExact) {
  std::mt19937_64 rng(1);
  const auto t = RandomTensor<double>({3, 4, 5}, rng);
  const auto back = t.Reshape({12, 5}).Reshape({60}).Reshape({3, 4, 5});
  EXPECT_EQ(back, t);
}

TEST(TensorTest, PermuteMatchesIndexDefinition) {
  std::mt19937_64 rng(2);
  const auto t = RandomTensor<double>({2, 3, 4, 5}, rng);
  const std::vector<int> perm = {0, 2, 3, 1};
  const auto p = Permute(t, perm);
  ASSERT_EQ(p.shape(), (Shape{2, 4, 5, 3}));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 5; ++d) EXPECT_EQ(p(a, c, d, b), t(a, b, c, d));
}

TEST(TensorTest, PermuteInverseIsExactForAllPermutations) {
  std::mt19937_64 rng(3);
  const auto t = RandomTensor<float>({2, 3, 4, 2}, rng);
  std::vector<int> perm = {0, 1, 2, 3};
  do {
    const auto inv = InversePermutation(perm);
    EXPECT_EQ(Permute(Permute(t, perm), inv), t);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST(TensorTest, InversePermutationValidates) {
  const std::vector<int> dup = {0, 0, 1};
  EXPECT_THROW(InversePermutation(dup), InvalidArgument);
  const std::vector<int> out_of_range = {0, 3};
  EXPECT_THROW(InversePermutation(out_of_range), InvalidArgument);
}

TEST(TensorTest, ReverseAxis1) {
  Tensor<double> t({2, 3, 2});
  std::iota(t.storage().begin(), t.storage().end(), 0.0);
  const auto r = ReverseAxis1(t);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 2; ++c) EXPECT_EQ(r(a, b, c), t(a, 2 - b, c));
  EXPECT_EQ(ReverseAxis1(r), t);
}

TEST(TensorTest, CastAndAccumulate) {
  Tensor<double> a({2}, {1.5, -2.25});
  const Tensor<float> f = a.Cast<float>();
  EXPECT_EQ(f[0], 1.5f);
  EXPECT_EQ(f[1], -2.25f);
  a += a;
  EXPECT_EQ(a[1], -4.5);
  Tensor<double> b({3});
  EXPECT_THROW(a += b, InvalidArgument);
}

TEST(TensorTest, StorageIsSixtyFourByteAligned) {
  for (int64_t n : {1, 3, 17, 1000}) {
    const Tensor<float> f({n});
    const Tensor<double> d = f.Cast<double>().Reshape({1, n});
    EXPECT_EQ(reinterpret_cast<uintptr_t>(f.data()) % 64, 0u);
    EXPECT_EQ(reinterpret_cast<uintptr_t>(d.data()) % 64, 0u);
  }
}

}  // namespace
}  // namespace mprnn
