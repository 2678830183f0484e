/* Copyright 2026 The vqtk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <atomic>
#include <numeric>
#include <stdexcept>

#include "vqtk/parallel.hpp"

namespace {

TEST(ParallelFor, CoversEveryIndexOnce) {
  for (std::size_t n : {0u, 1u, 7u, 64u, 1001u}) {
    for (unsigned t : {1u, 2u, 3u, 8u, 64u}) {
      std::vector<int> hits(n, 0);
      vqtk::parallel_for(n, t, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) ++hits[i];
      });
      EXPECT_EQ(std::count(hits.begin(), hits.end(), 1), static_cast<long>(n))
          << "n=" << n << " threads=" << t;
    }
  }
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(vqtk::parallel_for(100, 4,
                                  [](std::size_t b, std::size_t) {
                                    if (b > 0) throw std::runtime_error("boom");
                                  }),
               std::runtime_error);
}

TEST(PairwiseSum, ExactOnIntegersAndOrderFixed) {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(vqtk::pairwise_sum(v), 500500.0);
  EXPECT_EQ(vqtk::pairwise_sum({}), 0.0);
  std::vector<double> tiny(10000, 0.1);
  EXPECT_EQ(vqtk::pairwise_sum(tiny), vqtk::pairwise_sum(tiny));
  EXPECT_NEAR(vqtk::pairwise_sum(tiny), 1000.0, 1e-10);
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  vqtk::CompensatedSum s;
  for (double v : {1e16, 1.0, -1e16}) s.add(v);
  EXPECT_EQ(s.value(), 1.0);
}

}  // namespace
