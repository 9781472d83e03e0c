// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The assaysem Authors

#include "doctest.h"
#include "properties.h"

using namespace assaysem::testing;

TEST_CASE("micro metrics agree with the enumeration oracle") {
  CHECK(CheckMetricOracle(2000, 11) == "");
}

TEST_CASE("cluster statement counts are the union of member sets") {
  CHECK(CheckAggregationUnion(25, 12) == "");
}

TEST_CASE("raising the threshold never adds predictions") {
  CHECK(CheckThresholdMonotonicity(10, 13) == "");
}

TEST_CASE("lloyd inertia is non-increasing") {
  CHECK(CheckLloydMonotonicity(60, 14) == "");
}

TEST_CASE("grid runs are deterministic across repeats and threads") {
  CHECK(CheckDeterminism(15) == "");
}

TEST_CASE("predictions stay inside the training statements") {
  CHECK(CheckContainment(8, 16) == "");
}

TEST_CASE("elbow picks three for three separated blobs") {
  for (uint64_t seed : {1, 2, 3}) {
    CAPTURE(seed);
    CHECK(CheckElbowThreeBlobs(seed) == "");
  }
}
