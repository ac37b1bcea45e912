// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 thinfilm contributors

#include <gtest/gtest.h>

#include "properties.hpp"

namespace props {

void PrintTo(const Property& p, std::ostream* os) { *os << p.name; }

}  // namespace props

namespace {

class Invariant : public ::testing::TestWithParam<props::Property> {};

TEST_P(Invariant, HoldsForEveryGeneratedCase) {
  const auto r = props::run(GetParam());
  EXPECT_GE(r.cases, 1000u);
  EXPECT_TRUE(r.passed()) << r.failures << "/" << r.cases << " cases failed; first: " << r.first_failure;
}

INSTANTIATE_TEST_SUITE_P(Properties, Invariant, ::testing::ValuesIn(props::all()),
                         [](const ::testing::TestParamInfo<props::Property>& info) { return info.param.name; });

}  // namespace
