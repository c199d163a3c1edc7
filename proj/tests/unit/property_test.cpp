#include <gtest/gtest.h>

#include "properties.hpp"

namespace {

constexpr int kCases = 1000;

void expect_clean(const props::Outcome& o) {
  EXPECT_EQ(o.cases, kCases);
  EXPECT_EQ(o.failures, 0) << o.first_failure;
}

TEST(Property, EntropyChainRule) { expect_clean(props::chain_rule(kCases, 101)); }

TEST(Property, EtaBallMonotone) { expect_clean(props::eta_ball_monotone(kCases, 102)); }

TEST(Property, SessionInvariants) {
  const auto out = props::session_invariants(kCases, 103);
  expect_clean(out.v_monotone);
  expect_clean(out.phase_bound);
  expect_clean(out.rate_accounting);
}

TEST(Property, SingleSubcodebookReduction) { expect_clean(props::single_subcodebook_reduction(kCases, 104)); }

}  // namespace
