// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "evimae/errors.hpp"
#include "evimae/masking.hpp"

using namespace evimae;

TEST_CASE("round_half_even uses banker's rounding") {
  CHECK(round_half_even(2.5) == 2);
  CHECK(round_half_even(3.5) == 4);
  CHECK(round_half_even(2.4) == 2);
  CHECK(round_half_even(2.6) == 3);
  CHECK(round_half_even(0.0) == 0);
}

TEST_CASE("random_mask: 320 tokens at 0.75 -> 240 masked, 80 visible") {
  const auto plan = random_mask(320, 0.75, 1);
  CHECK(plan.masked.size() == 240);
  CHECK(plan.visible().size() == 80);
  std::set<int> all(plan.masked.begin(), plan.masked.end());
  for (int v : plan.visible()) all.insert(v);
  CHECK(all.size() == 320);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 319);
}

TEST_CASE("random_mask edge ratios") {
  CHECK(random_mask(100, 0.0, 1).masked.empty());
  CHECK(random_mask(100, 1.0, 1).masked.size() == 100);
  CHECK_THROWS_AS((void)random_mask(100, 1.5, 1), InvalidParam);
  CHECK_THROWS_AS((void)random_mask(100, -0.1, 1), InvalidParam);
}

TEST_CASE("structured time mask: 10x8 grid at 0.5 masks 5 full columns") {
  const auto plan = structured_mask(10, 8, MaskStrategy::time, 0.5, 3);
  CHECK(plan.masked.size() == 40);
  // Whole columns: every masked time cell contributes all 8 freq cells.
  std::set<int> time_cells;
  for (int m : plan.masked) time_cells.insert(m / 8);
  CHECK(time_cells.size() == 5);
  for (int t : time_cells)
    for (int f = 0; f < 8; ++f) CHECK(plan.is_masked(t * 8 + f));
}

TEST_CASE("structured freq mask: 10x8 grid at 0.5 masks 4 rows = 40 patches") {
  const auto plan = structured_mask(10, 8, MaskStrategy::freq, 0.5, 3);
  CHECK(plan.masked.size() == 40);
  std::set<int> freq_cells;
  for (int m : plan.masked) freq_cells.insert(m % 8);
  CHECK(freq_cells.size() == 4);
}

TEST_CASE("structured time_freq mask approaches the requested ratio") {
  const auto plan = structured_mask(10, 8, MaskStrategy::time_freq, 0.5, 5);
  const double achieved = static_cast<double>(plan.masked.size()) / 80.0;
  CHECK(std::abs(achieved - 0.5) <= 0.15);
  CHECK(structured_mask(10, 8, MaskStrategy::time_freq, 0.0, 5).masked.empty());
}

TEST_CASE("tube mask: 196 spatial x 8 temporal at 0.9 masks 1408 of 1568") {
  const auto plan = tube_mask(196, 8, 0.9, 7);
  CHECK(plan.total == 1568);
  CHECK(plan.masked.size() == 1408);
  CHECK(plan.visible().size() == 160);

  // Tube property: the spatial projection of the mask is the same in every
  // temporal slice.
  std::set<int> spatial0;
  for (int m : plan.masked)
    if (m < 196) spatial0.insert(m);
  CHECK(spatial0.size() == 176);
  for (int m : plan.masked) CHECK(spatial0.count(m % 196) == 1);
  for (int s : spatial0)
    for (int t = 0; t < 8; ++t) CHECK(plan.is_masked(t * 196 + s));
}

TEST_CASE("tube mask with ratio 0 masks nothing") {
  CHECK(tube_mask(16, 4, 0.0, 1).masked.empty());
}

TEST_CASE("node mask counts follow round(ratio*n)") {
  CHECK(node_mask(4, 0.5, 1).masked.size() == 2);
  CHECK(node_mask(4, 0.25, 1).masked.size() == 1);
  CHECK(node_mask(4, 0.0, 1).masked.empty());
}

TEST_CASE("apply_mask keeps original order and indices") {
  Eigen::MatrixXd tokens(6, 2);
  for (long r = 0; r < 6; ++r) tokens.row(r) = Eigen::RowVector2d(r, 10.0 * r);
  MaskPlan plan;
  plan.total = 6;
  plan.masked = {1, 4};
  const auto [vis, idx] = apply_mask(tokens, plan);
  REQUIRE(idx == std::vector<int>{0, 2, 3, 5});
  for (std::size_t k = 0; k < idx.size(); ++k)
    CHECK(vis(static_cast<long>(k), 0) == doctest::Approx(idx[k]));

  SUBCASE("empty mask is the identity") {
    MaskPlan none;
    none.total = 6;
    const auto [v2, i2] = apply_mask(tokens, none);
    CHECK(v2.rows() == 6);
    CHECK((v2 - tokens).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("full mask leaves nothing visible") {
    MaskPlan all;
    all.total = 6;
    all.masked = {0, 1, 2, 3, 4, 5};
    const auto [v3, i3] = apply_mask(tokens, all);
    CHECK(v3.rows() == 0);
    CHECK(i3.empty());
  }
  SUBCASE("plan total must match the token count") {
    MaskPlan bad;
    bad.total = 5;
    CHECK_THROWS_AS((void)apply_mask(tokens, bad), ShapeError);
  }
}

TEST_CASE("plans are deterministic per seed and differ across seeds") {
  const auto a = random_mask(64, 0.5, 123);
  const auto b = random_mask(64, 0.5, 123);
  CHECK(a.masked == b.masked);

  std::set<std::vector<int>> plans;
  for (std::uint64_t s = 0; s < 100; ++s) plans.insert(random_mask(64, 0.5, s).masked);
  CHECK(plans.size() == 100);
}

TEST_CASE("per-index inclusion frequency matches the ratio") {
  std::vector<int> counts(320, 0);
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    const auto plan = random_mask(320, 0.75, static_cast<std::uint64_t>(d) + 1000);
    for (int m : plan.masked) ++counts[static_cast<std::size_t>(m)];
  }
  for (int c : counts) {
    const double f = static_cast<double>(c) / draws;
    CHECK(f > 0.73);
    CHECK(f < 0.77);
  }
}

TEST_CASE("mask plans round-trip through JSON") {
  const auto plan = tube_mask(16, 4, 0.5, 99);
  const auto restored = MaskPlan::from_json_string(plan.to_json_string());
  CHECK(restored.total == plan.total);
  CHECK(restored.masked == plan.masked);
  CHECK(restored.seed == plan.seed);
  CHECK(restored.strategy == plan.strategy);
  CHECK(restored.ratio_requested == plan.ratio_requested);
}
