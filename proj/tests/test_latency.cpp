/*
 * Copyright 2026 The nocplace Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "nocplace/latency.hpp"
#include "nocplace/placement_io.hpp"
#include "support.hpp"

using namespace nocplace;

TEST(LowTrafficL2, Examples) {
  TrafficSpec t;
  EXPECT_DOUBLE_EQ(low_traffic_l2_latency({0, 0}, parse_text("C$\n"), t), 1.0);
  EXPECT_DOUBLE_EQ(low_traffic_l2_latency({2, 0}, parse_text("$.C.$\n"), t), 2.0);
  t.p = {{0.25, 0.75}};
  EXPECT_DOUBLE_EQ(low_traffic_l2_latency({0, 0}, parse_text("C.$\n...\n$..\n"), t), 2.0);
}

TEST(LowTrafficL2, Errors) {
  TrafficSpec t;
  EXPECT_THROW(low_traffic_l2_latency({0, 0}, parse_text("C.\n"), t), Error);
  EXPECT_THROW(low_traffic_l2_latency({1, 0}, parse_text("C$\n"), t), Error);
}

TEST(LowTrafficMem, Examples) {
  TrafficSpec t;
  EXPECT_DOUBLE_EQ(low_traffic_mem_latency(parse_text("$M\n"), t), 1.0);
  EXPECT_DOUBLE_EQ(low_traffic_mem_latency(parse_text("$\nM\n"), t), 1.0);
  EXPECT_DOUBLE_EQ(low_traffic_mem_latency(parse_text("$.M...$\n"), t), 3.0);
  t.mem_fixed_latency = 5;
  EXPECT_DOUBLE_EQ(low_traffic_mem_latency(parse_text("$.M...$\n"), t), 8.0);
  EXPECT_DOUBLE_EQ(low_traffic_mem_latency({1, 1}, parse_text("$.M...$\n.C.....\n"), t), 8.0);
  try {
    low_traffic_mem_latency(parse_text("$C\n"), t);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoMemControllers);
  }
}

TEST(Objective, CenterAndCornerCache) {
  TrafficSpec t;
  const auto center = objective(parse_text("CCC\nC$C\nCCC\n"), t, LatencyMode::LowTraffic);
  EXPECT_DOUBLE_EQ(center.l2_sum, 12.0);
  const auto corner = objective(parse_text("$CC\nCCC\nCCC\n"), t, LatencyMode::LowTraffic);
  EXPECT_DOUBLE_EQ(corner.l2_sum, 18.0);
  EXPECT_GT(corner.objective, center.objective);
}

TEST(Objective, MatchesIndependentHopOracle) {
  std::mt19937 rng(12);
  for (int i = 0; i < 300; ++i) {
    const auto g = testkit::random_grid(rng, 7);
    const auto p = testkit::random_placement(rng, g, testkit::random_counts(rng, g.tiles(), i % 2 == 0));
    TrafficSpec t;
    t.miss_l2 = std::uniform_real_distribution<double>(0, 1)(rng);
    EXPECT_NEAR(objective(p, t, LatencyMode::LowTraffic).objective,
                testkit::oracle_low_objective(p, t.miss_l2), 1e-9);
  }
}

TEST(Objective, DecompositionIdentity) {
  std::mt19937 rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto g = testkit::random_grid(rng, 6);
    const auto p = testkit::random_placement(rng, g, testkit::random_counts(rng, g.tiles(), true));
    TrafficSpec t;
    t.lambda_g = 0.002;
    t.hit_l1 = std::uniform_real_distribution<double>(0, 0.9)(rng);
    t.latency_l1 = 2.5;
    t.mem_fixed_latency = 7;
    for (auto mode : {LatencyMode::LowTraffic, LatencyMode::HighTraffic}) {
      LatencyReport r;
      try {
        r = objective(p, t, mode);
      } catch (const Error&) {
        continue;
      }
      const double n = p.counts().cores;
      EXPECT_NEAR(r.objective,
                  n * t.latency_l1 + t.miss_l1() * r.l2_sum + t.miss_l1() * t.miss_l2 * r.mem_sum,
                  1e-9 * std::max(1.0, r.objective));
      double total = 0;
      for (const auto& c : r.per_core) total += c.total;
      EXPECT_NEAR(total, r.objective, 1e-9 * std::max(1.0, r.objective));
    }
  }
}

TEST(Objective, HighTrafficMeetsLowTrafficAtZeroLoad) {
  std::mt19937 rng(14);
  for (int i = 0; i < 60; ++i) {
    const auto g = testkit::random_grid(rng, 8);
    const auto p = testkit::random_placement(rng, g, testkit::random_counts(rng, g.tiles(), true));
    TrafficSpec t;
    t.lambda_g = 1e-9;
    t.svc.mean_service = 3.0;
    const double lo = objective(p, t, LatencyMode::LowTraffic).objective;
    const double hi = objective(p, t, LatencyMode::HighTraffic).objective;
    EXPECT_NEAR(hi, lo, 1e-6 * std::max(1.0, lo));
  }
}

TEST(Objective, HighTrafficNeverBelowLowTraffic) {
  std::mt19937 rng(15);
  for (int i = 0; i < 60; ++i) {
    const auto g = testkit::random_grid(rng, 6);
    const auto p = testkit::random_placement(rng, g, testkit::random_counts(rng, g.tiles(), true));
    TrafficSpec t;
    t.lambda_g = 0.01;
    try {
      EXPECT_GE(objective(p, t, LatencyMode::HighTraffic).objective,
                objective(p, t, LatencyMode::LowTraffic).objective - 1e-12);
    } catch (const Error& e) {
      EXPECT_TRUE(e.code() == ErrorCode::Unstable || e.code() == ErrorCode::NonConvergent);
    }
  }
}

TEST(Objective, JsonReport) {
  TrafficSpec t;
  const auto r = objective(parse_text("C$M\n"), t, LatencyMode::LowTraffic);
  const auto j = to_json(r, t);
  EXPECT_EQ(j.at("mode"), "low");
  EXPECT_EQ(j.at("per_core").size(), 1u);
  EXPECT_DOUBLE_EQ(j.at("objective").get<double>(), 1.0 + 0.2 * 1.0);
}
