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

#include <cmath>

#include "nocplace/placement_io.hpp"
#include "nocplace/simulator.hpp"

using namespace nocplace;

namespace {

SimConfig config(const std::string& text, double lambda_g, std::uint64_t messages = 20'000) {
  SimConfig c;
  c.placement = parse_text(text);
  c.traffic.lambda_g = lambda_g;
  c.messages = messages;
  return c;
}

}  // namespace

TEST(LengthMoments, MatchSampledLengths) {
  const auto m = message_length_moments(10.0);
  std::mt19937_64 rng(5);
  std::exponential_distribution<double> x(0.1);
  double s1 = 0, s2 = 0;
  const int n = 2'000'000;
  for (int i = 0; i < n; ++i) {
    const double l = std::max(1.0, std::round(x(rng)));
    s1 += l;
    s2 += l * l;
  }
  const double mean = s1 / n;
  EXPECT_NEAR(m.mean, mean, 0.03);
  EXPECT_NEAR(m.scv, s2 / n / (mean * mean) - 1.0, 0.01);
}

TEST(StudentT, KnownQuantiles) {
  EXPECT_NEAR(t95(2), 4.302652729911275, 1e-9);
  EXPECT_NEAR(t95(19), 2.093024054408263, 1e-9);
}

TEST(RunSim, BitIdenticalForEqualSeeds) {
  const auto c = config("C.$\n.C.\n$.C\n", 0.01);
  const auto a = run_sim(c);
  const auto b = run_sim(c);
  EXPECT_EQ(a.mean_latency, b.mean_latency);
  EXPECT_EQ(a.ci95, b.ci95);
  EXPECT_EQ(a.end_time, b.end_time);
  ASSERT_EQ(a.channels.size(), b.channels.size());
  for (std::size_t i = 0; i < a.channels.size(); ++i) {
    EXPECT_EQ(a.channels[i].arrivals, b.channels[i].arrivals);
    EXPECT_EQ(a.channels[i].mean_response, b.channels[i].mean_response);
  }
  auto d = c;
  d.seed = 2;
  EXPECT_NE(run_sim(d).mean_latency, a.mean_latency);
}

TEST(RunSim, MessageConservation) {
  auto c = config("C.$\n.C.\n$.C\n", 0.02, 10'000);
  const auto drained = run_sim(c);
  EXPECT_EQ(drained.generated, c.messages);
  EXPECT_EQ(drained.completed, drained.generated);
  EXPECT_EQ(drained.in_flight, 0u);
  c.drain = false;
  const auto cut = run_sim(c);
  EXPECT_EQ(cut.generated, cut.completed + cut.in_flight);
}

TEST(RunSim, LittlesLawPerChannel) {
  const auto s = run_sim(config("CC$\nC.C\n$CC\n", 0.01, 40'000));
  int checked = 0;
  for (const auto& ch : s.channels) {
    if (ch.arrivals < 1000) continue;
    EXPECT_LE(ch.little_residual, 0.05);
    EXPECT_NEAR(ch.mean_number, ch.arrival_rate * ch.mean_response, 0.05 * ch.mean_number);
    ++checked;
  }
  EXPECT_GT(checked, 5);
}

TEST(RunSim, SingleChannelMatchesMm1) {
  const double rho = 0.5, mu = 1.0;
  auto c = config("C$\n", rho * mu / 10.0, 60'000);
  const auto s = run_sim(c);
  const double expected = mm1_response(rho * mu / 10.0, mu / 10.0);
  EXPECT_NEAR(s.channel({0, 0}, Port::Local).mean_response, expected, 0.05 * expected);
  EXPECT_FALSE(s.saturated);
}

TEST(RunSim, ZeroLoadIsPureTransmission) {
  const auto s = run_sim(config("C.$\n", 1e-4, 20'000));
  const double expected = 3 * message_length_moments(10.0).mean;
  EXPECT_NEAR(s.mean_latency, expected, 0.05 * expected);
  ASSERT_EQ(s.flows.size(), 1u);
  EXPECT_NEAR(s.flows.begin()->second.mean_latency, s.mean_latency, 1e-9);
}

TEST(RunSim, OverloadIsFlaggedSaturated) {
  const auto s = run_sim(config("C$\n", 0.15, 20'000));
  EXPECT_TRUE(s.saturated);
  EXPECT_GT(s.trend_ratio, 1.2);
  const auto ok = run_sim(config("C$\n", 0.03, 20'000));
  EXPECT_FALSE(ok.saturated);
}

TEST(RunSim, RepliesDoubleTheTraffic) {
  auto c = config("C$\n", 0.01, 10'000);
  c.traffic.model_replies = true;
  const auto s = run_sim(c);
  EXPECT_GT(s.channel({1, 0}, Port::Local).arrivals, 0u);
  EXPECT_EQ(s.flows.size(), 2u);
}

TEST(Sweep, SingleCellEqualsRunSim) {
  auto base = config("C.$\n", 0.01, 10'000);
  const auto rows = sweep_latency({{"only", base.placement}}, {0.01}, base, 1);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].mean_latency, run_sim(base).mean_latency);
  EXPECT_EQ(rows[0].ci95, run_sim(base).ci95);
}

TEST(Sweep, ThreadCountDoesNotChangeRows) {
  auto base = config("C.$\n", 0.01, 5'000);
  const std::vector<NamedPlacement> ps{{"a", parse_text("C.$\n")}, {"b", parse_text("$.C\n")}};
  const auto one = sweep_latency(ps, {0.005, 0.02}, base, 2, 1);
  const auto many = sweep_latency(ps, {0.005, 0.02}, base, 2, 3);
  EXPECT_EQ(sweep_csv(one), sweep_csv(many));
  EXPECT_EQ(sweep_csv(one).substr(0, sweep_csv(one).find('\n')),
            "family,lambda_g,seed,mean_latency,ci95,saturated");
  const auto cells = summarize_sweep(one);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].seeds, 2);
  EXPECT_NEAR(cells[0].mean_latency, (one[0].mean_latency + one[1].mean_latency) / 2, 1e-12);
}

TEST(Sweep, RejectsMixedGrids) {
  auto base = config("C.$\n", 0.01, 1'000);
  EXPECT_THROW(sweep_latency({{"a", parse_text("C.$\n")}, {"b", parse_text("C$\n")}}, {0.01}, base, 1),
               Error);
}

TEST(Compare, ZeroLoadAgreement) {
  const auto c = compare_to_analytical(config("C..$\n", 0.001, 30'000));
  ASSERT_TRUE(c.analytical_available);
  EXPECT_LT(c.mean_rel_error, 0.05);
}

TEST(Compare, UnstableModelIsReportedNotThrown) {
  const auto c = compare_to_analytical(config("C$\n", 0.2, 3'000));
  EXPECT_FALSE(c.analytical_available);
  EXPECT_NE(comparison_csv(c).find("analytical unavailable"), std::string::npos);
}
