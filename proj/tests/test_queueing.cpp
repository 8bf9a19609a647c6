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
#include "nocplace/queueing.hpp"
#include "support.hpp"

using namespace nocplace;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::Parse;
}

ChannelLoads two_channels(double l1, double l2) {
  Eigen::MatrixXd turn = Eigen::MatrixXd::Zero(2, 2);
  turn(0, 0) = l1;
  turn(1, 0) = l2;
  return ChannelLoads::from_turns(turn);
}

}  // namespace

TEST(Mm1, Examples) {
  EXPECT_DOUBLE_EQ(mm1_response(1.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(mm1_response(0.0, 2.0), 0.5);
  EXPECT_NEAR(mm1_response(1.9, 2.0), 10.0, 1e-12);
  EXPECT_EQ(code_of([] { mm1_response(2.0, 2.0); }), ErrorCode::Unstable);
}

TEST(Kingman, PaperReadingIsMm1Response) {
  EXPECT_DOUBLE_EQ(kingman_wait(0.5, 1, 1, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(kingman_wait(0.5, 1, 1, 0.5), mm1_response(1, 2));
  EXPECT_DOUBLE_EQ(kingman_wait(0.0, 0.4, 1.6, 2.0), 2.0 * (0.4 + 1.6) / 2);
  EXPECT_EQ(code_of([] { kingman_wait(1.0, 1, 1, 1); }), ErrorCode::Unstable);
}

TEST(Kingman, StandardReadingIsMm1Wait) {
  const double lambda = 1, mu = 2;
  EXPECT_DOUBLE_EQ(kingman_wait(0.5, 1, 1, 0.5, KingmanMode::Standard), lambda / (mu * (mu - lambda)));
  EXPECT_DOUBLE_EQ(channel_response(0.5, 1, 1, 0.5, KingmanMode::Standard), mm1_response(1, 2));
  EXPECT_DOUBLE_EQ(channel_response(0.5, 1, 1, 0.5, KingmanMode::Paper), mm1_response(1, 2));
}

TEST(EffectiveUtilization, Examples) {
  Eigen::Vector2d lambda(0.2, 0.4), es(1, 1);
  Eigen::Matrix2d c;
  c << 1, 0.5, 0.25, 1;
  const auto r = effective_utilization(lambda, c, es);
  EXPECT_NEAR(r(0), 0.3, 1e-15);
  EXPECT_NEAR(r(1), 0.5, 1e-15);
  const auto plain = effective_utilization(lambda, Eigen::Matrix2d::Identity(), Eigen::Vector2d(2, 3));
  EXPECT_DOUBLE_EQ(plain(0), 0.4);
  EXPECT_DOUBLE_EQ(plain(1), 1.2);
  EXPECT_EQ(effective_utilization(Eigen::Vector2d::Zero(), c, es), Eigen::Vector2d::Zero());
  EXPECT_EQ(code_of([&] { effective_utilization(Eigen::Vector3d::Zero(), c, es); }),
            ErrorCode::DimensionMismatch);
}

TEST(Contention, SingleLoadedChannelHasNoCrossTerms) {
  const auto c = contention_matrix(two_channels(0.4, 0.0), ServiceSpec{});
  EXPECT_EQ(c, Eigen::Matrix2d::Identity());
}

TEST(Contention, SymmetricRouter) {
  const auto c = contention_matrix(two_channels(0.2, 0.2), ServiceSpec{});
  EXPECT_NEAR(c(0, 1), c(1, 0), 1e-12);
  EXPECT_GT(c(0, 1), 0.0);
}

TEST(Contention, TwoChannelsSharingOneOutput) {
  // Scalar oracle. With equal loads c12 = c21 = c and
  //   A = rho head x / (1-x)^2,  head = 1 - e^-0.3,  x = 0.3 head,
  //   rho_e = 0.3 (1 + c),  occupancy = 0.3 / (1 - rho_e),  c = A / occupancy,
  // which is linear in c: c = (7A/3) / (1 + A).
  const double head = 1.0 - std::exp(-0.3);
  const double x = 0.3 * head;
  const double a = 0.3 * head * x / ((1 - x) * (1 - x));
  const double expected = (7.0 * a / 3.0) / (1.0 + a);
  const auto c = contention_matrix(two_channels(0.3, 0.3), ServiceSpec{});
  EXPECT_NEAR(c(0, 1), expected, 1e-7);
  EXPECT_NEAR(c(1, 0), expected, 1e-7);
  EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
}

TEST(Contention, NoSharedOutputNoContention) {
  Eigen::MatrixXd turn = Eigen::MatrixXd::Zero(2, 2);
  turn(0, 0) = 0.3;
  turn(1, 1) = 0.3;
  const auto c = contention_matrix(ChannelLoads::from_turns(turn), ServiceSpec{});
  EXPECT_EQ(c, Eigen::Matrix2d::Identity());
}

TEST(SolveRouter, UnstableChannel) {
  const Eigen::Vector2d es(1, 1), cs2(1, 1);
  EXPECT_EQ(code_of([&] { solve_router(two_channels(1.0, 0.1), es, cs2, 1, KingmanMode::Paper); }),
            ErrorCode::Unstable);
}

TEST(Inspector, ThreeIndependentQueues) {
  TrafficSpec t;
  const std::vector<Flow> flows{{{0, 0}, {2, 0}, 0.5}};
  const auto r = inspect_loads(derive_channel_rates(flows, MeshGrid(3, 1)), flows, t);
  for (int x = 0; x < 3; ++x) {
    const auto& m = r.router({x, 0});
    const Port in = x == 0 ? Port::Local : Port::West;
    EXPECT_NEAR(m.rt(in), 2.0, 1e-12);
    EXPECT_NEAR(m.wq(in), 1.0, 1e-12);
    EXPECT_NEAR(m.queue_len(in), 1.0, 1e-12);
  }
  EXPECT_NEAR(r.path_delay({0, 0}, {2, 0}), 6.0, 1e-12);
  ASSERT_EQ(r.flows().size(), 1u);
  EXPECT_NEAR(r.flows()[0].delay, 6.0, 1e-12);
}

TEST(Inspector, ZeroLoadCollapsesToHopCount) {
  std::mt19937 rng(31);
  for (int i = 0; i < 40; ++i) {
    const auto g = testkit::random_grid(rng, 8);
    const auto p = testkit::random_placement(rng, g, testkit::random_counts(rng, g.tiles(), true));
    TrafficSpec t;
    t.lambda_g = 1e-9;
    t.svc.mean_service = i % 2 == 0 ? 1.0 : 10.0;
    for (auto mode : {KingmanMode::Paper, KingmanMode::Standard}) {
      t.kingman = mode;
      const auto r = packet_delay_inspector(p, t);
      for (const auto& f : r.flows()) {
        const double hops = manhattan(f.flow.src, f.flow.dst) + 1;
        EXPECT_NEAR(f.delay, hops * t.svc.mean_service, 1e-6 * t.svc.mean_service);
      }
    }
  }
}

TEST(Inspector, DelayMonotoneInLoad) {
  std::mt19937 rng(77);
  for (int i = 0; i < 20; ++i) {
    const auto g = testkit::random_grid(rng, 6);
    const auto p = testkit::random_placement(rng, g, testkit::random_counts(rng, g.tiles(), true));
    TrafficSpec t;
    std::vector<double> prev;
    for (double lg : {0.0005, 0.001, 0.002, 0.004, 0.008}) {
      t.lambda_g = lg;
      std::vector<double> cur;
      try {
        for (const auto& f : packet_delay_inspector(p, t).flows()) cur.push_back(f.delay);
      } catch (const Error& e) {
        EXPECT_TRUE(e.code() == ErrorCode::Unstable || e.code() == ErrorCode::NonConvergent);
        break;
      }
      for (std::size_t k = 0; k < prev.size(); ++k) EXPECT_GE(cur[k], prev[k] - 1e-12);
      prev = cur;
    }
  }
}

TEST(Inspector, SymmetricRoutersAgree) {
  const auto p = canonical_placement(CanonicalFamily::central(), MeshGrid(6, 6), 32, 4, 0);
  TrafficSpec t;
  t.lambda_g = 0.02;
  const auto r = packet_delay_inspector(p, t);
  for (int i = 0; i < 36; ++i) {
    const Coord c = p.grid().coord(i);
    const Coord m = apply(Symmetry::Rot180, c, p.grid());
    EXPECT_NEAR(r.router(c).mean_rt(), r.router(m).mean_rt(), 1e-9);
  }
}

TEST(Inspector, CenterRoutersSlowerThanCorners) {
  const auto p = canonical_placement(CanonicalFamily::central(), MeshGrid(8, 8), 48, 16, 0);
  TrafficSpec t;
  t.lambda_g = 0.001;
  t.svc.mean_service = 10.0;
  const auto r = packet_delay_inspector(p, t);
  double corner = 0;
  for (Coord c : {Coord{0, 0}, Coord{7, 0}, Coord{0, 7}, Coord{7, 7}})
    corner = std::max(corner, r.router(c).mean_rt());
  for (Coord c : {Coord{3, 3}, Coord{4, 3}, Coord{3, 4}, Coord{4, 4}})
    EXPECT_GT(r.router(c).mean_rt(), corner);
}

TEST(Inspector, CsvHeaders) {
  TrafficSpec t;
  const auto r = packet_delay_inspector(parse_text("C$\n"), t);
  EXPECT_EQ(r.routers_csv().substr(0, r.routers_csv().find('\n')), "x,y,channel,lambda,rho_e,wq,rt,queue_len");
  EXPECT_EQ(r.flows_csv().substr(0, r.flows_csv().find('\n')), "src_x,src_y,dst_x,dst_y,rate,delay");
}
