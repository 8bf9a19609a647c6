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

/**
 * @file queueing.hpp
 * @brief Router response-time model.
 *
 * Every router input channel is an infinite FIFO queue with mean service
 * time E{S}. Channels that compete for the same output port inflate each
 * other's utilization through the contention matrix C:
 *
 *   c_ii = 1
 *   c_ij = (1/N_j) * sum_k rho_i h_ik * x_jk / (1 - x_jk)^2        (i != j)
 *   h_ik = 1 - exp(-lambda_ik E{S_i}),  x_jk = rho_j (1 - exp(-lambda_jk E{S_j}))
 *
 * where x/(1-x)^2 is the closed form of sum_m m x^m and N_j is the mean
 * number of messages in channel j. The effective utilization of channel i is
 * the i-th row sum of diag(lambda) C diag(E{S}), and the waiting time follows
 * Kingman's approximation. Because C depends on N and N on the response
 * time, the router is solved by damped fixed-point iteration.
 */

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nocplace/mesh.hpp"
#include "nocplace/routing.hpp"
#include "nocplace/traffic.hpp"

namespace nocplace {

/// Mean response time of an M/M/1 queue.
inline double mm1_response(double lambda, double mu) {
  if (!(lambda >= 0) || !(mu > 0)) throw Error(ErrorCode::InvalidConfig, "need lambda >= 0, mu > 0");
  if (lambda >= mu)
    throw Error(ErrorCode::Unstable, "M/M/1 with lambda " + std::to_string(lambda) +
                                         " >= mu " + std::to_string(mu));
  return 1.0 / (mu - lambda);
}

/// Kingman-style waiting time. Paper mode evaluates
/// ((Ca2+Cs2)/2) E{S} / (1-rho_e) exactly as written; with unit SCVs that is
/// the M/M/1 response time, not the waiting time. Standard mode is the
/// textbook G/G/1 approximation (rho_e/(1-rho_e)) ((Ca2+Cs2)/2) E{S}.
inline double kingman_wait(double rho_e, double ca2, double cs2, double es,
                           KingmanMode mode = KingmanMode::Paper) {
  if (!(rho_e >= 0) || !(ca2 >= 0) || !(cs2 >= 0) || !(es > 0))
    throw Error(ErrorCode::InvalidConfig, "kingman_wait needs rho_e, SCVs >= 0 and E{S} > 0");
  if (rho_e >= 1) throw Error(ErrorCode::Unstable, "rho_e = " + std::to_string(rho_e) + " >= 1");
  const double variability = (ca2 + cs2) / 2.0;
  if (mode == KingmanMode::Paper) return variability * es / (1.0 - rho_e);
  return rho_e / (1.0 - rho_e) * variability * es;
}

/// Channel response time under the selected Kingman reading. Paper mode
/// already includes the service time; it is floored at E{S} so the waiting
/// part never goes negative for service SCVs below one.
inline double channel_response(double rho_e, double ca2, double cs2, double es, KingmanMode mode) {
  const double k = kingman_wait(rho_e, ca2, cs2, es, mode);
  return mode == KingmanMode::Paper ? std::max(es, k) : es + k;
}

/// Arrival rates of a router's n input channels and their split over the
/// router's output ports: turn(i, k) = lambda_ik, lambda_i = sum_k lambda_ik.
struct ChannelLoads {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd turn;

  static ChannelLoads from_turns(const Eigen::MatrixXd& turn) {
    return {turn.rowwise().sum(), turn};
  }
};

inline ChannelLoads router_loads(const ChannelLoadMap& map, Coord router) {
  Eigen::MatrixXd turn(kPorts, kPorts);
  const auto& t = map.turns(router);
  for (int i = 0; i < kPorts; ++i)
    for (int k = 0; k < kPorts; ++k) turn(i, k) = t[i][k];
  return ChannelLoads::from_turns(turn);
}

/// Per-channel effective utilization: row sums of diag(lambda) C diag(E{S}).
inline Eigen::VectorXd effective_utilization(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& c,
                                             const Eigen::VectorXd& es) {
  if (c.rows() != lambda.size() || c.cols() != lambda.size() || es.size() != lambda.size())
    throw Error(ErrorCode::DimensionMismatch,
                "lambda has " + std::to_string(lambda.size()) + " channels, C is " +
                    std::to_string(c.rows()) + "x" + std::to_string(c.cols()) + ", E{S} has " +
                    std::to_string(es.size()));
  return (lambda.asDiagonal() * c * es.asDiagonal()).rowwise().sum();
}

/// Contention matrix for given mean channel occupancies N.
inline Eigen::MatrixXd contention_for_occupancy(const ChannelLoads& loads, const Eigen::VectorXd& es,
                                                const Eigen::VectorXd& occupancy) {
  const auto n = loads.lambda.size();
  if (loads.turn.rows() != n || es.size() != n || occupancy.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "channel vectors disagree on the channel count");
  const Eigen::VectorXd rho = loads.lambda.cwiseProduct(es);
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (loads.lambda(j) <= 0) continue;
    if (rho(j) >= 1) throw Error(ErrorCode::Unstable, "channel utilization rho >= 1");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == j || loads.lambda(i) <= 0) continue;
      double sum = 0;
      for (Eigen::Index k = 0; k < loads.turn.cols(); ++k) {
        const double head = 1.0 - std::exp(-loads.turn(i, k) * es(i));
        const double x = rho(j) * (1.0 - std::exp(-loads.turn(j, k) * es(j)));
        if (x >= 1) throw Error(ErrorCode::Unstable, "contention series diverges (x >= 1)");
        sum += rho(i) * head * x / ((1.0 - x) * (1.0 - x));
      }
      if (sum > 0) c(i, j) = sum / occupancy(j);
    }
  }
  return c;
}

struct FixedPointOptions {
  double tolerance = 1e-8;
  int max_iterations = 500;
  double damping = 0.5;
};

/// Solved state of one router.
struct RouterSolution {
  Eigen::MatrixXd contention;
  Eigen::VectorXd rho;
  Eigen::VectorXd rho_e;
  Eigen::VectorXd wq;
  Eigen::VectorXd rt;
  Eigen::VectorXd queue_len;  // mean number in channel, lambda * RT
  int iterations = 0;
};

/// Resolves the contention / occupancy fixed point of a router.
inline RouterSolution solve_router(const ChannelLoads& loads, const Eigen::VectorXd& es,
                                   const Eigen::VectorXd& cs2, double ca2, KingmanMode mode,
                                   const FixedPointOptions& opt = {}) {
  const auto n = loads.lambda.size();
  if (es.size() != n || cs2.size() != n || loads.turn.rows() != n)
    throw Error(ErrorCode::DimensionMismatch, "channel vectors disagree on the channel count");
  RouterSolution s;
  s.rho = loads.lambda.cwiseProduct(es);
  for (Eigen::Index j = 0; j < n; ++j)
    if (s.rho(j) >= 1)
      throw Error(ErrorCode::Unstable, "channel " + std::to_string(j) + " has rho = " +
                                           std::to_string(s.rho(j)) + " >= 1");

  // Response time with the effective utilization capped just below one, so
  // intermediate iterates that overshoot still produce a (large) occupancy.
  auto occupancy_for = [&](const Eigen::VectorXd& rho_e) {
    Eigen::VectorXd occ(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = std::min(rho_e(j), 1.0 - 1e-9);
      occ(j) = loads.lambda(j) * channel_response(r, ca2, cs2(j), es(j), mode);
    }
    return occ;
  };

  bool has_cross = false;
  for (Eigen::Index i = 0; i < n && !has_cross; ++i)
    for (Eigen::Index j = 0; j < n && !has_cross; ++j)
      if (i != j && loads.lambda(i) > 0 && loads.lambda(j) > 0) has_cross = true;

  Eigen::VectorXd occ = occupancy_for(s.rho);
  if (has_cross) {
    bool converged = false;
    for (int it = 1; it <= opt.max_iterations; ++it) {
      s.iterations = it;
      const auto c = contention_for_occupancy(loads, es, occ);
      const Eigen::VectorXd next = occupancy_for(effective_utilization(loads.lambda, c, es));
      double diff = 0;
      for (Eigen::Index j = 0; j < n; ++j)
        diff = std::max(diff, std::abs(next(j) - occ(j)) / std::max(1.0, std::abs(occ(j))));
      occ = (1.0 - opt.damping) * occ + opt.damping * next;
      if (diff <= opt.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw Error(ErrorCode::NonConvergent, "contention fixed point did not converge in " +
                                                std::to_string(opt.max_iterations) + " iterations");
  }

  s.contention = contention_for_occupancy(loads, es, occ);
  s.rho_e = effective_utilization(loads.lambda, s.contention, es);
  s.rt.resize(n);
  s.wq.resize(n);
  s.queue_len.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (s.rho_e(j) >= 1)
      throw Error(ErrorCode::Unstable, "channel " + std::to_string(j) + " has rho_e = " +
                                           std::to_string(s.rho_e(j)) + " >= 1");
    s.rt(j) = channel_response(s.rho_e(j), ca2, cs2(j), es(j), mode);
    s.wq(j) = s.rt(j) - es(j);
    s.queue_len(j) = loads.lambda(j) * s.rt(j);
  }
  return s;
}

/// Contention matrix at the router's fixed point, uniform service spec.
inline Eigen::MatrixXd contention_matrix(const ChannelLoads& loads, const ServiceSpec& svc,
                                         double ca2 = 1.0, KingmanMode mode = KingmanMode::Paper,
                                         const FixedPointOptions& opt = {}) {
  const auto n = loads.lambda.size();
  return solve_router(loads, Eigen::VectorXd::Constant(n, svc.mean_service),
                      Eigen::VectorXd::Constant(n, svc.cs2), ca2, mode, opt)
      .contention;
}

struct RouterQueueModel {
  Coord router;
  ChannelLoads loads;
  RouterSolution solution;

  double lambda(Port p) const { return loads.lambda(port_index(p)); }
  double rho_e(Port p) const { return solution.rho_e(port_index(p)); }
  double wq(Port p) const { return solution.wq(port_index(p)); }
  double rt(Port p) const { return solution.rt(port_index(p)); }
  double queue_len(Port p) const { return solution.queue_len(port_index(p)); }

  /// Arrival-weighted mean response time over the router's channels, or the
  /// Local channel's value for an idle router.
  double mean_rt() const {
    const double total = loads.lambda.sum();
    if (total <= 0) return solution.rt(0);
    return loads.lambda.dot(solution.rt) / total;
  }
};

struct FlowDelay {
  Flow flow;
  double delay = 0;
};

class InspectorResult {
 public:
  InspectorResult(ChannelLoadMap loads, std::vector<RouterQueueModel> routers,
                  const std::vector<Flow>& flows)
      : loads_(std::move(loads)), routers_(std::move(routers)) {
    flows_.reserve(flows.size());
    for (const auto& f : flows) flows_.push_back({f, path_delay(f.src, f.dst)});
  }

  const ChannelLoadMap& loads() const { return loads_; }
  const std::vector<RouterQueueModel>& routers() const { return routers_; }
  const std::vector<FlowDelay>& flows() const { return flows_; }
  const RouterQueueModel& router(Coord c) const { return routers_[loads_.grid().index(c)]; }

  /// Sum of the response times of the input channels traversed on the XY
  /// route, both endpoint routers included.
  double path_delay(Coord src, Coord dst) const {
    double d = 0;
    for (const auto& h : xy_route(src, dst)) d += router(h.router).rt(h.in);
    return d;
  }

  /// `x,y,channel,lambda,rho_e,wq,rt,queue_len` for every loaded channel.
  std::string routers_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "x,y,channel,lambda,rho_e,wq,rt,queue_len\n";
    for (const auto& r : routers_)
      for (auto p : kAllPorts)
        if (r.lambda(p) > 0)
          os << r.router.x << ',' << r.router.y << ',' << port_name(p) << ',' << r.lambda(p) << ','
             << r.rho_e(p) << ',' << r.wq(p) << ',' << r.rt(p) << ',' << r.queue_len(p) << '\n';
    return os.str();
  }

  /// `src_x,src_y,dst_x,dst_y,rate,delay` per flow.
  std::string flows_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "src_x,src_y,dst_x,dst_y,rate,delay\n";
    for (const auto& f : flows_)
      os << f.flow.src.x << ',' << f.flow.src.y << ',' << f.flow.dst.x << ',' << f.flow.dst.y << ','
         << f.flow.rate << ',' << f.delay << '\n';
    return os.str();
  }

 private:
  ChannelLoadMap loads_;
  std::vector<RouterQueueModel> routers_;
  std::vector<FlowDelay> flows_;
};

/// Solves every router of an already-derived load map.
inline InspectorResult inspect_loads(ChannelLoadMap loads, const std::vector<Flow>& flows,
                                     const TrafficSpec& t, const FixedPointOptions& opt = {}) {
  const auto& g = loads.grid();
  const Eigen::VectorXd es = Eigen::VectorXd::Constant(kPorts, t.svc.mean_service);
  const Eigen::VectorXd cs2 = Eigen::VectorXd::Constant(kPorts, t.svc.cs2);
  std::vector<RouterQueueModel> routers;
  routers.reserve(static_cast<std::size_t>(g.tiles()));
  for (int i = 0; i < g.tiles(); ++i) {
    const Coord c = g.coord(i);
    auto cl = router_loads(loads, c);
    try {
      auto sol = solve_router(cl, es, cs2, t.ca2, t.kingman, opt);
      routers.push_back({c, std::move(cl), std::move(sol)});
    } catch (const Error& e) {
      throw Error(e.code(), "router (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                                "): " + e.message());
    }
  }
  return InspectorResult(std::move(loads), std::move(routers), flows);
}

/// Flows, channel rates, per-router contention fixed points and per-flow
/// end-to-end delays for a placement.
inline InspectorResult packet_delay_inspector(const Placement& p, const TrafficSpec& t,
                                              const FixedPointOptions& opt = {}) {
  auto flows = build_flows(p, t);
  auto loads = derive_channel_rates(flows, p.grid());
  return inspect_loads(std::move(loads), flows, t, opt);
}

}  // namespace nocplace
