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
 * @file latency.hpp
 * @brief Expected access latency of every core and the placement objective.
 *
 * Per core i:
 *
 *   total_i = latency_l1 + l2_i * miss_l1 + mem_i * miss_l1 * miss_l2
 *
 * In LowTraffic mode l2_i is the p-weighted Manhattan distance to the caches
 * and mem_i the p-weighted cache-to-controller distance, both in hops times
 * E{S}. In HighTraffic mode every hop is replaced by the modeled response time
 * of the router channel it enters, and the source router contributes its
 * waiting time only, so both modes agree exactly at zero load.
 */

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nocplace/mesh.hpp"
#include "nocplace/queueing.hpp"
#include "nocplace/routing.hpp"
#include "nocplace/traffic.hpp"

namespace nocplace {

enum class LatencyMode { LowTraffic, HighTraffic };

inline std::string_view mode_name(LatencyMode m) {
  return m == LatencyMode::LowTraffic ? "low" : "high";
}

struct CoreLatency {
  Coord core;
  double l2_term = 0;
  double mem_term = 0;
  double total = 0;
};

struct LatencyReport {
  LatencyMode mode = LatencyMode::LowTraffic;
  std::vector<CoreLatency> per_core;
  double l2_sum = 0;
  double mem_sum = 0;
  double objective = 0;
};

namespace detail {

inline std::size_t core_index(const std::vector<Coord>& cores, Coord c) {
  for (std::size_t i = 0; i < cores.size(); ++i)
    if (cores[i] == c) return i;
  throw Error(ErrorCode::InvalidConfig,
              "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ") is not a core");
}

inline double l2_hops(std::size_t i, Coord core, const std::vector<Coord>& caches,
                      const TrafficSpec& t) {
  double s = 0;
  for (std::size_t j = 0; j < caches.size(); ++j)
    s += t.access(i, j, caches.size()) * manhattan(core, caches[j]);
  return s;
}

inline std::vector<double> cache_to_mc_hops(const Placement& p) {
  const auto caches = p.caches();
  const auto mcs = p.mcs();
  const auto q = mc_assignment(p);
  std::vector<double> d(caches.size(), 0.0);
  for (std::size_t j = 0; j < caches.size(); ++j)
    for (auto [k, w] : q[j]) d[j] += w * manhattan(caches[j], mcs[k]);
  return d;
}

}  // namespace detail

/// Expected hop distance from a core to the caches it accesses.
inline double low_traffic_l2_latency(Coord core, const Placement& p, const TrafficSpec& t) {
  const auto caches = p.caches();
  if (caches.empty()) throw Error(ErrorCode::NoCaches, "placement has no caches");
  const auto cores = p.cores();
  validate(t, cores.size(), caches.size());
  return detail::l2_hops(detail::core_index(cores, core), core, caches, t);
}

/// Expected cache-to-controller hop distance seen by a core, plus the fixed
/// off-chip access time.
inline double low_traffic_mem_latency(Coord core, const Placement& p, const TrafficSpec& t) {
  const auto caches = p.caches();
  if (caches.empty()) throw Error(ErrorCode::NoCaches, "placement has no caches");
  if (p.counts().mcs == 0) throw Error(ErrorCode::NoMemControllers, "placement has no memory controllers");
  const auto cores = p.cores();
  validate(t, cores.size(), caches.size());
  const auto i = detail::core_index(cores, core);
  const auto d = detail::cache_to_mc_hops(p);
  double s = 0;
  for (std::size_t j = 0; j < caches.size(); ++j) s += t.access(i, j, caches.size()) * d[j];
  return s + t.mem_fixed_latency;
}

/// Core-independent form for uniform access.
inline double low_traffic_mem_latency(const Placement& p, const TrafficSpec& t) {
  if (p.counts().caches == 0) throw Error(ErrorCode::NoCaches, "placement has no caches");
  if (p.counts().mcs == 0) throw Error(ErrorCode::NoMemControllers, "placement has no memory controllers");
  if (!t.p.empty()) throw Error(ErrorCode::InvalidTraffic, "core-independent form needs uniform access");
  const auto d = detail::cache_to_mc_hops(p);
  double s = 0;
  for (double v : d) s += v;
  return s / static_cast<double>(d.size()) + t.mem_fixed_latency;
}

inline LatencyReport objective(const Placement& p, const TrafficSpec& t, LatencyMode mode,
                               const FixedPointOptions& fp = {}) {
  const auto cores = p.cores();
  const auto caches = p.caches();
  const auto mcs = p.mcs();
  if (caches.empty()) throw Error(ErrorCode::NoCaches, "placement has no caches");
  validate(t, cores.size(), caches.size());
  const double es = t.svc.mean_service;
  const auto q = mc_assignment(p);

  LatencyReport r;
  r.mode = mode;
  r.per_core.reserve(cores.size());

  std::vector<double> cache_mem(caches.size(), 0.0);
  std::optional<InspectorResult> inspected;
  if (mode == LatencyMode::HighTraffic && !cores.empty())
    inspected.emplace(packet_delay_inspector(p, t, fp));

  for (std::size_t j = 0; j < caches.size(); ++j)
    for (auto [k, w] : q[j]) {
      const double hop_cost = inspected ? inspected->path_delay(caches[j], mcs[k]) - es
                                        : es * manhattan(caches[j], mcs[k]);
      cache_mem[j] += w * hop_cost;
    }

  for (std::size_t i = 0; i < cores.size(); ++i) {
    CoreLatency c{cores[i]};
    for (std::size_t j = 0; j < caches.size(); ++j) {
      const double pij = t.access(i, j, caches.size());
      if (pij == 0) continue;
      const double path = inspected ? inspected->path_delay(cores[i], caches[j]) - es
                                    : es * manhattan(cores[i], caches[j]);
      c.l2_term += pij * path;
      c.mem_term += pij * cache_mem[j];
    }
    if (!mcs.empty()) c.mem_term += t.mem_fixed_latency;
    c.total = t.latency_l1 + c.l2_term * t.miss_l1() + c.mem_term * t.miss_l1() * t.miss_l2;
    r.l2_sum += c.l2_term;
    r.mem_sum += c.mem_term;
    r.objective += c.total;
    r.per_core.push_back(c);
  }
  return r;
}

inline nlohmann::json to_json(const LatencyReport& r, const TrafficSpec& t) {
  nlohmann::json cores = nlohmann::json::array();
  for (const auto& c : r.per_core)
    cores.push_back({{"x", c.core.x},
                     {"y", c.core.y},
                     {"l2_term", c.l2_term},
                     {"mem_term", c.mem_term},
                     {"total", c.total}});
  return {{"mode", mode_name(r.mode)},
          {"objective", r.objective},
          {"l2_sum", r.l2_sum},
          {"mem_sum", r.mem_sum},
          {"per_core", std::move(cores)},
          {"parameters",
           {{"lambda_g", t.lambda_g},
            {"miss_l1", t.miss_l1()},
            {"miss_l2", t.miss_l2},
            {"latency_l1", t.latency_l1},
            {"mean_service", t.svc.mean_service},
            {"cs2", t.svc.cs2},
            {"ca2", t.ca2},
            {"kingman", t.kingman == KingmanMode::Paper ? "paper" : "standard"},
            {"model_replies", t.model_replies},
            {"mem_fixed_latency", t.mem_fixed_latency},
            {"uniform_access", t.p.empty()}}}};
}

}  // namespace nocplace
