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
 * @file routing.hpp
 * @brief Dimension-ordered XY routes and steady-state channel loads.
 *
 * y grows downward (row 0 is the top row of the text format), so North means
 * y-1 and South y+1. A route lists every router from source to destination
 * inclusive, together with the input port the message arrives on and the
 * output port it leaves through. The source router's input is Local
 * (injection), the destination router's output is Local (ejection).
 */

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "nocplace/mesh.hpp"
#include "nocplace/traffic.hpp"

namespace nocplace {

enum class Port : std::uint8_t { Local = 0, North, South, East, West };
inline constexpr int kPorts = 5;
inline constexpr std::array<Port, kPorts> kAllPorts{Port::Local, Port::North, Port::South,
                                                    Port::East, Port::West};

constexpr int port_index(Port p) { return static_cast<int>(p); }

constexpr std::string_view port_name(Port p) {
  switch (p) {
    case Port::Local: return "local";
    case Port::North: return "north";
    case Port::South: return "south";
    case Port::East: return "east";
    case Port::West: return "west";
  }
  return "?";
}

/// The port a message arrives on after leaving through `out`.
constexpr Port facing(Port out) {
  switch (out) {
    case Port::North: return Port::South;
    case Port::South: return Port::North;
    case Port::East: return Port::West;
    case Port::West: return Port::East;
    case Port::Local: return Port::Local;
  }
  return Port::Local;
}

constexpr Coord step(Coord c, Port out) {
  switch (out) {
    case Port::North: return {c.x, c.y - 1};
    case Port::South: return {c.x, c.y + 1};
    case Port::East: return {c.x + 1, c.y};
    case Port::West: return {c.x - 1, c.y};
    case Port::Local: return c;
  }
  return c;
}

struct Hop {
  Coord router;
  Port in;
  Port out;
  friend bool operator==(const Hop&, const Hop&) = default;
};

/// X first along row src.y, then Y along column dst.x.
inline std::vector<Hop> xy_route(Coord src, Coord dst) {
  std::vector<Hop> path;
  path.reserve(static_cast<std::size_t>(manhattan(src, dst) + 1));
  Coord at = src;
  Port in = Port::Local;
  while (at != dst) {
    Port out;
    if (at.x < dst.x) out = Port::East;
    else if (at.x > dst.x) out = Port::West;
    else if (at.y < dst.y) out = Port::South;
    else out = Port::North;
    path.push_back({at, in, out});
    at = step(at, out);
    in = facing(out);
  }
  path.push_back({at, in, Port::Local});
  return path;
}

enum class FlowClass : std::uint8_t { CoreToCache, CacheToMc, Reply };

struct Flow {
  Coord src;
  Coord dst;
  double rate = 0;
  FlowClass cls = FlowClass::CoreToCache;
};

/// Cache-to-memory-controller distribution q: each cache sends its misses to
/// its nearest controllers, split uniformly over ties. Indices follow the
/// row-major controller order.
inline std::vector<std::vector<std::pair<std::size_t, double>>> mc_assignment(const Placement& p) {
  const auto caches = p.caches();
  const auto mcs = p.mcs();
  std::vector<std::vector<std::pair<std::size_t, double>>> q(caches.size());
  if (mcs.empty()) return q;
  for (std::size_t j = 0; j < caches.size(); ++j) {
    int best = std::numeric_limits<int>::max();
    for (auto m : mcs) best = std::min(best, manhattan(caches[j], m));
    std::vector<std::size_t> ties;
    for (std::size_t k = 0; k < mcs.size(); ++k)
      if (manhattan(caches[j], mcs[k]) == best) ties.push_back(k);
    for (auto k : ties) q[j].emplace_back(k, 1.0 / static_cast<double>(ties.size()));
  }
  return q;
}

/// Request flows of the workload: core -> cache at lambda_g * miss_l1 * p_ij,
/// cache -> controller for the L2 misses, optional mirrored replies.
/// Zero-rate flows are omitted.
inline std::vector<Flow> build_flows(const Placement& p, const TrafficSpec& t) {
  const auto cores = p.cores();
  const auto caches = p.caches();
  const auto mcs = p.mcs();
  if (cores.empty() || caches.empty())
    throw Error(ErrorCode::NoCaches, "flows need at least one core and one cache");
  validate(t, cores.size(), caches.size());

  std::vector<Flow> flows;
  std::vector<double> cache_in(caches.size(), 0.0);
  for (std::size_t i = 0; i < cores.size(); ++i) {
    for (std::size_t j = 0; j < caches.size(); ++j) {
      const double r = t.core_rate(i) * t.miss_l1() * t.access(i, j, caches.size());
      cache_in[j] += r;
      if (r > 0) flows.push_back({cores[i], caches[j], r, FlowClass::CoreToCache});
    }
  }
  if (!mcs.empty() && t.miss_l2 > 0) {
    const auto q = mc_assignment(p);
    for (std::size_t j = 0; j < caches.size(); ++j)
      for (auto [k, w] : q[j]) {
        const double r = cache_in[j] * t.miss_l2 * w;
        if (r > 0) flows.push_back({caches[j], mcs[k], r, FlowClass::CacheToMc});
      }
  }
  if (t.model_replies) {
    const std::size_t n = flows.size();
    for (std::size_t f = 0; f < n; ++f)
      flows.push_back({flows[f].dst, flows[f].src, flows[f].rate, FlowClass::Reply});
  }
  return flows;
}

/// Per-router turn rates lambda_ik (input port i -> output port k).
class ChannelLoadMap {
 public:
  using TurnTable = std::array<std::array<double, kPorts>, kPorts>;

  explicit ChannelLoadMap(MeshGrid grid) : grid_(grid), turns_(grid.tiles(), TurnTable{}) {}

  const MeshGrid& grid() const { return grid_; }

  void add(Coord router, Port in, Port out, double rate) {
    turns_[grid_.index(router)][port_index(in)][port_index(out)] += rate;
  }

  const TurnTable& turns(Coord router) const { return turns_[grid_.index(router)]; }

  double turn_rate(Coord router, Port in, Port out) const {
    return turns(router)[port_index(in)][port_index(out)];
  }

  /// Aggregate arrival rate lambda_i of an input channel.
  double input_rate(Coord router, Port in) const {
    double s = 0;
    for (double v : turns(router)[port_index(in)]) s += v;
    return s;
  }

  double output_rate(Coord router, Port out) const {
    double s = 0;
    for (const auto& row : turns(router)) s += row[port_index(out)];
    return s;
  }

  double router_rate(Coord router) const {
    double s = 0;
    for (const auto& row : turns(router))
      for (double v : row) s += v;
    return s;
  }

  /// Rows `router_x,router_y,in_port,out_port,rate` for every non-zero turn,
  /// routers row-major, ports in Local/North/South/East/West order.
  std::string to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "router_x,router_y,in_port,out_port,rate\n";
    for (int i = 0; i < grid_.tiles(); ++i) {
      const auto c = grid_.coord(i);
      for (auto in : kAllPorts)
        for (auto out : kAllPorts) {
          const double r = turns_[i][port_index(in)][port_index(out)];
          if (r != 0)
            os << c.x << ',' << c.y << ',' << port_name(in) << ',' << port_name(out) << ',' << r
               << '\n';
        }
    }
    return os.str();
  }

 private:
  MeshGrid grid_;
  std::vector<TurnTable> turns_;
};

/// Superposes every flow along its XY route. Flows are accumulated in a
/// canonical order so the result does not depend on the input order.
inline ChannelLoadMap derive_channel_rates(std::vector<Flow> flows, const MeshGrid& grid) {
  std::sort(flows.begin(), flows.end(), [](const Flow& a, const Flow& b) {
    return std::tie(a.src, a.dst, a.cls, a.rate) < std::tie(b.src, b.dst, b.cls, b.rate);
  });
  ChannelLoadMap loads(grid);
  for (const auto& f : flows) {
    if (!grid.contains(f.src) || !grid.contains(f.dst))
      throw Error(ErrorCode::OutOfBounds, "flow endpoint outside grid");
    for (const auto& hop : xy_route(f.src, f.dst)) loads.add(hop.router, hop.in, hop.out, f.rate);
  }
  return loads;
}

}  // namespace nocplace
