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

// Generators and independent oracles shared by the test binaries. Nothing
// here calls into the code under test except to construct inputs.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "nocplace/mesh.hpp"

namespace nocplace::testkit {

inline MeshGrid random_grid(std::mt19937& rng, int max_side) {
  std::uniform_int_distribution<int> side(1, max_side);
  while (true) {
    const int w = side(rng), h = side(rng);
    if (w * h >= 2) return MeshGrid(w, h);
  }
}

inline Placement random_placement(std::mt19937& rng, const MeshGrid& g, KindCounts n) {
  std::vector<NodeKind> tiles(static_cast<std::size_t>(g.tiles()), NodeKind::RouterOnly);
  int at = 0;
  for (int i = 0; i < n.cores; ++i) tiles[at++] = NodeKind::Core;
  for (int i = 0; i < n.caches; ++i) tiles[at++] = NodeKind::Cache;
  for (int i = 0; i < n.mcs; ++i) tiles[at++] = NodeKind::MemController;
  std::shuffle(tiles.begin(), tiles.end(), rng);
  return Placement(g, std::move(tiles));
}

/// Random counts with at least one core and one cache.
inline KindCounts random_counts(std::mt19937& rng, int tiles, bool with_mcs) {
  KindCounts n;
  n.caches = std::uniform_int_distribution<int>(1, std::max(1, tiles / 3))(rng);
  n.cores = std::uniform_int_distribution<int>(1, std::max(1, tiles - n.caches - (with_mcs ? 1 : 0)))(rng);
  if (with_mcs && n.cores + n.caches < tiles)
    n.mcs = std::uniform_int_distribution<int>(1, std::min(2, tiles - n.cores - n.caches))(rng);
  return n;
}

/// Depth-first enumeration of every assignment of the counts to the tiles,
/// one tile at a time. Independent of the library's permutation-based
/// enumerator.
inline void naive_enumerate(int tiles, KindCounts n,
                            const std::function<void(const std::vector<NodeKind>&)>& fn) {
  std::vector<NodeKind> cur;
  int rest = tiles - n.cores - n.caches - n.mcs;
  std::function<void()> rec = [&] {
    if (static_cast<int>(cur.size()) == tiles) {
      fn(cur);
      return;
    }
    auto take = [&](int& left, NodeKind k) {
      if (left == 0) return;
      --left;
      cur.push_back(k);
      rec();
      cur.pop_back();
      ++left;
    };
    take(n.cores, NodeKind::Core);
    take(n.caches, NodeKind::Cache);
    take(n.mcs, NodeKind::MemController);
    take(rest, NodeKind::RouterOnly);
  };
  rec();
}

/// Hop objective with uniform access written out from its definition:
/// sum over cores of the mean distance to the caches, plus the memory term
/// (mean over caches of the distance to the nearest controllers) weighted by
/// miss_l2, everything in units of E{S} = 1.
inline double oracle_low_objective(const Placement& p, double miss_l2) {
  std::vector<Coord> cores, caches, mcs;
  for (int i = 0; i < p.grid().tiles(); ++i) {
    const Coord c = p.grid().coord(i);
    switch (p.tiles()[i]) {
      case NodeKind::Core: cores.push_back(c); break;
      case NodeKind::Cache: caches.push_back(c); break;
      case NodeKind::MemController: mcs.push_back(c); break;
      default: break;
    }
  }
  auto dist = [](Coord a, Coord b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); };
  double mem = 0;
  if (!mcs.empty()) {
    for (auto h : caches) {
      int best = std::numeric_limits<int>::max();
      for (auto m : mcs) best = std::min(best, dist(h, m));
      mem += best;
    }
    mem /= static_cast<double>(caches.size());
  }
  double total = 0;
  for (auto r : cores) {
    double l2 = 0;
    for (auto h : caches) l2 += dist(r, h);
    total += l2 / static_cast<double>(caches.size()) + miss_l2 * mem;
  }
  return total;
}

}  // namespace nocplace::testkit
