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
 * @file mesh.hpp
 * @brief Mesh grid, tile assignments and the combinatorics around them.
 *
 * A Placement assigns one NodeKind to every tile of a MeshGrid. Tiles are
 * stored row-major (y outer, x inner); every list of coordinates returned by
 * this header follows the same order, which is what fixes the core/cache
 * indices used by access-probability matrices elsewhere.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nocplace/error.hpp"

namespace nocplace {

using BigInt = boost::multiprecision::cpp_int;

struct Coord {
  int x = 0;
  int y = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
  // Row-major order.
  friend std::strong_ordering operator<=>(const Coord& a, const Coord& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

inline int manhattan(Coord a, Coord b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

enum class NodeKind : std::uint8_t { Core, Cache, MemController, RouterOnly };

constexpr char kind_char(NodeKind k) {
  switch (k) {
    case NodeKind::Core: return 'C';
    case NodeKind::Cache: return '$';
    case NodeKind::MemController: return 'M';
    case NodeKind::RouterOnly: return '.';
  }
  return '?';
}

constexpr std::string_view kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::Core: return "core";
    case NodeKind::Cache: return "cache";
    case NodeKind::MemController: return "mc";
    case NodeKind::RouterOnly: return "router";
  }
  return "?";
}

inline std::optional<NodeKind> kind_from_char(char c) {
  switch (c) {
    case 'C': return NodeKind::Core;
    case '$': return NodeKind::Cache;
    case 'M': return NodeKind::MemController;
    case '.': return NodeKind::RouterOnly;
    default: return std::nullopt;
  }
}

inline std::optional<NodeKind> kind_from_name(std::string_view s) {
  for (auto k : {NodeKind::Core, NodeKind::Cache, NodeKind::MemController, NodeKind::RouterOnly})
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

class MeshGrid {
 public:
  static constexpr int kMaxSide = 16;

  MeshGrid(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1 || width > kMaxSide || height > kMaxSide || width * height < 2)
      throw Error(ErrorCode::InvalidGrid, "grid " + std::to_string(width) + "x" +
                                              std::to_string(height) + " outside 1..16 per side");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int tiles() const { return width_ * height_; }
  bool square() const { return width_ == height_; }

  bool contains(Coord c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool on_perimeter(Coord c) const {
    return c.x == 0 || c.y == 0 || c.x == width_ - 1 || c.y == height_ - 1;
  }
  int index(Coord c) const { return c.y * width_ + c.x; }
  Coord coord(int index) const { return {index % width_, index / width_}; }

  friend bool operator==(const MeshGrid&, const MeshGrid&) = default;

 private:
  int width_;
  int height_;
};

struct KindCounts {
  int cores = 0;
  int caches = 0;
  int mcs = 0;
  friend bool operator==(const KindCounts&, const KindCounts&) = default;
};

class Placement {
 public:
  Placement(MeshGrid grid, std::vector<NodeKind> tiles) : grid_(grid), tiles_(std::move(tiles)) {
    if (static_cast<int>(tiles_.size()) != grid_.tiles())
      throw Error(ErrorCode::Incomplete, "tile vector size " + std::to_string(tiles_.size()) +
                                             " does not match grid of " +
                                             std::to_string(grid_.tiles()) + " tiles");
    for (auto k : tiles_) {
      switch (k) {
        case NodeKind::Core: ++counts_.cores; break;
        case NodeKind::Cache: ++counts_.caches; break;
        case NodeKind::MemController: ++counts_.mcs; break;
        case NodeKind::RouterOnly: break;
      }
    }
  }

  const MeshGrid& grid() const { return grid_; }
  const std::vector<NodeKind>& tiles() const { return tiles_; }
  const KindCounts& counts() const { return counts_; }

  NodeKind kind(Coord c) const { return tiles_[grid_.index(c)]; }

  std::vector<Coord> coords_of(NodeKind k) const {
    std::vector<Coord> out;
    for (int i = 0; i < grid_.tiles(); ++i)
      if (tiles_[i] == k) out.push_back(grid_.coord(i));
    return out;
  }
  std::vector<Coord> cores() const { return coords_of(NodeKind::Core); }
  std::vector<Coord> caches() const { return coords_of(NodeKind::Cache); }
  std::vector<Coord> mcs() const { return coords_of(NodeKind::MemController); }

  /// Row-major string of kind characters without separators. Used as the
  /// total order for orbit representatives and deterministic output.
  std::string key() const {
    std::string s(tiles_.size(), '.');
    for (std::size_t i = 0; i < tiles_.size(); ++i) s[i] = kind_char(tiles_[i]);
    return s;
  }

  Placement with_swapped(Coord a, Coord b) const {
    auto t = tiles_;
    std::swap(t[grid_.index(a)], t[grid_.index(b)]);
    return Placement(grid_, std::move(t));
  }

  friend bool operator==(const Placement& a, const Placement& b) {
    return a.grid_ == b.grid_ && a.tiles_ == b.tiles_;
  }

 private:
  MeshGrid grid_;
  std::vector<NodeKind> tiles_;
  KindCounts counts_;
};

/// Builds a placement from an explicit map. Every tile must be present and no
/// coordinate may fall outside the grid.
inline Placement build_placement(const MeshGrid& grid, const std::map<Coord, NodeKind>& assignment) {
  std::vector<std::optional<NodeKind>> tiles(grid.tiles());
  for (const auto& [c, k] : assignment) {
    if (!grid.contains(c))
      throw Error(ErrorCode::OutOfBounds,
                  "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ") outside grid");
    tiles[grid.index(c)] = k;
  }
  std::vector<NodeKind> dense;
  dense.reserve(tiles.size());
  for (int i = 0; i < grid.tiles(); ++i) {
    if (!tiles[i]) {
      auto c = grid.coord(i);
      throw Error(ErrorCode::Incomplete,
                  "no assignment for (" + std::to_string(c.x) + "," + std::to_string(c.y) + ")");
    }
    dense.push_back(*tiles[i]);
  }
  return Placement(grid, std::move(dense));
}

// ---------------------------------------------------------------------------
// Symmetries

enum class Symmetry : std::uint8_t {
  Identity,
  Rot90,
  Rot180,
  Rot270,
  FlipX,
  FlipY,
  Transpose,
  AntiTranspose,
};

/// Which subgroup of the square's dihedral group to use. XY routing is only
/// invariant under maps that keep the x axis horizontal, so queueing-based
/// analysis must restrict itself to XyPreserving.
enum class SymmetryGroup { Full, XyPreserving };

inline bool preserves_xy_routing(Symmetry s) {
  return s == Symmetry::Identity || s == Symmetry::Rot180 || s == Symmetry::FlipX ||
         s == Symmetry::FlipY;
}

inline Coord apply(Symmetry s, Coord c, const MeshGrid& g) {
  const int w = g.width() - 1;
  const int h = g.height() - 1;
  switch (s) {
    case Symmetry::Identity: return c;
    case Symmetry::Rot90: return {h - c.y, c.x};
    case Symmetry::Rot180: return {w - c.x, h - c.y};
    case Symmetry::Rot270: return {c.y, w - c.x};
    case Symmetry::FlipX: return {w - c.x, c.y};
    case Symmetry::FlipY: return {c.x, h - c.y};
    case Symmetry::Transpose: return {c.y, c.x};
    case Symmetry::AntiTranspose: return {h - c.y, w - c.x};
  }
  return c;
}

/// Symmetries of the grid; 8 for square grids, 4 for rectangles.
inline std::vector<Symmetry> symmetry_group(const MeshGrid& g,
                                            SymmetryGroup which = SymmetryGroup::Full) {
  std::vector<Symmetry> out{Symmetry::Identity, Symmetry::Rot180, Symmetry::FlipX, Symmetry::FlipY};
  if (g.square() && which == SymmetryGroup::Full) {
    out.insert(out.end(),
               {Symmetry::Rot90, Symmetry::Rot270, Symmetry::Transpose, Symmetry::AntiTranspose});
  }
  return out;
}

inline Placement apply(Symmetry s, const Placement& p) {
  const auto& g = p.grid();
  std::vector<NodeKind> t(g.tiles(), NodeKind::RouterOnly);
  for (int i = 0; i < g.tiles(); ++i) t[g.index(apply(s, g.coord(i), g))] = p.tiles()[i];
  return Placement(g, std::move(t));
}

/// Distinct images of p under the group, sorted by key.
inline std::vector<Placement> symmetry_orbit(const Placement& p,
                                             SymmetryGroup which = SymmetryGroup::Full) {
  std::vector<Placement> out;
  for (auto s : symmetry_group(p.grid(), which)) {
    auto img = apply(s, p);
    if (std::find(out.begin(), out.end(), img) == out.end()) out.push_back(std::move(img));
  }
  std::sort(out.begin(), out.end(),
            [](const Placement& a, const Placement& b) { return a.key() < b.key(); });
  return out;
}

/// Lexicographically smallest key over the given symmetries.
inline std::string canonical_key(const Placement& p, const std::vector<Symmetry>& group) {
  std::string best = p.key();
  for (auto s : group) best = std::min(best, apply(s, p).key());
  return best;
}

// ---------------------------------------------------------------------------
// Counting

inline BigInt factorial(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Number of distinct assignments of the given counts to n_tiles tiles, the
/// multinomial n!/(cores! caches! mcs! rest!).
inline BigInt placement_count(int n_tiles, int n_cores, int n_caches, int n_mcs) {
  if (n_tiles < 0 || n_cores < 0 || n_caches < 0 || n_mcs < 0 ||
      n_cores + n_caches + n_mcs > n_tiles)
    throw Error(ErrorCode::Infeasible, "counts " + std::to_string(n_cores) + "+" +
                                           std::to_string(n_caches) + "+" +
                                           std::to_string(n_mcs) + " exceed " +
                                           std::to_string(n_tiles) + " tiles");
  const int rest = n_tiles - n_cores - n_caches - n_mcs;
  return factorial(n_tiles) / (factorial(n_cores) * factorial(n_caches) * factorial(n_mcs) *
                               factorial(rest));
}

// ---------------------------------------------------------------------------
// Canonical cache configurations

struct CanonicalFamily {
  enum class Kind { Central, Concentric, Striped, Checkerboard, FullyDistributed };

  Kind kind = Kind::Central;
  int param = 0;  // ring count for Concentric, stripe width for Striped.

  static CanonicalFamily central() { return {Kind::Central, 0}; }
  static CanonicalFamily concentric(int rings = 2) { return {Kind::Concentric, rings}; }
  static CanonicalFamily striped(int width = 1) { return {Kind::Striped, width}; }
  static CanonicalFamily checkerboard() { return {Kind::Checkerboard, 0}; }
  static CanonicalFamily fully_distributed() { return {Kind::FullyDistributed, 0}; }

  std::string name() const {
    switch (kind) {
      case Kind::Central: return "central";
      case Kind::Concentric: return "concentric";
      case Kind::Striped: return "striped";
      case Kind::Checkerboard: return "checkerboard";
      case Kind::FullyDistributed: return "distributed";
    }
    return "?";
  }

  /// Accepts "central", "concentric[:rings]", "striped[:width]",
  /// "checkerboard", "distributed".
  static CanonicalFamily parse(std::string_view s) {
    auto colon = s.find(':');
    auto head = s.substr(0, colon);
    std::optional<int> arg;
    if (colon != std::string_view::npos) {
      try {
        arg = std::stoi(std::string(s.substr(colon + 1)));
      } catch (const std::exception&) {
        throw Error(ErrorCode::Parse, "bad family parameter in '" + std::string(s) + "'");
      }
    }
    if (head == "central") return central();
    if (head == "concentric") return concentric(arg.value_or(2));
    if (head == "striped") return striped(arg.value_or(1));
    if (head == "checkerboard") return checkerboard();
    if (head == "distributed" || head == "fully-distributed") return fully_distributed();
    throw Error(ErrorCode::Parse, "unknown family '" + std::string(s) + "'");
  }

  static std::vector<CanonicalFamily> all() {
    return {central(), concentric(), striped(), checkerboard(), fully_distributed()};
  }
};

namespace detail {

[[noreturn]] inline void infeasible(const CanonicalFamily& f, const MeshGrid& g, int n,
                                    const std::string& why) {
  throw Error(ErrorCode::Infeasible, f.name() + " cannot host " + std::to_string(n) +
                                         " caches on " + std::to_string(g.width()) + "x" +
                                         std::to_string(g.height()) + ": " + why);
}

inline std::vector<Coord> central_caches(const CanonicalFamily& f, const MeshGrid& g, int n) {
  const int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (s * s != n) infeasible(f, g, n, "cache count is not a perfect square");
  if (s > g.width() || s > g.height()) infeasible(f, g, n, "block does not fit");
  if ((g.width() - s) % 2 != 0 || (g.height() - s) % 2 != 0)
    infeasible(f, g, n, "block cannot be centered exactly");
  const int x0 = (g.width() - s) / 2;
  const int y0 = (g.height() - s) / 2;
  std::vector<Coord> out;
  for (int y = y0; y < y0 + s; ++y)
    for (int x = x0; x < x0 + s; ++x) out.push_back({x, y});
  return out;
}

// Rings are hollow centered squares. Each ring hosts n/(4*rings) caches per
// side, centered on the side and never on a corner; the innermost rings that
// can hold such a segment are used.
inline std::vector<Coord> concentric_caches(const CanonicalFamily& f, const MeshGrid& g, int n) {
  const int rings = f.param;
  if (rings < 1) infeasible(f, g, n, "ring count must be positive");
  if (n % (4 * rings) != 0) infeasible(f, g, n, "caches not divisible by 4*rings");
  if ((g.width() - g.height()) % 2 != 0) infeasible(f, g, n, "no centered square rings");
  const int per_side = n / (4 * rings);
  const int max_side = std::min(g.width(), g.height());
  std::vector<Coord> out;
  int used = 0;
  for (int a = (max_side % 2 == 0 ? 2 : 3); a <= max_side && used < rings; a += 2) {
    const int interior = a - 2;
    if (interior < per_side || (interior - per_side) % 2 != 0) continue;
    const int x0 = (g.width() - a) / 2;
    const int y0 = (g.height() - a) / 2;
    const int off = 1 + (interior - per_side) / 2;
    for (int k = 0; k < per_side; ++k) {
      out.push_back({x0 + off + k, y0});
      out.push_back({x0 + off + k, y0 + a - 1});
      out.push_back({x0, y0 + off + k});
      out.push_back({x0 + a - 1, y0 + off + k});
    }
    ++used;
  }
  if (used < rings) infeasible(f, g, n, "not enough rings can hold the per-side segment");
  return out;
}

// Full-height stripes of the given width, placed symmetrically about the
// vertical center line and rounded toward it.
inline std::vector<Coord> striped_caches(const CanonicalFamily& f, const MeshGrid& g, int n) {
  const int w = f.param;
  if (w < 1) infeasible(f, g, n, "stripe width must be positive");
  if (n % (g.height() * w) != 0) infeasible(f, g, n, "caches do not fill whole stripes");
  const int stripes = n / (g.height() * w);
  if (stripes * w > g.width()) infeasible(f, g, n, "stripes do not fit");
  std::vector<int> lefts;
  const double mid = g.width() / 2.0;
  for (int i = 0; i < stripes; ++i) {
    const double pos = g.width() * (2.0 * i + 1.0) / (2.0 * stripes) - w / 2.0;
    int left = static_cast<int>(std::floor(pos));
    if (pos != std::floor(pos) && pos + w / 2.0 < mid) left = static_cast<int>(std::ceil(pos));
    lefts.push_back(left);
  }
  for (std::size_t i = 0; i < lefts.size(); ++i) {
    if (lefts[i] < 0 || lefts[i] + w > g.width()) infeasible(f, g, n, "stripe out of grid");
    if (i > 0 && lefts[i] < lefts[i - 1] + w) infeasible(f, g, n, "stripes overlap");
  }
  std::vector<Coord> out;
  for (int y = 0; y < g.height(); ++y)
    for (int left : lefts)
      for (int x = left; x < left + w; ++x) out.push_back({x, y});
  return out;
}

// One color class of a checkerboard drawn over a centered a x b region; the
// region's corner tile is always a cache. The most square region whose color
// class holds exactly n tiles wins, wider first.
inline std::vector<Coord> checkerboard_caches(const CanonicalFamily& f, const MeshGrid& g, int n) {
  std::optional<std::pair<int, int>> best;
  for (int a = 1; a <= g.width(); ++a) {
    if ((g.width() - a) % 2 != 0) continue;
    for (int b = 1; b <= g.height(); ++b) {
      if ((g.height() - b) % 2 != 0) continue;
      if ((a * b + 1) / 2 != n) continue;
      if (!best || std::abs(a - b) < std::abs(best->first - best->second) ||
          (std::abs(a - b) == std::abs(best->first - best->second) && a > best->first))
        best = {a, b};
    }
  }
  if (!best) infeasible(f, g, n, "no centered region has a color class of that size");
  const auto [a, b] = *best;
  const int x0 = (g.width() - a) / 2;
  const int y0 = (g.height() - b) / 2;
  std::vector<Coord> out;
  for (int y = y0; y < y0 + b; ++y)
    for (int x = x0; x < x0 + a; ++x)
      if ((x - x0 + y - y0) % 2 == 0) out.push_back({x, y});
  return out;
}

// Rectangular lattice with equal strides; offsets sit at the middle of each
// stride cell (floor for even strides).
inline std::vector<Coord> distributed_caches(const CanonicalFamily& f, const MeshGrid& g, int n) {
  std::optional<std::pair<int, int>> best;  // (columns, rows)
  for (int cols = 1; cols <= n; ++cols) {
    if (n % cols != 0) continue;
    const int rows = n / cols;
    if (cols > g.width() || rows > g.height()) continue;
    if (g.width() % cols != 0 || g.height() % rows != 0) continue;
    const int sx = g.width() / cols;
    const int sy = g.height() / rows;
    if (!best) {
      best = {cols, rows};
      continue;
    }
    const int bsx = g.width() / best->first;
    const int bsy = g.height() / best->second;
    if (std::abs(sx - sy) < std::abs(bsx - bsy) ||
        (std::abs(sx - sy) == std::abs(bsx - bsy) && std::min(sx, sy) > std::min(bsx, bsy)))
      best = {cols, rows};
  }
  if (!best) infeasible(f, g, n, "no lattice divides the grid evenly");
  const int sx = g.width() / best->first;
  const int sy = g.height() / best->second;
  std::vector<Coord> out;
  for (int r = 0; r < best->second; ++r)
    for (int c = 0; c < best->first; ++c) out.push_back({sx / 2 + c * sx, sy / 2 + r * sy});
  return out;
}

}  // namespace detail

/// Deterministic reference placement for one of the canonical cache
/// configurations. Caches are laid out by the family; memory controllers
/// take evenly spaced free perimeter tiles (clockwise from (0,0)); cores fill
/// the free tiles nearest to the cache centroid, ties in row-major order.
inline Placement canonical_placement(const CanonicalFamily& family, const MeshGrid& grid,
                                     int n_cores, int n_caches, int n_mcs) {
  if (n_cores < 0 || n_caches < 0 || n_mcs < 0 || n_cores + n_caches + n_mcs > grid.tiles())
    throw Error(ErrorCode::Infeasible, "counts exceed the " + std::to_string(grid.tiles()) +
                                           " tiles of the grid");
  std::vector<Coord> caches;
  if (n_caches > 0) {
    switch (family.kind) {
      case CanonicalFamily::Kind::Central: caches = detail::central_caches(family, grid, n_caches); break;
      case CanonicalFamily::Kind::Concentric: caches = detail::concentric_caches(family, grid, n_caches); break;
      case CanonicalFamily::Kind::Striped: caches = detail::striped_caches(family, grid, n_caches); break;
      case CanonicalFamily::Kind::Checkerboard: caches = detail::checkerboard_caches(family, grid, n_caches); break;
      case CanonicalFamily::Kind::FullyDistributed: caches = detail::distributed_caches(family, grid, n_caches); break;
    }
  }
  std::vector<NodeKind> tiles(grid.tiles(), NodeKind::RouterOnly);
  for (auto c : caches) tiles[grid.index(c)] = NodeKind::Cache;

  if (n_mcs > 0) {
    std::vector<Coord> ring;
    const int w = grid.width(), h = grid.height();
    for (int x = 0; x < w; ++x) ring.push_back({x, 0});
    for (int y = 1; y < h; ++y) ring.push_back({w - 1, y});
    if (h > 1)
      for (int x = w - 2; x >= 0; --x) ring.push_back({x, h - 1});
    if (w > 1)
      for (int y = h - 2; y >= 1; --y) ring.push_back({0, y});
    std::erase_if(ring, [&](Coord c) { return tiles[grid.index(c)] != NodeKind::RouterOnly; });
    if (static_cast<int>(ring.size()) < n_mcs)
      throw Error(ErrorCode::Infeasible, "not enough free perimeter tiles for memory controllers");
    const double step = static_cast<double>(ring.size()) / n_mcs;
    for (int i = 0; i < n_mcs; ++i) {
      const auto idx = static_cast<std::size_t>(std::floor((i + 0.5) * step));
      tiles[grid.index(ring[idx])] = NodeKind::MemController;
    }
  }

  // Centroid scaled by the cache count keeps the distance comparison exact.
  long sx = 0, sy = 0, scale = 2;
  if (caches.empty()) {
    sx = grid.width() - 1;
    sy = grid.height() - 1;
  } else {
    scale = static_cast<long>(caches.size());
    for (auto c : caches) {
      sx += c.x;
      sy += c.y;
    }
  }
  auto dist = [&](Coord c) { return std::labs(c.x * scale - sx) + std::labs(c.y * scale - sy); };
  std::vector<Coord> free;
  for (int i = 0; i < grid.tiles(); ++i)
    if (tiles[i] == NodeKind::RouterOnly) free.push_back(grid.coord(i));
  if (static_cast<int>(free.size()) < n_cores)
    throw Error(ErrorCode::Infeasible, "not enough free tiles for cores");
  std::stable_sort(free.begin(), free.end(), [&](Coord a, Coord b) { return dist(a) < dist(b); });
  for (int i = 0; i < n_cores; ++i) tiles[grid.index(free[i])] = NodeKind::Core;
  return Placement(grid, std::move(tiles));
}

}  // namespace nocplace
