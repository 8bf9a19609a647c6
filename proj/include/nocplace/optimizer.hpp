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
 * @file optimizer.hpp
 * @brief Placement search: exhaustive enumeration with symmetry pruning, the
 * two-phase decomposition (cores and caches first, memory controllers
 * second) and a seeded swap-neighborhood local search.
 *
 * Every search returns all tied optima, sorted by assignment string.
 * Candidate strings use the text-format characters, so the row-major
 * assignment string doubles as the lexicographic order.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nocplace/latency.hpp"
#include "nocplace/mesh.hpp"
#include "nocplace/placement_io.hpp"
#include "nocplace/traffic.hpp"

namespace nocplace {

struct SearchSpace {
  MeshGrid grid{2, 1};
  KindCounts counts;
  std::map<Coord, NodeKind> fixed;
  // Tiles allowed to hold a memory controller; empty optional means any tile.
  std::optional<std::vector<Coord>> mc_tiles;
  LatencyMode mode = LatencyMode::LowTraffic;
};

struct SearchOptions {
  std::uint64_t budget = 10'000'000;
  bool use_symmetry = true;
  // HighTraffic only: rank candidates by the hop objective first and run the
  // queueing model on the best fraction. Disable for exact results.
  bool prefilter = true;
  double prefilter_fraction = 0.05;
  std::size_t prefilter_min = 100;
  unsigned jobs = 1;
  FixedPointOptions fixed_point;
};

enum class SearchMethod { Exhaustive, TwoPhase, LocalSearch };

inline std::string_view method_name(SearchMethod m) {
  switch (m) {
    case SearchMethod::Exhaustive: return "exhaustive";
    case SearchMethod::TwoPhase: return "two-phase";
    case SearchMethod::LocalSearch: return "local";
  }
  return "?";
}

struct SearchResult {
  std::vector<Placement> best;
  double objective = std::numeric_limits<double>::infinity();
  std::uint64_t evaluated = 0;
  std::uint64_t pruned = 0;
  std::uint64_t prefiltered = 0;
  SearchMethod method = SearchMethod::Exhaustive;
  std::optional<double> phase1_objective;
  std::optional<double> phase2_objective;
};

/// Relative tie tolerance shared by every search.
inline constexpr double kTieTolerance = 1e-9;

inline bool within_tie(double v, double best) {
  return v <= best + kTieTolerance * std::max(1.0, std::abs(best));
}

namespace detail {

inline Placement from_key(const MeshGrid& g, const std::string& key) {
  std::vector<NodeKind> tiles;
  tiles.reserve(key.size());
  for (char c : key) tiles.push_back(*kind_from_char(c));
  return Placement(g, std::move(tiles));
}

/// Free tiles, fixed characters and the multiset of kinds still to place.
struct Layout {
  MeshGrid grid{2, 1};
  std::string base;                 // fixed characters, '?' on free tiles
  std::vector<int> free_tiles;      // row-major
  std::vector<char> mc_allowed;     // per tile
  int cores = 0, caches = 0, mcs = 0;  // remaining to place
};

inline Layout make_layout(const SearchSpace& s) {
  const auto& g = s.grid;
  const auto& n = s.counts;
  if (n.cores < 0 || n.caches < 0 || n.mcs < 0 || n.cores + n.caches + n.mcs > g.tiles())
    throw Error(ErrorCode::Infeasible, "counts do not fit on a " + std::to_string(g.width()) + "x" +
                                           std::to_string(g.height()) + " grid");
  Layout l;
  l.grid = g;
  l.base.assign(static_cast<std::size_t>(g.tiles()), '?');
  l.mc_allowed.assign(static_cast<std::size_t>(g.tiles()), s.mc_tiles ? 0 : 1);
  if (s.mc_tiles)
    for (auto c : *s.mc_tiles) {
      if (!g.contains(c)) throw Error(ErrorCode::OutOfBounds, "memory-controller tile outside grid");
      l.mc_allowed[g.index(c)] = 1;
    }
  KindCounts fixed;
  for (const auto& [c, k] : s.fixed) {
    if (!g.contains(c)) throw Error(ErrorCode::OutOfBounds, "fixed tile outside grid");
    l.base[g.index(c)] = kind_char(k);
    switch (k) {
      case NodeKind::Core: ++fixed.cores; break;
      case NodeKind::Cache: ++fixed.caches; break;
      case NodeKind::MemController:
        ++fixed.mcs;
        if (!l.mc_allowed[g.index(c)])
          throw Error(ErrorCode::Infeasible, "fixed memory controller on a disallowed tile");
        break;
      case NodeKind::RouterOnly: break;
    }
  }
  l.cores = n.cores - fixed.cores;
  l.caches = n.caches - fixed.caches;
  l.mcs = n.mcs - fixed.mcs;
  if (l.cores < 0 || l.caches < 0 || l.mcs < 0)
    throw Error(ErrorCode::Infeasible, "fixed tiles exceed the requested counts");
  int allowed_free = 0;
  for (int i = 0; i < g.tiles(); ++i)
    if (l.base[i] == '?') {
      l.free_tiles.push_back(i);
      allowed_free += l.mc_allowed[i];
    }
  if (l.cores + l.caches + l.mcs > static_cast<int>(l.free_tiles.size()) || l.mcs > allowed_free)
    throw Error(ErrorCode::Infeasible, "not enough free tiles for the requested counts");
  return l;
}

inline BigInt binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

/// Number of distinct assignments of the layout, honoring the
/// memory-controller tile restriction.
inline BigInt layout_count(const Layout& l) {
  int allowed = 0;
  for (int i : l.free_tiles) allowed += l.mc_allowed[i];
  const int f = static_cast<int>(l.free_tiles.size());
  return binomial(allowed, l.mcs) * placement_count(f - l.mcs, l.cores, l.caches, 0);
}

/// Calls fn(key) for every valid assignment in increasing key order.
template <class Fn>
void enumerate(const Layout& l, Fn&& fn) {
  std::string kinds;
  kinds.append(static_cast<std::size_t>(l.cores), kind_char(NodeKind::Core));
  kinds.append(static_cast<std::size_t>(l.caches), kind_char(NodeKind::Cache));
  kinds.append(static_cast<std::size_t>(l.mcs), kind_char(NodeKind::MemController));
  kinds.append(l.free_tiles.size() - kinds.size(), kind_char(NodeKind::RouterOnly));
  std::sort(kinds.begin(), kinds.end());
  const char mc = kind_char(NodeKind::MemController);
  std::string key = l.base;
  do {
    bool ok = true;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      key[l.free_tiles[i]] = kinds[i];
      if (kinds[i] == mc && !l.mc_allowed[l.free_tiles[i]]) ok = false;
    }
    if (ok) fn(key);
  } while (std::next_permutation(kinds.begin(), kinds.end()));
}

/// Symmetries that map the layout onto itself and leave the objective
/// unchanged for the given traffic.
inline std::vector<Symmetry> space_group(const Layout& l, const TrafficSpec& t, LatencyMode mode,
                                         bool use_symmetry) {
  if (!use_symmetry || !t.homogeneous()) return {Symmetry::Identity};
  const auto which =
      mode == LatencyMode::LowTraffic ? SymmetryGroup::Full : SymmetryGroup::XyPreserving;
  std::vector<Symmetry> out;
  for (auto s : symmetry_group(l.grid, which)) {
    bool ok = true;
    for (int i = 0; i < l.grid.tiles() && ok; ++i) {
      const int j = l.grid.index(apply(s, l.grid.coord(i), l.grid));
      ok = l.base[i] == l.base[j] && l.mc_allowed[i] == l.mc_allowed[j];
    }
    if (ok) out.push_back(s);
  }
  return out;
}

/// inverse[s][k] is the tile whose content lands on tile k under s.
inline std::vector<std::vector<int>> inverse_maps(const MeshGrid& g,
                                                  const std::vector<Symmetry>& group) {
  std::vector<std::vector<int>> inv;
  for (auto s : group) {
    if (s == Symmetry::Identity) continue;
    std::vector<int> m(static_cast<std::size_t>(g.tiles()));
    for (int i = 0; i < g.tiles(); ++i) m[g.index(apply(s, g.coord(i), g))] = i;
    inv.push_back(std::move(m));
  }
  return inv;
}

inline bool is_representative(const std::string& key, const std::vector<std::vector<int>>& inv) {
  for (const auto& m : inv) {
    for (std::size_t k = 0; k < key.size(); ++k) {
      const char img = key[m[k]];
      if (img < key[k]) return false;
      if (img > key[k]) break;
    }
  }
  return true;
}

/// Evaluates fn over keys with up to `jobs` threads. Results are indexed by
/// position, so the outcome does not depend on scheduling.
inline std::vector<double> parallel_eval(const std::vector<std::string>& keys, unsigned jobs,
                                         const std::function<double(const std::string&)>& fn) {
  std::vector<double> out(keys.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(keys.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < keys.size(); ++i) out[i] = fn(keys[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i; (i = next.fetch_add(1)) < keys.size();) out[i] = fn(keys[i]);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Running minimum with its tie set.
struct TieSet {
  double value = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, std::string>> keys;

  void offer(double v, const std::string& key) {
    if (!std::isfinite(v)) return;
    if (v < value) {
      value = v;
      std::erase_if(keys, [&](const auto& e) { return !within_tie(e.first, value); });
    }
    if (within_tie(v, value)) keys.emplace_back(v, key);
  }
};

inline double evaluate(const Placement& p, const TrafficSpec& t, LatencyMode mode,
                       const FixedPointOptions& fp,
                       double LatencyReport::*field = &LatencyReport::objective) {
  try {
    return objective(p, t, mode, fp).*field;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Unstable || e.code() == ErrorCode::NonConvergent)
      return std::numeric_limits<double>::infinity();
    throw;
  }
}

struct CoreSearch {
  TieSet ties;
  std::vector<Symmetry> group;
  std::uint64_t evaluated = 0;
  std::uint64_t pruned = 0;
  std::uint64_t prefiltered = 0;
};

/// Exhaustive search over one layout with a caller-chosen score.
/// `accept` filters candidates before scoring.
inline CoreSearch search_layout(const Layout& l, const TrafficSpec& t, LatencyMode mode,
                                const SearchOptions& opt,
                                double LatencyReport::*field,
                                const std::function<bool(const std::string&)>& accept = {}) {
  CoreSearch r;
  r.group = space_group(l, t, mode, opt.use_symmetry);
  const BigInt raw = layout_count(l);
  const BigInt estimate = (raw + r.group.size() - 1) / r.group.size();
  if (estimate > opt.budget)
    throw Error(ErrorCode::BudgetExceeded,
                raw.str() + " configurations (about " + estimate.str() +
                    " after symmetry pruning) exceed the budget of " +
                    std::to_string(opt.budget) +
                    "; use the two-phase or local search method, or raise the budget");
  const auto inv = inverse_maps(l.grid, r.group);
  const bool high = mode == LatencyMode::HighTraffic;

  auto score = [&](LatencyMode m) {
    return [&, m](const std::string& key) {
      return evaluate(from_key(l.grid, key), t, m, opt.fixed_point, field);
    };
  };

  std::vector<std::string> chunk;
  std::vector<std::string> stored;  // HighTraffic keeps every representative
  constexpr std::size_t kChunk = 4096;
  auto flush = [&] {
    const auto vals = parallel_eval(chunk, opt.jobs, score(LatencyMode::LowTraffic));
    for (std::size_t i = 0; i < chunk.size(); ++i) r.ties.offer(vals[i], chunk[i]);
    r.evaluated += chunk.size();
    chunk.clear();
  };

  std::uint64_t seen = 0;
  enumerate(l, [&](const std::string& key) {
    ++seen;
    if (accept && !accept(key)) return;
    if (!is_representative(key, inv)) {
      ++r.pruned;
      return;
    }
    if (high) {
      stored.push_back(key);
    } else {
      chunk.push_back(key);
      if (chunk.size() == kChunk) flush();
    }
  });
  if (!high) {
    if (!chunk.empty()) flush();
    return r;
  }

  std::vector<std::string> candidates;
  if (opt.prefilter) {
    const std::size_t keep = std::max<std::size_t>(
        opt.prefilter_min,
        static_cast<std::size_t>(std::ceil(opt.prefilter_fraction * stored.size())));
    if (keep < stored.size()) {
      const auto low = parallel_eval(stored, opt.jobs, score(LatencyMode::LowTraffic));
      std::vector<std::size_t> order(stored.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return low[a] < low[b]; });
      const double cutoff = low[order[keep - 1]];
      for (auto i : order)
        if (low[i] <= cutoff) candidates.push_back(stored[i]);
      std::sort(candidates.begin(), candidates.end());
      r.prefiltered = stored.size() - candidates.size();
    }
  }
  if (candidates.empty() && r.prefiltered == 0) candidates = std::move(stored);
  const auto vals = parallel_eval(candidates, opt.jobs, score(LatencyMode::HighTraffic));
  for (std::size_t i = 0; i < candidates.size(); ++i) r.ties.offer(vals[i], candidates[i]);
  r.evaluated += candidates.size();
  return r;
}

/// Tied representatives expanded to their distinct orbit members, sorted.
inline std::vector<Placement> expand(const MeshGrid& g, const CoreSearch& r) {
  std::set<std::string> keys;
  for (const auto& [v, key] : r.ties.keys) {
    const auto p = from_key(g, key);
    for (auto s : r.group) keys.insert(apply(s, p).key());
  }
  std::vector<Placement> out;
  for (const auto& k : keys) out.push_back(from_key(g, k));
  return out;
}

}  // namespace detail

/// Exact number of assignments in the space.
inline BigInt search_space_size(const SearchSpace& s) {
  return detail::layout_count(detail::make_layout(s));
}

inline SearchResult exhaustive_search(const SearchSpace& s, const TrafficSpec& t,
                                      const SearchOptions& opt = {}) {
  const auto layout = detail::make_layout(s);
  auto r = detail::search_layout(layout, t, s.mode, opt, &LatencyReport::objective);
  if (r.ties.keys.empty())
    throw Error(ErrorCode::Unstable, "every candidate placement is unstable at this load");
  SearchResult out;
  out.best = detail::expand(s.grid, r);
  out.objective = r.ties.value;
  out.evaluated = r.evaluated;
  out.pruned = r.pruned;
  out.prefiltered = r.prefiltered;
  out.method = SearchMethod::Exhaustive;
  return out;
}

/// Phase 1 places cores and caches by the cache-access term alone; phase 2
/// places the remaining memory controllers by the memory term for every
/// phase-1 winner. Remaining ties are broken by the full objective.
inline SearchResult two_phase_optimize(const SearchSpace& s, const TrafficSpec& t,
                                       const SearchOptions& opt = {}) {
  const auto full = detail::make_layout(s);
  SearchSpace s1 = s;
  s1.counts.mcs = s.counts.mcs - full.mcs;  // fixed controllers only
  const auto l1 = detail::make_layout(s1);

  // Leave enough allowed tiles for the controllers phase 2 still has to place.
  std::function<bool(const std::string&)> leaves_room;
  if (s.mc_tiles && full.mcs > 0)
    leaves_room = [&](const std::string& key) {
      int room = 0;
      for (int i : l1.free_tiles)
        room += l1.mc_allowed[i] && key[i] == kind_char(NodeKind::RouterOnly);
      return room >= full.mcs;
    };
  auto p1 = detail::search_layout(l1, t, s.mode, opt, &LatencyReport::l2_sum, leaves_room);
  if (p1.ties.keys.empty())
    throw Error(ErrorCode::Unstable, "every phase-1 placement is unstable at this load");

  SearchResult out;
  out.method = SearchMethod::TwoPhase;
  out.phase1_objective = p1.ties.value;
  out.evaluated = p1.evaluated;
  out.pruned = p1.pruned;
  out.prefiltered = p1.prefiltered;

  // Phase 2 for every phase-1 winner; candidates ranked by (memory term, full objective).
  std::vector<std::pair<double, Placement>> phase2;
  double best_mem = std::numeric_limits<double>::infinity();
  for (const auto& winner : detail::expand(s.grid, p1)) {
    SearchSpace s2 = s;
    s2.fixed.clear();
    for (int i = 0; i < s.grid.tiles(); ++i) {
      const auto k = winner.tiles()[i];
      if (k != NodeKind::RouterOnly) s2.fixed[s.grid.coord(i)] = k;
    }
    const auto l2 = detail::make_layout(s2);
    auto r2 = detail::search_layout(l2, t, s.mode, opt, &LatencyReport::mem_sum);
    out.evaluated += r2.evaluated;
    out.pruned += r2.pruned;
    out.prefiltered += r2.prefiltered;
    if (r2.ties.keys.empty()) continue;
    if (r2.ties.value < best_mem) {
      best_mem = r2.ties.value;
      std::erase_if(phase2, [&](const auto& e) { return !within_tie(e.first, best_mem); });
    }
    if (!within_tie(r2.ties.value, best_mem)) continue;
    for (auto& p : detail::expand(s.grid, r2)) phase2.emplace_back(r2.ties.value, std::move(p));
  }
  if (phase2.empty())
    throw Error(ErrorCode::Unstable, "every phase-2 placement is unstable at this load");
  out.phase2_objective = best_mem;

  detail::TieSet final_ties;
  std::map<std::string, Placement> by_key;
  for (auto& [mem, p] : phase2) {
    const auto key = p.key();
    if (by_key.count(key)) continue;
    final_ties.offer(detail::evaluate(p, t, s.mode, opt.fixed_point), key);
    by_key.emplace(key, std::move(p));
  }
  if (final_ties.keys.empty())
    throw Error(ErrorCode::Unstable, "every combined placement is unstable at this load");
  out.objective = final_ties.value;
  std::set<std::string> keys;
  for (const auto& [v, k] : final_ties.keys) keys.insert(k);
  for (const auto& k : keys) out.best.push_back(by_key.at(k));
  return out;
}

namespace detail {

inline std::string random_assignment(const Layout& l, std::mt19937_64& rng) {
  std::string key = l.base;
  std::vector<int> allowed, others;
  for (int i : l.free_tiles) (l.mc_allowed[i] ? allowed : others).push_back(i);
  std::shuffle(allowed.begin(), allowed.end(), rng);
  for (int k = 0; k < l.mcs; ++k) key[allowed[k]] = kind_char(NodeKind::MemController);
  std::vector<int> rest(others);
  rest.insert(rest.end(), allowed.begin() + l.mcs, allowed.end());
  std::sort(rest.begin(), rest.end());
  std::shuffle(rest.begin(), rest.end(), rng);
  std::size_t at = 0;
  for (int k = 0; k < l.cores; ++k) key[rest[at++]] = kind_char(NodeKind::Core);
  for (int k = 0; k < l.caches; ++k) key[rest[at++]] = kind_char(NodeKind::Cache);
  while (at < rest.size()) key[rest[at++]] = kind_char(NodeKind::RouterOnly);
  return key;
}

inline bool fits_layout(const Layout& l, const std::string& key) {
  for (int i = 0; i < l.grid.tiles(); ++i) {
    if (l.base[i] != '?' && l.base[i] != key[i]) return false;
    if (key[i] == kind_char(NodeKind::MemController) && !l.mc_allowed[i]) return false;
  }
  return true;
}

}  // namespace detail

/// Steepest descent over pairwise swaps of differing kinds, restarted from
/// seeded random placements until `budget` neighbor evaluations are spent.
/// The first descent starts from the Central canonical placement whenever it
/// is compatible with the space.
inline SearchResult local_search(const SearchSpace& s, const TrafficSpec& t, std::uint64_t seed,
                                 std::uint64_t budget, const SearchOptions& opt = {}) {
  const auto l = detail::make_layout(s);
  const auto& g = s.grid;
  std::mt19937_64 rng(seed);

  std::string start;
  try {
    const auto c = canonical_placement(CanonicalFamily::central(), g, s.counts.cores,
                                       s.counts.caches, s.counts.mcs);
    if (detail::fits_layout(l, c.key())) start = c.key();
  } catch (const Error&) {
  }
  if (start.empty()) start = detail::random_assignment(l, rng);

  auto eval = [&](const std::string& key) {
    return detail::evaluate(detail::from_key(g, key), t, s.mode, opt.fixed_point);
  };

  SearchResult out;
  out.method = SearchMethod::LocalSearch;
  detail::TieSet ties;
  std::uint64_t spent = 0;

  std::vector<std::pair<int, int>> moves;
  for (std::size_t a = 0; a < l.free_tiles.size(); ++a)
    for (std::size_t b = a + 1; b < l.free_tiles.size(); ++b)
      moves.emplace_back(l.free_tiles[a], l.free_tiles[b]);

  std::string current = start;
  double value = eval(current);
  ++out.evaluated;
  ties.offer(value, current);
  while (true) {
    // One steepest-descent run from `current`.
    bool improved = true;
    while (improved && spent < budget) {
      improved = false;
      std::string best_key;
      double best_val = value;
      for (auto [a, b] : moves) {
        if (current[a] == current[b]) continue;
        std::string cand = current;
        std::swap(cand[a], cand[b]);
        if (!detail::fits_layout(l, cand)) continue;
        if (spent >= budget) break;
        ++spent;
        const double v = eval(cand);
        if (v < best_val && !within_tie(best_val, v)) {
          best_val = v;
          best_key = std::move(cand);
        }
      }
      if (!best_key.empty()) {
        current = std::move(best_key);
        value = best_val;
        improved = true;
        ties.offer(value, current);
      }
    }
    if (spent >= budget || moves.empty()) break;
    current = detail::random_assignment(l, rng);
    value = eval(current);
    ++spent;
    ties.offer(value, current);
  }
  out.evaluated += spent;

  if (ties.keys.empty()) {
    // Nothing stable was found; report the start as is.
    out.best.push_back(detail::from_key(g, start));
    return out;
  }
  out.objective = ties.value;
  std::set<std::string> keys;
  for (const auto& [v, k] : ties.keys) keys.insert(k);
  for (const auto& k : keys) out.best.push_back(detail::from_key(g, k));
  return out;
}

inline nlohmann::json to_json(const SearchResult& r) {
  nlohmann::json best = nlohmann::json::array();
  for (const auto& p : r.best) best.push_back(to_json(p));
  nlohmann::json j{{"method", method_name(r.method)},
                   {"objective", std::isfinite(r.objective) ? nlohmann::json(r.objective)
                                                            : nlohmann::json(nullptr)},
                   {"evaluated", r.evaluated},
                   {"pruned_by_symmetry", r.pruned},
                   {"prefiltered", r.prefiltered},
                   {"best", std::move(best)}};
  if (r.phase1_objective) j["phase1_objective"] = *r.phase1_objective;
  if (r.phase2_objective) j["phase2_objective"] = *r.phase2_objective;
  return j;
}

}  // namespace nocplace
