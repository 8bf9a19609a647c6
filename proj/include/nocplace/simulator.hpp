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
 * @file simulator.hpp
 * @brief Message-level discrete-event simulation of the mesh.
 *
 * Every router has five FIFO input channels with unbounded buffers. The
 * message at the head of an input channel waits until its XY output port is
 * free, then holds both the input channel and the output port for
 * length/mu time units, after which it sits in the input channel of the next
 * router (or leaves the network through the Local port). Competing heads are
 * served oldest arrival first, lower port index on ties. A message therefore
 * spends exactly length/mu per router at zero load and the end-to-end latency
 * is (hops + 1) length / mu.
 *
 * Message lengths are max(1, round(X)) with X exponential; the exact mean and
 * squared coefficient of variation of that distribution are available from
 * message_length_moments() for feeding the analytical model.
 */

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "nocplace/mesh.hpp"
#include "nocplace/queueing.hpp"
#include "nocplace/routing.hpp"
#include "nocplace/traffic.hpp"

namespace nocplace {

enum class Switching { VirtualCutThrough };

struct SimConfig {
  Placement placement{MeshGrid(2, 1), {NodeKind::Core, NodeKind::Cache}};
  TrafficSpec traffic;
  double mean_message_size = 10.0;  // mean of the exponential before rounding
  double mu = 1.0;                  // packets per time unit at every router
  std::uint64_t messages = 100'000;
  double warmup = 0.1;
  std::uint64_t seed = 1;
  Switching switching = Switching::VirtualCutThrough;
  // Keep simulating after the last generation until the network is empty.
  bool drain = true;
  // Trend test: the second half of the measured messages must be this much
  // slower than the first half, and significantly so, to flag saturation.
  double saturation_ratio = 1.2;
  double saturation_z = 3.0;
  int batches = 20;
};

struct ChannelStats {
  std::uint64_t arrivals = 0;   // in the measurement window
  double arrival_rate = 0;      // arrivals per time unit
  double mean_service = 0;      // mean holding time of window arrivals
  double utilization = 0;       // busy fraction of the window
  double throughput = 0;        // departures per time unit
  double mean_number = 0;       // time-average messages in the channel
  double mean_waiting = 0;      // time-average messages waiting for service
  double mean_response = 0;     // arrival to departure, window arrivals
  double little_residual = 0;   // |N - lambda T| / N
};

struct FlowStats {
  std::uint64_t count = 0;
  double mean_latency = 0;
};

struct SimStats {
  MeshGrid grid{2, 1};
  std::vector<ChannelStats> channels;  // router index * kPorts + port
  std::map<std::pair<Coord, Coord>, FlowStats> flows;
  double mean_latency = 0;
  double ci95 = 0;
  bool saturated = false;
  double trend_ratio = 1;
  std::uint64_t generated = 0;
  std::uint64_t completed = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t measured = 0;
  double window_start = 0;
  double window_end = 0;
  double end_time = 0;

  const ChannelStats& channel(Coord router, Port p) const {
    return channels[static_cast<std::size_t>(grid.index(router) * kPorts + port_index(p))];
  }

  /// Arrival-weighted mean response time over the router's input channels.
  double router_response(Coord router) const {
    double num = 0, den = 0;
    for (auto p : kAllPorts) {
      const auto& c = channel(router, p);
      num += c.arrival_rate * c.mean_response;
      den += c.arrival_rate;
    }
    return den > 0 ? num / den : 0.0;
  }
};

struct LengthMoments {
  double mean = 0;
  double scv = 0;
};

/// Exact mean and squared coefficient of variation of max(1, round(X)),
/// X exponential with the given mean.
inline LengthMoments message_length_moments(double mean) {
  if (!(mean > 0)) throw Error(ErrorCode::InvalidConfig, "message size mean must be positive");
  double m1 = 0, m2 = 0;
  auto tail = [&](double x) { return std::exp(-x / mean); };  // P(X > x)
  const double p1 = 1.0 - tail(1.5);
  m1 += p1;
  m2 += p1;
  for (int k = 2;; ++k) {
    const double pk = tail(k - 0.5) - tail(k + 0.5);
    m1 += pk * k;
    m2 += pk * k * static_cast<double>(k);
    if (tail(k + 0.5) * (k + 1.0) * (k + 1.0) < 1e-18 && k > 10) break;
  }
  return {m1, m2 / (m1 * m1) - 1.0};
}

/// Two-sided 95% Student-t quantile with df degrees of freedom.
inline double t95(int df) {
  if (df < 1) return std::numeric_limits<double>::quiet_NaN();
  boost::math::students_t dist(df);
  return boost::math::quantile(boost::math::complement(dist, 0.025));
}

namespace detail {

class Simulation {
 public:
  explicit Simulation(const SimConfig& c) : c_(c), g_(c.placement.grid()), rng_(c.seed) {
    if (c.messages < 2) throw Error(ErrorCode::InvalidConfig, "message budget must be at least 2");
    if (!(c.mu > 0)) throw Error(ErrorCode::InvalidConfig, "service rate mu must be positive");
    if (!(c.warmup >= 0 && c.warmup < 1))
      throw Error(ErrorCode::InvalidConfig, "warmup fraction must lie in [0,1)");
    if (!(c.mean_message_size > 0))
      throw Error(ErrorCode::InvalidConfig, "mean message size must be positive");
    if (c.batches < 2) throw Error(ErrorCode::InvalidConfig, "need at least two batches");

    auto t = c.traffic;
    t.model_replies = false;  // replies are spawned on delivery instead
    std::map<Coord, Source> by_src;
    for (const auto& f : build_flows(c.placement, t)) {
      auto& s = by_src[f.src];
      s.at = f.src;
      s.rate += f.rate;
      s.dst.push_back(f.dst);
      s.cum.push_back(s.rate);
    }
    for (auto& [at, s] : by_src) sources_.push_back(std::move(s));
    if (sources_.empty()) throw Error(ErrorCode::InvalidConfig, "workload generates no traffic");

    chans_.resize(static_cast<std::size_t>(g_.tiles() * kPorts));
    out_busy_.assign(chans_.size(), false);
    warm_index_ = static_cast<std::uint64_t>(std::floor(c.warmup * static_cast<double>(c.messages)));
  }

  SimStats run() {
    for (std::size_t s = 0; s < sources_.size(); ++s) schedule_generation(s, 0.0);
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      if (!c_.drain && generated_ >= c_.messages && e.time > window_end_) break;
      now_ = e.time;
      if (e.kind == Event::Generate) generate(e.a);
      else finish(e.a, e.b);
    }
    return collect();
  }

 private:
  struct Source {
    Coord at;
    double rate = 0;
    std::vector<Coord> dst;
    std::vector<double> cum;
  };

  struct Message {
    Coord src, dst;
    double service = 0;
    double generated = 0;
    double arrived = 0;  // at the current input channel
    std::uint64_t index = 0;
    bool measured = false;
    bool reply = false;
  };

  struct Channel {
    std::deque<std::uint32_t> queue;  // front is in service when busy
    bool busy = false;
    int n = 0;
    double last = 0, area_n = 0, area_busy = 0, area_wait = 0;
    std::uint64_t arrivals = 0, departures = 0;
    double sum_rt = 0, sum_service = 0;
    std::uint64_t rt_count = 0;
  };

  struct Event {
    enum Kind : std::uint8_t { Generate, Finish };
    double time;
    std::uint64_t seq;
    Kind kind;
    std::size_t a;  // source, or channel
    std::size_t b;  // output port slot for Finish
    bool operator>(const Event& o) const {
      return time != o.time ? time > o.time : seq > o.seq;
    }
  };

  void push(double time, Event::Kind k, std::size_t a, std::size_t b = 0) {
    events_.push({time, seq_++, k, a, b});
  }

  void schedule_generation(std::size_t s, double from) {
    std::exponential_distribution<double> gap(sources_[s].rate);
    push(from + gap(rng_), Event::Generate, s);
  }

  double draw_service() {
    std::exponential_distribution<double> size(1.0 / c_.mean_message_size);
    const double len = std::max(1.0, std::round(size(rng_)));
    return len / c_.mu;
  }

  void generate(std::size_t s) {
    if (generated_ >= c_.messages) return;
    const auto& src = sources_[s];
    std::uniform_real_distribution<double> u(0.0, src.rate);
    const double pick = u(rng_);
    const auto it = std::upper_bound(src.cum.begin(), src.cum.end(), pick);
    const std::size_t d = std::min<std::size_t>(it - src.cum.begin(), src.dst.size() - 1);

    Message m;
    m.src = src.at;
    m.dst = src.dst[d];
    m.service = draw_service();
    m.generated = now_;
    m.index = generated_++;
    if (m.index == warm_index_) open_window();
    m.measured = m.index >= warm_index_;
    if (m.measured) ++measured_total_;
    msgs_.push_back(m);
    if (generated_ == c_.messages) close_window();
    else schedule_generation(s, now_);
    enter(static_cast<std::uint32_t>(msgs_.size() - 1), src.at, Port::Local);
  }

  std::size_t chan(Coord r, Port p) const {
    return static_cast<std::size_t>(g_.index(r) * kPorts + port_index(p));
  }

  static Port next_port(Coord at, Coord dst) {
    if (at.x < dst.x) return Port::East;
    if (at.x > dst.x) return Port::West;
    if (at.y < dst.y) return Port::South;
    if (at.y > dst.y) return Port::North;
    return Port::Local;
  }

  void touch(Channel& ch) {
    if (!window_open_ || window_closed_) return;
    const double dt = now_ - ch.last;
    ch.area_n += ch.n * dt;
    ch.area_busy += (ch.busy ? 1.0 : 0.0) * dt;
    ch.area_wait += (ch.n - (ch.busy ? 1 : 0)) * dt;
    ch.last = now_;
  }

  void open_window() {
    window_open_ = true;
    window_start_ = now_;
    for (auto& ch : chans_) ch.last = now_;
  }

  void close_window() {
    for (auto& ch : chans_) touch(ch);
    window_closed_ = true;
    window_end_ = now_;
  }

  bool in_window() const { return window_open_ && !window_closed_; }

  void enter(std::uint32_t id, Coord router, Port in) {
    auto& m = msgs_[id];
    m.arrived = now_;
    auto& ch = chans_[chan(router, in)];
    touch(ch);
    ch.queue.push_back(id);
    ++ch.n;
    if (in_window()) ++ch.arrivals;
    if (!ch.busy && ch.queue.size() == 1) try_output(router, next_port(router, m.dst));
  }

  /// Grants output `out` of `router` to the oldest waiting head, if free.
  void try_output(Coord router, Port out) {
    const std::size_t o = chan(router, out);
    if (out_busy_[o]) return;
    int winner = -1;
    double oldest = std::numeric_limits<double>::infinity();
    for (auto in : kAllPorts) {
      const auto& ch = chans_[chan(router, in)];
      if (ch.busy || ch.queue.empty()) continue;
      const auto& m = msgs_[ch.queue.front()];
      if (next_port(router, m.dst) != out) continue;
      if (m.arrived < oldest) {
        oldest = m.arrived;
        winner = port_index(in);
      }
    }
    if (winner < 0) return;
    const std::size_t ic = chan(router, static_cast<Port>(winner));
    auto& ch = chans_[ic];
    touch(ch);
    ch.busy = true;
    out_busy_[o] = true;
    push(now_ + msgs_[ch.queue.front()].service, Event::Finish, ic, o);
  }

  void finish(std::size_t ic, std::size_t o) {
    const Coord router = g_.coord(static_cast<int>(ic / kPorts));
    const Port out = static_cast<Port>(o % kPorts);
    auto& ch = chans_[ic];
    touch(ch);
    const std::uint32_t id = ch.queue.front();
    ch.queue.pop_front();
    ch.busy = false;
    --ch.n;
    out_busy_[o] = false;
    auto& m = msgs_[id];
    if (m.arrived >= window_start_ && window_open_ &&
        (!window_closed_ || m.arrived <= window_end_)) {
      ch.sum_rt += now_ - m.arrived;
      ch.sum_service += m.service;
      ++ch.rt_count;
    }
    if (in_window()) ++ch.departures;

    if (out == Port::Local) deliver(id);
    else enter(id, step(router, out), facing(out));

    // The freed input's new head and the freed output may both start now.
    if (!ch.queue.empty()) try_output(router, next_port(router, msgs_[ch.queue.front()].dst));
    try_output(router, out);
  }

  void deliver(std::uint32_t id) {
    ++completed_;
    const auto m = msgs_[id];
    if (m.measured) {
      const double lat = now_ - m.generated;
      latencies_.emplace_back(m.index, lat);
      auto& f = flow_sum_[{m.src, m.dst}];
      f.first += lat;
      ++f.second;
    }
    if (c_.traffic.model_replies && !m.reply) {
      Message r;
      r.src = m.dst;
      r.dst = m.src;
      r.service = draw_service();
      r.generated = now_;
      r.index = m.index;
      r.measured = m.measured;
      r.reply = true;
      msgs_.push_back(r);
      ++replies_;
      enter(static_cast<std::uint32_t>(msgs_.size() - 1), r.src, Port::Local);
    }
  }

  SimStats collect() {
    SimStats s;
    s.grid = g_;
    s.generated = generated_ + replies_;
    s.completed = completed_;
    s.in_flight = s.generated - s.completed;
    s.window_start = window_start_;
    s.window_end = window_end_;
    s.end_time = now_;
    const double span = window_end_ - window_start_;
    s.channels.resize(chans_.size());
    for (std::size_t i = 0; i < chans_.size(); ++i) {
      const auto& ch = chans_[i];
      auto& o = s.channels[i];
      o.arrivals = ch.arrivals;
      if (span > 0) {
        o.arrival_rate = ch.arrivals / span;
        o.throughput = ch.departures / span;
        o.utilization = ch.area_busy / span;
        o.mean_number = ch.area_n / span;
        o.mean_waiting = ch.area_wait / span;
      }
      if (ch.rt_count > 0) {
        o.mean_response = ch.sum_rt / static_cast<double>(ch.rt_count);
        o.mean_service = ch.sum_service / static_cast<double>(ch.rt_count);
      }
      if (o.mean_number > 0)
        o.little_residual =
            std::abs(o.mean_number - o.arrival_rate * o.mean_response) / o.mean_number;
    }
    for (const auto& [k, v] : flow_sum_) s.flows[k] = {v.second, v.first / v.second};

    std::sort(latencies_.begin(), latencies_.end());
    s.measured = latencies_.size();
    if (latencies_.empty()) return s;
    double total = 0;
    for (const auto& [idx, lat] : latencies_) total += lat;
    s.mean_latency = total / static_cast<double>(latencies_.size());

    // Batch means over generation order.
    const int nb = c_.batches;
    if (static_cast<int>(latencies_.size()) >= nb) {
      std::vector<double> sum(nb, 0.0), cnt(nb, 0.0);
      const std::size_t n = latencies_.size();
      for (std::size_t i = 0; i < n; ++i) {
        const auto b = static_cast<std::size_t>(i * nb / n);
        sum[b] += latencies_[i].second;
        cnt[b] += 1;
      }
      std::vector<double> means(nb);
      for (int b = 0; b < nb; ++b) means[b] = sum[b] / cnt[b];
      auto stats = [](const double* v, int k) {
        double m = 0, ss = 0;
        for (int i = 0; i < k; ++i) m += v[i];
        m /= k;
        for (int i = 0; i < k; ++i) ss += (v[i] - m) * (v[i] - m);
        return std::pair{m, ss / (k - 1)};
      };
      const auto [m_all, var_all] = stats(means.data(), nb);
      s.ci95 = t95(nb - 1) * std::sqrt(var_all / nb);

      const int h = nb / 2;
      const auto [m1, v1] = stats(means.data(), h);
      const auto [m2, v2] = stats(means.data() + h, nb - h);
      s.trend_ratio = m2 / m1;
      const double se = std::sqrt(v1 / h + v2 / (nb - h));
      s.saturated = s.trend_ratio > c_.saturation_ratio && (m2 - m1) > c_.saturation_z * se;
    }
    return s;
  }

  const SimConfig& c_;
  MeshGrid g_;
  std::mt19937_64 rng_;
  std::vector<Source> sources_;
  std::vector<Channel> chans_;
  std::vector<bool> out_busy_;
  std::vector<Message> msgs_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  double now_ = 0;
  std::uint64_t generated_ = 0, completed_ = 0, replies_ = 0, measured_total_ = 0;
  std::uint64_t warm_index_ = 0;
  bool window_open_ = false, window_closed_ = false;
  double window_start_ = 0, window_end_ = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::uint64_t, double>> latencies_;
  std::map<std::pair<Coord, Coord>, std::pair<double, std::uint64_t>> flow_sum_;
};

}  // namespace detail

inline SimStats run_sim(const SimConfig& c) { return detail::Simulation(c).run(); }

// ---------------------------------------------------------------------------
// Sweeps

struct NamedPlacement {
  std::string name;
  Placement placement;
};

struct SweepRow {
  std::string family;
  double lambda_g = 0;
  std::uint64_t seed = 0;
  double mean_latency = 0;
  double ci95 = 0;
  bool saturated = false;
};

/// Per (placement, rate) aggregate across seeds.
struct SweepCell {
  std::string family;
  double lambda_g = 0;
  double mean_latency = 0;
  double ci95 = 0;  // Student-t across seeds
  int seeds = 0;
  int saturated_runs = 0;
  bool saturated() const { return 2 * saturated_runs > seeds; }
};

/// Runs every (placement, rate, seed) combination. Seed k of every cell is
/// base.seed + k, so all placements see the same random streams. Results do
/// not depend on `jobs`.
inline std::vector<SweepRow> sweep_latency(const std::vector<NamedPlacement>& placements,
                                           const std::vector<double>& rates,
                                           const SimConfig& base, int seeds, unsigned jobs = 1) {
  if (seeds < 1) throw Error(ErrorCode::InvalidConfig, "need at least one seed per cell");
  if (placements.empty() || rates.empty())
    throw Error(ErrorCode::InvalidConfig, "sweep needs placements and rates");
  for (const auto& p : placements)
    if (!(p.placement.grid() == placements.front().placement.grid()))
      throw Error(ErrorCode::InvalidConfig, "all swept placements must share one grid");

  struct Task {
    std::size_t p, r;
    int k;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < placements.size(); ++p)
    for (std::size_t r = 0; r < rates.size(); ++r)
      for (int k = 0; k < seeds; ++k) tasks.push_back({p, r, k});

  std::vector<SweepRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&](std::exception_ptr& err) {
    try {
      for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
        const auto& t = tasks[i];
        SimConfig c = base;
        c.placement = placements[t.p].placement;
        c.traffic.lambda_g = rates[t.r];
        c.seed = base.seed + static_cast<std::uint64_t>(t.k);
        const auto s = run_sim(c);
        rows[i] = {placements[t.p].name, rates[t.r], c.seed, s.mean_latency, s.ci95, s.saturated};
      }
    } catch (...) {
      err = std::current_exception();
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  std::vector<std::exception_ptr> errors(n);
  if (n == 1) {
    work(errors[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work, std::ref(errors[w]));
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

inline std::vector<SweepCell> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::vector<SweepCell> cells;
  std::map<std::pair<std::string, double>, std::vector<const SweepRow*>> groups;
  std::vector<std::pair<std::string, double>> order;
  for (const auto& r : rows) {
    auto key = std::pair{r.family, r.lambda_g};
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  for (const auto& key : order) {
    const auto& g = groups[key];
    SweepCell c{key.first, key.second};
    c.seeds = static_cast<int>(g.size());
    double m = 0;
    for (auto* r : g) {
      m += r->mean_latency;
      c.saturated_runs += r->saturated;
    }
    m /= c.seeds;
    c.mean_latency = m;
    if (c.seeds > 1) {
      double ss = 0;
      for (auto* r : g) ss += (r->mean_latency - m) * (r->mean_latency - m);
      c.ci95 = t95(c.seeds - 1) * std::sqrt(ss / (c.seeds - 1) / c.seeds);
    }
    cells.push_back(c);
  }
  return cells;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "family,lambda_g,seed,mean_latency,ci95,saturated\n";
  for (const auto& r : rows)
    os << r.family << ',' << r.lambda_g << ',' << r.seed << ',' << r.mean_latency << ','
       << r.ci95 << ',' << (r.saturated ? 1 : 0) << '\n';
  return os.str();
}

inline std::string sweep_summary_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream os;
  os.precision(10);
  os << "family,lambda_g,mean_interarrival,mean_latency,ci95,seeds,saturated_runs\n";
  for (const auto& c : cells)
    os << c.family << ',' << c.lambda_g << ',' << (c.lambda_g > 0 ? 1.0 / c.lambda_g : 0.0) << ','
       << c.mean_latency << ',' << c.ci95 << ',' << c.seeds << ',' << c.saturated_runs << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// Simulation versus the analytical model

struct ChannelComparison {
  Coord router;
  Port port = Port::Local;
  double lambda_model = 0;
  double lambda_sim = 0;
  double rt_sim = 0;
  double rt_model = std::numeric_limits<double>::quiet_NaN();
  double rel_error = std::numeric_limits<double>::quiet_NaN();
};

struct Comparison {
  std::vector<ChannelComparison> channels;
  bool analytical_available = true;
  std::string analytical_error;
  double max_rel_error = std::numeric_limits<double>::quiet_NaN();
  double mean_rel_error = std::numeric_limits<double>::quiet_NaN();
  SimStats sim;
};

/// The analytical traffic uses the simulator's service moments:
/// E{S} = E[length]/mu and Cs2 of the rounded length distribution.
inline TrafficSpec analytical_traffic(const SimConfig& c) {
  auto t = c.traffic;
  const auto lm = message_length_moments(c.mean_message_size);
  t.svc.mean_service = lm.mean / c.mu;
  t.svc.cs2 = lm.scv;
  return t;
}

inline Comparison compare_to_analytical(const SimConfig& c, const FixedPointOptions& fp = {}) {
  Comparison out;
  out.sim = run_sim(c);
  std::optional<InspectorResult> model;
  try {
    model.emplace(packet_delay_inspector(c.placement, analytical_traffic(c), fp));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unstable && e.code() != ErrorCode::NonConvergent) throw;
    out.analytical_available = false;
    out.analytical_error = e.what();
  }
  const auto& g = c.placement.grid();
  double sum = 0, mx = 0;
  int n = 0;
  for (int i = 0; i < g.tiles(); ++i) {
    const Coord r = g.coord(i);
    for (auto p : kAllPorts) {
      const auto& sc = out.sim.channel(r, p);
      const double lm = model ? model->router(r).lambda(p) : 0.0;
      if (sc.arrivals == 0 && lm == 0) continue;
      ChannelComparison row{r, p, lm, sc.arrival_rate, sc.mean_response};
      if (model && lm > 0 && sc.arrivals > 0) {
        row.rt_model = model->router(r).rt(p);
        row.rel_error = std::abs(row.rt_sim - row.rt_model) / row.rt_model;
        sum += row.rel_error;
        mx = std::max(mx, row.rel_error);
        ++n;
      }
      out.channels.push_back(row);
    }
  }
  if (n > 0) {
    out.max_rel_error = mx;
    out.mean_rel_error = sum / n;
  }
  return out;
}

inline std::string comparison_csv(const Comparison& c) {
  std::ostringstream os;
  os.precision(10);
  os << "router_x,router_y,channel,lambda_model,lambda_sim,rt_sim,rt_model,rel_error\n";
  for (const auto& r : c.channels) {
    os << r.router.x << ',' << r.router.y << ',' << port_name(r.port) << ',' << r.lambda_model
       << ',' << r.lambda_sim << ',' << r.rt_sim << ',';
    if (std::isnan(r.rt_model)) os << "analytical unavailable,";
    else os << r.rt_model << ',' << r.rel_error;
    os << '\n';
  }
  return os.str();
}

}  // namespace nocplace
