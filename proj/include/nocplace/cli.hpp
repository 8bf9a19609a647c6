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
 * @file cli.hpp
 * @brief The nocplace command line: count, analyze, optimize, simulate,
 * sweep and compare.
 *
 * Exit codes: 0 success, 1 model error (unstable load, infeasible counts,
 * budget exceeded, ...), 2 usage error (bad flags, unreadable or malformed
 * input files).
 *
 * Requires OpenSSL's libcrypto for the input-file hashes in run manifests.
 */

#pragma once

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "nocplace/latency.hpp"
#include "nocplace/mesh.hpp"
#include "nocplace/optimizer.hpp"
#include "nocplace/placement_io.hpp"
#include "nocplace/queueing.hpp"
#include "nocplace/routing.hpp"
#include "nocplace/simulator.hpp"
#include "nocplace/traffic.hpp"

#ifndef NOCPLACE_VERSION
#define NOCPLACE_VERSION "0.0.0"
#endif

namespace nocplace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModel = 1;
inline constexpr int kExitUsage = 2;

/// Raised for problems with the command line or input files.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out << content;
}

inline MeshGrid parse_grid(const std::string& s) {
  const auto x = s.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument(s);
    std::size_t a = 0, b = 0;
    const int w = std::stoi(s.substr(0, x), &a);
    const int h = std::stoi(s.substr(x + 1), &b);
    if (a != x || b != s.size() - x - 1) throw std::invalid_argument(s);
    return MeshGrid(w, h);
  } catch (const std::logic_error&) {
    throw UsageError("--grid expects WxH, got '" + s + "'");
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

inline std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

/// Access matrix: one CSV row per core (row-major core order).
inline std::vector<std::vector<double>> parse_access(const std::string& content) {
  std::vector<std::vector<double>> p;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    p.push_back(parse_list(line));
  }
  return p;
}

/// Shared state of one invocation: accumulates the manifest.
struct Run {
  std::string command;
  std::vector<std::string> args;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json inputs = nlohmann::json::array();
  nlohmann::json outputs = nlohmann::json::array();
  std::vector<std::uint64_t> seeds;
  std::string started = utc_now();

  std::string input(const std::string& path) {
    auto content = read_file(path);
    inputs.push_back({{"path", path}, {"sha256", sha256_hex(content)}});
    return content;
  }

  void output(const std::string& path, const std::string& content) {
    write_file(path, content);
    outputs.push_back(path);
  }

  nlohmann::json manifest() const {
    return {{"tool", "nocplace"},
            {"version", NOCPLACE_VERSION},
            {"command", command},
            {"arguments", args},
            {"parameters", parameters},
            {"seeds", seeds},
            {"started", started},
            {"finished", utc_now()},
            {"inputs", inputs},
            {"outputs", outputs}};
  }
};

/// Flags shared by the commands that build a TrafficSpec.
struct TrafficFlags {
  double lambda_g = TrafficSpec{}.lambda_g;
  double miss_l1 = 1.0;
  double miss_l2 = TrafficSpec{}.miss_l2;
  double latency_l1 = 0.0;
  double mean_service = 1.0;
  double cs2 = 1.0;
  double ca2 = 1.0;
  std::string kingman = "paper";
  double mem_fixed = 0.0;
  bool replies = false;
  std::string access;

  void add(CLI::App* app, bool service = true) {
    app->add_option("--lambda-g", lambda_g, "per-core injection rate")->check(CLI::NonNegativeNumber);
    app->add_option("--miss-l1", miss_l1, "L1 miss ratio")->check(CLI::Range(0.0, 1.0));
    app->add_option("--miss-l2", miss_l2, "L2 miss ratio")->check(CLI::Range(0.0, 1.0));
    app->add_option("--latency-l1", latency_l1, "L1 hit latency")->check(CLI::NonNegativeNumber);
    if (service) {
      app->add_option("--mean-service", mean_service, "mean channel service time E{S}")
          ->check(CLI::PositiveNumber);
      app->add_option("--cs2", cs2, "service SCV")->check(CLI::NonNegativeNumber);
    }
    app->add_option("--ca2", ca2, "arrival SCV")->check(CLI::NonNegativeNumber);
    app->add_option("--kingman", kingman, "paper|standard")
        ->check(CLI::IsMember({"paper", "standard"}));
    app->add_option("--mem-fixed", mem_fixed, "fixed off-chip access latency")
        ->check(CLI::NonNegativeNumber);
    app->add_flag("--replies", replies, "add mirrored reply traffic");
    app->add_option("--access", access, "CSV access matrix, one row per core");
  }

  TrafficSpec build(Run& run) const {
    TrafficSpec t;
    t.lambda_g = lambda_g;
    t.hit_l1 = 1.0 - miss_l1;
    t.miss_l2 = miss_l2;
    t.latency_l1 = latency_l1;
    t.svc = {mean_service, cs2};
    t.ca2 = ca2;
    t.kingman = kingman == "standard" ? KingmanMode::Standard : KingmanMode::Paper;
    t.mem_fixed_latency = mem_fixed;
    t.model_replies = replies;
    if (!access.empty()) t.p = parse_access(run.input(access));
    run.parameters["traffic"] = {{"lambda_g", lambda_g}, {"miss_l1", miss_l1},
                                 {"miss_l2", miss_l2},   {"latency_l1", latency_l1},
                                 {"mean_service", mean_service}, {"cs2", cs2},
                                 {"ca2", ca2},           {"kingman", kingman},
                                 {"mem_fixed", mem_fixed}, {"replies", replies},
                                 {"access", access}};
    return t;
  }
};

inline LatencyMode parse_mode(const std::string& m) {
  return m == "high" ? LatencyMode::HighTraffic : LatencyMode::LowTraffic;
}

inline std::uint64_t resolve_seed(std::optional<std::uint64_t> seed, Run& run, std::ostream& err) {
  std::uint64_t s;
  if (seed) {
    s = *seed;
  } else {
    std::random_device rd;
    s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << s << " (generated; pass --seed " << s << " to reproduce)\n";
  }
  run.seeds.push_back(s);
  return s;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

inline nlohmann::json to_json(const SimStats& s) {
  nlohmann::json ch = nlohmann::json::array();
  for (int i = 0; i < s.grid.tiles(); ++i)
    for (auto p : kAllPorts) {
      const auto c = s.grid.coord(i);
      const auto& v = s.channel(c, p);
      if (v.arrivals == 0) continue;
      ch.push_back({{"x", c.x},
                    {"y", c.y},
                    {"channel", port_name(p)},
                    {"arrivals", v.arrivals},
                    {"arrival_rate", v.arrival_rate},
                    {"mean_service", v.mean_service},
                    {"utilization", v.utilization},
                    {"throughput", v.throughput},
                    {"mean_number", v.mean_number},
                    {"mean_queue", v.mean_waiting},
                    {"mean_response", v.mean_response},
                    {"little_residual", v.little_residual}});
    }
  nlohmann::json flows = nlohmann::json::array();
  for (const auto& [k, v] : s.flows)
    flows.push_back({{"src", {k.first.x, k.first.y}},
                     {"dst", {k.second.x, k.second.y}},
                     {"count", v.count},
                     {"mean_latency", v.mean_latency}});
  return {{"mean_latency", s.mean_latency}, {"ci95", s.ci95},
          {"saturated", s.saturated},       {"trend_ratio", s.trend_ratio},
          {"generated", s.generated},       {"completed", s.completed},
          {"in_flight", s.in_flight},       {"measured", s.measured},
          {"window_start", s.window_start}, {"window_end", s.window_end},
          {"channels", std::move(ch)},      {"flows", std::move(flows)}};
}

inline std::string channels_csv(const SimStats& s) {
  std::ostringstream os;
  os.precision(10);
  os << "x,y,channel,arrival_rate,mean_service,utilization,throughput,mean_queue,mean_response\n";
  for (int i = 0; i < s.grid.tiles(); ++i)
    for (auto p : kAllPorts) {
      const auto c = s.grid.coord(i);
      const auto& v = s.channel(c, p);
      if (v.arrivals == 0) continue;
      os << c.x << ',' << c.y << ',' << port_name(p) << ',' << v.arrival_rate << ','
         << v.mean_service << ',' << v.utilization << ',' << v.throughput << ',' << v.mean_waiting
         << ',' << v.mean_response << '\n';
    }
  return os.str();
}

/// Runs the command line. `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nocplace: core, cache and memory-controller placement on mesh NoCs"};
  app.set_version_flag("--version", NOCPLACE_VERSION);
  app.require_subcommand(1);

  std::string format = "text";
  std::string manifest;
  app.add_option("--format", format, "summary format: json|csv|text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_option("--manifest", manifest, "write a run manifest to this file");

  Run run;
  run.args = args;
  std::function<void()> action;
  std::string out_path;

  // count -------------------------------------------------------------------
  auto* count = app.add_subcommand("count", "number of distinct placements");
  std::string grid_s;
  int n_cores = 0, n_caches = 0, n_mcs = 0;
  count->add_option("--grid", grid_s, "WxH")->required();
  count->add_option("--cores", n_cores)->required()->check(CLI::NonNegativeNumber);
  count->add_option("--caches", n_caches)->required()->check(CLI::NonNegativeNumber);
  count->add_option("--mcs", n_mcs)->check(CLI::NonNegativeNumber);
  count->callback([&] {
    action = [&] {
      const auto g = parse_grid(grid_s);
      const BigInt n = placement_count(g.tiles(), n_cores, n_caches, n_mcs);
      const auto group = symmetry_group(g).size();
      const BigInt est = (n + group - 1) / group;
      run.parameters = {{"grid", grid_s}, {"cores", n_cores}, {"caches", n_caches}, {"mcs", n_mcs}};
      if (format == "json")
        out << nlohmann::json{{"count", n.str()}, {"symmetries", group}, {"pruned_estimate", est.str()}}
                   .dump(2)
            << '\n';
      else if (format == "csv")
        out << "count,symmetries,pruned_estimate\n" << n << ',' << group << ',' << est << '\n';
      else
        out << n << '\n' << "about " << est << " after pruning " << group << " symmetries\n";
    };
  });

  // analyze -----------------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "objective and per-router queueing model");
  std::string placement_path, mode_s = "low", loads_csv, routers_csv, flows_csv;
  TrafficFlags tf;
  analyze->add_option("--placement", placement_path, "text or JSON placement")->required();
  analyze->add_option("--mode", mode_s, "low|high")->check(CLI::IsMember({"low", "high"}));
  analyze->add_option("--out", out_path, "write the JSON latency report");
  analyze->add_option("--loads-csv", loads_csv, "write per-turn channel rates");
  analyze->add_option("--routers-csv", routers_csv, "write per-channel queueing results");
  analyze->add_option("--flows-csv", flows_csv, "write per-flow delays");
  tf.add(analyze);
  analyze->callback([&] {
    action = [&] {
      const auto p = parse_placement(run.input(placement_path));
      const auto t = tf.build(run);
      const auto mode = parse_mode(mode_s);
      run.parameters["placement"] = placement_path;
      run.parameters["mode"] = mode_s;
      const auto report = objective(p, t, mode);
      if (!out_path.empty()) run.output(out_path, to_json(report, t).dump(2) + "\n");
      if (!loads_csv.empty())
        run.output(loads_csv, derive_channel_rates(build_flows(p, t), p.grid()).to_csv());
      if (!routers_csv.empty() || !flows_csv.empty()) {
        const auto insp = packet_delay_inspector(p, t);
        if (!routers_csv.empty()) run.output(routers_csv, insp.routers_csv());
        if (!flows_csv.empty()) run.output(flows_csv, insp.flows_csv());
      }
      if (format == "json") {
        out << to_json(report, t).dump(2) << '\n';
      } else if (format == "csv") {
        out << "x,y,l2_term,mem_term,total\n";
        for (const auto& c : report.per_core)
          out << c.core.x << ',' << c.core.y << ',' << fmt(c.l2_term) << ',' << fmt(c.mem_term)
              << ',' << fmt(c.total) << '\n';
      } else {
        out << "objective " << fmt(report.objective) << " (" << mode_name(mode) << " traffic, "
            << report.per_core.size() << " cores)\n";
      }
    };
  });

  // optimize ----------------------------------------------------------------
  auto* optimize = app.add_subcommand("optimize", "search for optimal placements");
  std::string method = "exhaustive", mc_tiles = "any";
  std::uint64_t budget = SearchOptions{}.budget;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  bool no_symmetry = false, no_prefilter = false;
  optimize->add_option("--grid", grid_s, "WxH")->required();
  optimize->add_option("--cores", n_cores)->required()->check(CLI::NonNegativeNumber);
  optimize->add_option("--caches", n_caches)->required()->check(CLI::NonNegativeNumber);
  optimize->add_option("--mcs", n_mcs)->check(CLI::NonNegativeNumber);
  optimize->add_option("--mode", mode_s, "low|high")->check(CLI::IsMember({"low", "high"}));
  optimize->add_option("--method", method, "exhaustive|two-phase|local")
      ->check(CLI::IsMember({"exhaustive", "two-phase", "local"}));
  optimize->add_option("--budget", budget, "candidate budget (local: evaluations)");
  optimize->add_option("--seed", seed, "seed for local search restarts");
  optimize->add_option("--mc-tiles", mc_tiles, "any|perimeter")
      ->check(CLI::IsMember({"any", "perimeter"}));
  optimize->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  optimize->add_flag("--no-symmetry", no_symmetry, "disable symmetry pruning");
  optimize->add_flag("--no-prefilter", no_prefilter, "score every candidate with the queueing model");
  optimize->add_option("--out", out_path, "write the JSON search result");
  tf.add(optimize);
  optimize->callback([&] {
    action = [&] {
      SearchSpace s;
      s.grid = parse_grid(grid_s);
      s.counts = {n_cores, n_caches, n_mcs};
      s.mode = parse_mode(mode_s);
      if (mc_tiles == "perimeter") {
        std::vector<Coord> per;
        for (int i = 0; i < s.grid.tiles(); ++i)
          if (s.grid.on_perimeter(s.grid.coord(i))) per.push_back(s.grid.coord(i));
        s.mc_tiles = per;
      }
      const auto t = tf.build(run);
      SearchOptions opt;
      opt.budget = budget;
      opt.use_symmetry = !no_symmetry;
      opt.prefilter = !no_prefilter;
      opt.jobs = jobs;
      run.parameters.update({{"grid", grid_s}, {"cores", n_cores}, {"caches", n_caches},
                             {"mcs", n_mcs}, {"mode", mode_s}, {"method", method},
                             {"budget", budget}, {"mc_tiles", mc_tiles}, {"jobs", jobs},
                             {"symmetry", !no_symmetry}, {"prefilter", !no_prefilter}});
      SearchResult r;
      if (method == "exhaustive") r = exhaustive_search(s, t, opt);
      else if (method == "two-phase") r = two_phase_optimize(s, t, opt);
      else r = local_search(s, t, resolve_seed(seed, run, err), budget, opt);
      if (!out_path.empty()) run.output(out_path, to_json(r).dump(2) + "\n");
      if (format == "json") {
        out << to_json(r).dump(2) << '\n';
      } else if (format == "csv") {
        out << "rank,objective,assignment\n";
        for (std::size_t i = 0; i < r.best.size(); ++i)
          out << i << ',' << fmt(r.objective) << ',' << r.best[i].key() << '\n';
      } else {
        out << "objective " << fmt(r.objective) << ", " << r.best.size()
            << " optimal placement(s), " << r.evaluated << " evaluated, " << r.pruned
            << " pruned by symmetry (" << method_name(r.method) << ")\n";
        for (const auto& p : r.best) out << '\n' << to_text(p);
      }
    };
  });

  // simulate ----------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "discrete-event simulation of one placement");
  SimConfig sim;
  TrafficFlags stf;
  simulate->add_option("--placement", placement_path, "text or JSON placement")->required();
  simulate->add_option("--mu", sim.mu, "router service rate (packets per time unit)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--mean-size", sim.mean_message_size, "mean message size in packets")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--messages", sim.messages, "messages to generate");
  simulate->add_option("--warmup", sim.warmup, "discarded fraction")->check(CLI::Range(0.0, 0.999));
  simulate->add_option("--seed", seed, "random seed");
  simulate->add_option("--out", out_path, "write statistics JSON");
  stf.add(simulate, false);
  simulate->callback([&] {
    action = [&] {
      sim.placement = parse_placement(run.input(placement_path));
      sim.traffic = stf.build(run);
      sim.seed = resolve_seed(seed, run, err);
      run.parameters.update({{"placement", placement_path}, {"mu", sim.mu},
                             {"mean_size", sim.mean_message_size}, {"messages", sim.messages},
                             {"warmup", sim.warmup}});
      const auto s = run_sim(sim);
      if (!out_path.empty()) run.output(out_path, to_json(s).dump(2) + "\n");
      if (format == "json") out << to_json(s).dump(2) << '\n';
      else if (format == "csv") out << channels_csv(s);
      else
        out << "mean latency " << fmt(s.mean_latency) << " +/- " << fmt(s.ci95) << " over "
            << s.measured << " messages" << (s.saturated ? ", saturated" : "") << '\n';
    };
  });

  // sweep -------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "latency versus injection rate for canonical families");
  std::string families = "central,concentric,striped,checkerboard,distributed", rates_s,
              summary_path;
  int seeds = 3;
  SimConfig sweep_base;
  std::string sweep_grid = "8x8";
  int sw_cores = 48, sw_caches = 16, sw_mcs = 0;
  TrafficFlags wtf;
  sweep->add_option("--grid", sweep_grid, "WxH");
  sweep->add_option("--cores", sw_cores)->check(CLI::NonNegativeNumber);
  sweep->add_option("--caches", sw_caches)->check(CLI::NonNegativeNumber);
  sweep->add_option("--mcs", sw_mcs)->check(CLI::NonNegativeNumber);
  sweep->add_option("--families", families, "comma-separated canonical families");
  sweep->add_option("--rates", rates_s, "comma-separated lambda_g values")->required();
  sweep->add_option("--seeds", seeds, "seeds per cell")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "first seed; cell k uses seed + k");
  sweep->add_option("--messages", sweep_base.messages, "messages per run");
  sweep->add_option("--mu", sweep_base.mu)->check(CLI::PositiveNumber);
  sweep->add_option("--mean-size", sweep_base.mean_message_size)->check(CLI::PositiveNumber);
  sweep->add_option("--warmup", sweep_base.warmup)->check(CLI::Range(0.0, 0.999));
  sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_path, "per-run CSV (default: standard output)");
  sweep->add_option("--summary", summary_path, "per-cell CSV aggregated over seeds");
  wtf.add(sweep, false);
  sweep->callback([&] {
    action = [&] {
      const auto g = parse_grid(sweep_grid);
      const auto rates = parse_list(rates_s);
      std::vector<NamedPlacement> ps;
      std::stringstream ss(families);
      std::string name;
      while (std::getline(ss, name, ',')) {
        CanonicalFamily f;
        try {
          f = CanonicalFamily::parse(name);
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
        ps.push_back({name, canonical_placement(f, g, sw_cores, sw_caches, sw_mcs)});
      }
      sweep_base.traffic = wtf.build(run);
      sweep_base.seed = resolve_seed(seed, run, err);
      run.parameters.update({{"grid", sweep_grid}, {"cores", sw_cores}, {"caches", sw_caches},
                             {"mcs", sw_mcs}, {"families", families}, {"rates", rates},
                             {"seeds", seeds}, {"messages", sweep_base.messages},
                             {"mu", sweep_base.mu}, {"mean_size", sweep_base.mean_message_size},
                             {"warmup", sweep_base.warmup}});
      for (int k = 1; k < seeds; ++k) run.seeds.push_back(sweep_base.seed + k);
      const auto rows = sweep_latency(ps, rates, sweep_base, seeds, jobs);
      const auto cells = summarize_sweep(rows);
      const auto csv = sweep_csv(rows);
      if (!out_path.empty()) run.output(out_path, csv);
      if (!summary_path.empty()) run.output(summary_path, sweep_summary_csv(cells));
      if (format == "csv" || out_path.empty()) {
        out << csv;
      } else if (format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& c : cells)
          j.push_back({{"family", c.family}, {"lambda_g", c.lambda_g},
                       {"mean_latency", c.mean_latency}, {"ci95", c.ci95},
                       {"saturated_runs", c.saturated_runs}, {"seeds", c.seeds}});
        out << j.dump(2) << '\n';
      } else {
        for (double r : rates) {
          const SweepCell* best = nullptr;
          for (const auto& c : cells)
            if (c.lambda_g == r && (!best || c.mean_latency < best->mean_latency)) best = &c;
          out << "lambda_g " << fmt(r) << ": lowest latency " << best->family << " ("
              << fmt(best->mean_latency) << ")\n";
        }
      }
    };
  });

  // compare -----------------------------------------------------------------
  auto* compare = app.add_subcommand("compare", "simulated versus modeled channel response times");
  SimConfig cmp;
  TrafficFlags ctf;
  compare->add_option("--placement", placement_path, "text or JSON placement")->required();
  compare->add_option("--mu", cmp.mu)->check(CLI::PositiveNumber);
  compare->add_option("--mean-size", cmp.mean_message_size)->check(CLI::PositiveNumber);
  compare->add_option("--messages", cmp.messages);
  compare->add_option("--warmup", cmp.warmup)->check(CLI::Range(0.0, 0.999));
  compare->add_option("--seed", seed, "random seed");
  compare->add_option("--out", out_path, "write the per-channel delta CSV");
  ctf.add(compare, false);
  compare->callback([&] {
    action = [&] {
      cmp.placement = parse_placement(run.input(placement_path));
      cmp.traffic = ctf.build(run);
      cmp.seed = resolve_seed(seed, run, err);
      run.parameters.update({{"placement", placement_path}, {"mu", cmp.mu},
                             {"mean_size", cmp.mean_message_size}, {"messages", cmp.messages},
                             {"warmup", cmp.warmup}});
      const auto c = compare_to_analytical(cmp);
      const auto csv = comparison_csv(c);
      if (!out_path.empty()) run.output(out_path, csv);
      if (format == "csv" || (out_path.empty() && format == "text")) out << csv;
      if (format == "json") {
        out << nlohmann::json{{"analytical_available", c.analytical_available},
                              {"analytical_error", c.analytical_error},
                              {"max_rel_error", c.analytical_available ? nlohmann::json(c.max_rel_error)
                                                                       : nlohmann::json(nullptr)},
                              {"mean_rel_error", c.analytical_available ? nlohmann::json(c.mean_rel_error)
                                                                        : nlohmann::json(nullptr)}}
                   .dump(2)
            << '\n';
      } else if (format == "text") {
        if (c.analytical_available)
          out << "max relative error " << fmt(c.max_rel_error) << ", mean " << fmt(c.mean_rel_error)
              << '\n';
        else
          out << "analytical unavailable: " << c.analytical_error << '\n';
      }
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  for (auto* sub : app.get_subcommands()) run.command = sub->get_name();
  run.parameters["format"] = format;
  try {
    action();
    if (!manifest.empty() || !out_path.empty()) {
      const auto path = manifest.empty() ? out_path + ".manifest.json" : manifest;
      write_file(path, run.manifest().dump(2) + "\n");
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::Parse:
      case ErrorCode::InvalidGrid:
      case ErrorCode::InvalidConfig: return kExitUsage;
      default: return kExitModel;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitModel;
  }
  return kExitOk;
}

}  // namespace nocplace::cli
