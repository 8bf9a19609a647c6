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

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "nocplace/error.hpp"

namespace nocplace {

/// Per-channel service description shared by every router channel.
struct ServiceSpec {
  double mean_service = 1.0;  // E{S} = 1/mu
  double cs2 = 1.0;           // squared coefficient of variation of S
};

enum class KingmanMode {
  Paper,     // ((Ca2+Cs2)/2) E{S} / (1 - rho_e), read as the channel response time
  Standard,  // textbook G/G/1: rho_e/(1-rho_e) ((Ca2+Cs2)/2) E{S}, a waiting time
};

/// Workload description. With the defaults every injected message is an L2
/// access, so lambda_g is the per-core network injection rate.
struct TrafficSpec {
  double lambda_g = 0.01;
  double hit_l1 = 0.0;
  double miss_l2 = 0.2;
  // Access probabilities p[i][j] of core i (row-major core order) hitting
  // cache j (row-major cache order). Empty means uniform.
  std::vector<std::vector<double>> p;
  // Optional per-core injection rates overriding lambda_g.
  std::vector<double> core_rates;
  double latency_l1 = 0.0;
  ServiceSpec svc;
  double ca2 = 1.0;
  KingmanMode kingman = KingmanMode::Paper;
  bool model_replies = false;
  double mem_fixed_latency = 0.0;

  double miss_l1() const { return 1.0 - hit_l1; }

  double core_rate(std::size_t core) const {
    return core_rates.empty() ? lambda_g : core_rates.at(core);
  }

  double access(std::size_t core, std::size_t cache, std::size_t n_caches) const {
    return p.empty() ? 1.0 / static_cast<double>(n_caches) : p.at(core).at(cache);
  }

  /// True when every core behaves identically, the precondition for
  /// treating grid symmetries as objective-preserving.
  bool homogeneous() const { return p.empty() && core_rates.empty(); }
};

inline void validate(const TrafficSpec& t, std::size_t n_cores, std::size_t n_caches) {
  auto prob = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!prob(t.hit_l1) || !prob(t.miss_l2))
    throw Error(ErrorCode::InvalidTraffic, "hit/miss ratios must lie in [0,1]");
  if (!std::isfinite(t.lambda_g) || t.lambda_g < 0)
    throw Error(ErrorCode::InvalidTraffic, "lambda_g must be a finite non-negative rate");
  if (!(t.svc.mean_service > 0) || !(t.svc.cs2 >= 0) || !(t.ca2 >= 0))
    throw Error(ErrorCode::InvalidTraffic, "service mean must be positive and SCVs non-negative");
  if (!t.core_rates.empty()) {
    if (t.core_rates.size() != n_cores)
      throw Error(ErrorCode::InvalidTraffic, "core_rates must have one entry per core");
    for (double r : t.core_rates)
      if (!std::isfinite(r) || r < 0) throw Error(ErrorCode::InvalidTraffic, "negative core rate");
  }
  if (t.p.empty()) return;
  if (t.p.size() != n_cores)
    throw Error(ErrorCode::InvalidTraffic, "access matrix has " + std::to_string(t.p.size()) +
                                               " rows for " + std::to_string(n_cores) + " cores");
  for (const auto& row : t.p) {
    if (row.size() != n_caches)
      throw Error(ErrorCode::InvalidTraffic, "access matrix row width does not match cache count");
    double sum = 0;
    for (double v : row) {
      if (!prob(v)) throw Error(ErrorCode::InvalidTraffic, "access probability outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error(ErrorCode::InvalidTraffic, "access matrix row sums to " + std::to_string(sum));
  }
}

}  // namespace nocplace
