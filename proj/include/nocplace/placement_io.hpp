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

// Text grid format: one character per tile, one line per row, every row
// terminated by '\n'.  C = core, $ = cache, M = memory controller,
// . = router only.

#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nocplace/mesh.hpp"

namespace nocplace {

inline std::string to_text(const Placement& p) {
  std::string out;
  const auto& g = p.grid();
  out.reserve(static_cast<std::size_t>(g.tiles() + g.height()));
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) out.push_back(kind_char(p.kind({x, y})));
    out.push_back('\n');
  }
  return out;
}

inline Placement parse_text(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw Error(ErrorCode::Parse, "empty placement");
  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  std::vector<NodeKind> tiles;
  tiles.reserve(static_cast<std::size_t>(width * height));
  for (int y = 0; y < height; ++y) {
    if (static_cast<int>(rows[y].size()) != width)
      throw Error(ErrorCode::Parse, "row " + std::to_string(y) + " has " +
                                        std::to_string(rows[y].size()) + " tiles, expected " +
                                        std::to_string(width));
    for (char c : rows[y]) {
      auto k = kind_from_char(c);
      if (!k) throw Error(ErrorCode::Parse, std::string("unknown tile character '") + c + "'");
      tiles.push_back(*k);
    }
  }
  return Placement(MeshGrid(width, height), std::move(tiles));
}

inline nlohmann::json to_json(const Placement& p) {
  const auto& g = p.grid();
  nlohmann::json rows = nlohmann::json::array();
  for (int y = 0; y < g.height(); ++y) {
    nlohmann::json row = nlohmann::json::array();
    for (int x = 0; x < g.width(); ++x) row.push_back(std::string(kind_name(p.kind({x, y}))));
    rows.push_back(std::move(row));
  }
  return {{"width", g.width()}, {"height", g.height()}, {"tiles", std::move(rows)}};
}

inline Placement placement_from_json(const nlohmann::json& j) {
  try {
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    const auto& rows = j.at("tiles");
    if (!rows.is_array() || static_cast<int>(rows.size()) != height)
      throw Error(ErrorCode::Parse, "tiles must hold " + std::to_string(height) + " rows");
    std::vector<NodeKind> tiles;
    for (const auto& row : rows) {
      if (!row.is_array() || static_cast<int>(row.size()) != width)
        throw Error(ErrorCode::Parse, "every row must hold " + std::to_string(width) + " tiles");
      for (const auto& cell : row) {
        auto k = kind_from_name(cell.get<std::string>());
        if (!k) throw Error(ErrorCode::Parse, "unknown tile kind " + cell.dump());
        tiles.push_back(*k);
      }
    }
    return Placement(MeshGrid(width, height), std::move(tiles));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

/// Accepts either format; JSON is recognised by a leading '{'.
inline Placement parse_placement(const std::string& content) {
  auto first = content.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && content[first] == '{') {
    try {
      return placement_from_json(nlohmann::json::parse(content));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, e.what());
    }
  }
  return parse_text(content);
}

}  // namespace nocplace
