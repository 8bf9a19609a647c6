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

#include <stdexcept>
#include <string>
#include <string_view>

namespace nocplace {

enum class ErrorCode {
  OutOfBounds,
  Incomplete,
  Infeasible,
  InvalidGrid,
  InvalidTraffic,
  NoCaches,
  NoMemControllers,
  Unstable,
  NonConvergent,
  DimensionMismatch,
  BudgetExceeded,
  InvalidConfig,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::Incomplete: return "Incomplete";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidTraffic: return "InvalidTraffic";
    case ErrorCode::NoCaches: return "NoCaches";
    case ErrorCode::NoMemControllers: return "NoMemControllers";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::NonConvergent: return "NonConvergent";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// The description without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace nocplace
