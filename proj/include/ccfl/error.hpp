/*
 * Copyright 2026 The Crosscloud FL Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ccfl {

enum class ErrorCode {
  kInvalidInput,
  kNumericFailure,
  kRange,
  kGenerationFailure,
  kParse,
  kConfig,
  kRoundFailure,
  kIo,
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kNumericFailure: return "numeric-failure";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kGenerationFailure: return "generation-failure";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kRoundFailure: return "round-failure";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

// Every library failure is reported as an Error carrying a machine-readable
// code; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// A federated round that failed on a specific node. The wrapped cause keeps
// its original code.
class RoundFailure : public Error {
 public:
  RoundFailure(std::int64_t round, std::int64_t node, ErrorCode cause,
               const std::string& message)
      : Error(ErrorCode::kRoundFailure,
              "round " + std::to_string(round) + ", node " +
                  std::to_string(node) + ": " + message),
        round_(round),
        node_(node),
        cause_(cause) {}

  std::int64_t round() const noexcept { return round_; }
  std::int64_t node() const noexcept { return node_; }
  ErrorCode cause() const noexcept { return cause_; }

 private:
  std::int64_t round_;
  std::int64_t node_;
  ErrorCode cause_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) Fail(code, message);
}

}  // namespace ccfl
