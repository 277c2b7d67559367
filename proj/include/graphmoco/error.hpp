// Copyright 2026 The GraphMoco Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRAPHMOCO_ERROR_HPP
#define GRAPHMOCO_ERROR_HPP

#include <stdexcept>
#include <string>

namespace graphmoco {

enum class ErrorCode {
  kParse,
  kDuplicateVariant,
  kInfeasibleSplit,
  kLookup,
  kPrecondition,
  kIndex,
  kInfeasibleTask,
  kUndefinedMetric,
  kNumeric,
  kShapeMismatch,
  kFormat,
  kVersionMismatch,
  kIo,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this one exception type; the
// code lets callers (and tests) distinguish the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) Fail(ErrorCode::kPrecondition, message);
}

}  // namespace graphmoco

#endif  // GRAPHMOCO_ERROR_HPP
