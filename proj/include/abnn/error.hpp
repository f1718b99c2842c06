// Copyright 2026 The abnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace abnn {

// Numeric values are mirrored by the abnn_status codes of the C API.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kDTypeMismatch = 3,
  kNoTrace = 4,
  kNonScalarLoss = 5,
  kNoiseMismatch = 6,
  kNonFinite = 7,
  kIo = 8,
  kBadMagic = 9,
  kTruncated = 10,
  kCountMismatch = 11,
  kUnsupportedVersion = 12,
  kMissingProvenance = 13,
  kConfig = 14,
  kModelMismatch = 15,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace abnn
