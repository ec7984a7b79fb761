// Copyright 2026 The pb Authors.
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

#ifndef PB_ERROR_H_
#define PB_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace pb {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  // corpus
  kMalformedLine,
  kDuplicateId,
  kMissingField,
  kEmptyCorpus,
  // lean bridge
  kBackendUnavailable,
  kTimeout,
  kTraceUnavailable,
  kNotAProposition,
  kParseFailure,
  // embed / train
  kDimensionMismatch,
  kZeroVector,
  kNotNormalized,
  kEmptyTrace,
  kUnknownId,
  kNonPositiveTemperature,
  kNonFiniteLoss,
  kCorruptCheckpoint,
  // retrieval
  kEmptyIndex,
  kKOutOfRange,
  kEmptyInput,
  // generation clients
  kMissingTemplate,
  kUnavailable,
  kMalformedRequest,
  kBudgetExceeded,
};

std::string_view ErrorCodeName(ErrorCode code);

// All domain errors raised by the library. `detail` carries the offending
// value (an id, a field name, a line number) when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

  // True for failures of an external service or child process, as opposed
  // to bad input. Callers use this to separate "could not evaluate" from
  // "evaluated and failed".
  bool is_transport() const {
    return code_ == ErrorCode::kBackendUnavailable ||
           code_ == ErrorCode::kUnavailable;
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace pb

#endif  // PB_ERROR_H_
