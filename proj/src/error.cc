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

#include "pb/error.h"

namespace pb {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kTraceUnavailable: return "TraceUnavailable";
    case ErrorCode::kNotAProposition: return "NotAProposition";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kEmptyTrace: return "EmptyTrace";
    case ErrorCode::kUnknownId: return "UnknownId";
    case ErrorCode::kNonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kKOutOfRange: return "KOutOfRange";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMissingTemplate: return "MissingTemplate";
    case ErrorCode::kUnavailable: return "Unavailable";
    case ErrorCode::kMalformedRequest: return "MalformedRequest";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
  }
  return "Unknown";
}

}  // namespace pb
