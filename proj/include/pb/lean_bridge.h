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

#ifndef PB_LEAN_BRIDGE_H_
#define PB_LEAN_BRIDGE_H_

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pb/corpus.h"

namespace pb::lean {

// A proof state is a list of open goals, each a pretty-printed
// `premises ⊢ conclusion` string. An empty list is a closed state.
struct ProofState {
  std::vector<std::string> goals;
  int index = 0;
};

// S_0 -tac_0-> S_1 -> ... -> S_H, in backend execution order.
struct ProofTrace {
  std::vector<ProofState> states;    // H + 1 entries.
  std::vector<std::string> tactics;  // H entries.
};

enum class Severity { kError, kWarning };

struct Diagnostic {
  Severity severity = Severity::kError;
  int line = 0;
  int column = 0;
  std::string message;
};

struct VerificationReport {
  bool type_correct = false;
  bool uses_sorry = false;
  bool timed_out = false;
  std::vector<Diagnostic> diagnostics;
  std::chrono::milliseconds elapsed{0};

  bool has_errors() const;
};

// One request in the Lean REPL JSON protocol.
struct ReplCommand {
  std::string source;
  bool all_tactics = false;
};

// Anything that can elaborate Lean source and answer in the REPL's response
// shape: `messages`, `sorries`, and (for tactic mode) `tactics`.
class VerifierBackend {
 public:
  virtual ~VerifierBackend() = default;

  // Throws BackendUnavailable when the backend cannot be reached and Timeout
  // when a single command exceeds the configured budget.
  virtual nlohmann::json Execute(const ReplCommand& command) = 0;
};

// Normalizes a REPL response for `source`. `sorry` is detected from backend
// sorry markers, the "declaration uses 'sorry'" warning, and a token scan of
// the source outside comments and strings.
VerificationReport ReportFromResponse(std::string_view source,
                                      const nlohmann::json& response);

// Never reports type_correct on timeout; a timeout becomes a synthetic error
// diagnostic. BackendUnavailable propagates.
VerificationReport CheckSource(std::string_view source,
                               VerifierBackend& backend);
VerificationReport CheckTypeCorrect(const corpus::TheoremProofPair& fl,
                                    VerifierBackend& backend);

// Splits a REPL goal listing (goals separated by blank lines) into goals.
std::vector<std::string> SplitGoals(const nlohmann::json& goals);

// Builds a trace from the `tactics` array of a tactic-mode response for a
// complete proof. Focusing bullets and nested `by` blocks are structural and
// dropped; the state before tactic i+1 is taken as the state after tactic i,
// unless the backend reports `goalsAfter` itself. Throws TraceUnavailable.
ProofTrace TraceFromResponse(const nlohmann::json& response);

ProofTrace ExtractTrace(const corpus::TheoremProofPair& fl,
                        VerifierBackend& backend);

// `theorem := by` followed by one tactic per line.
std::string ReplaySource(std::string_view theorem,
                         const std::vector<std::string>& tactics);

std::string_view SeverityName(Severity s);
nlohmann::json ToJson(const VerificationReport& report);
nlohmann::json ToJson(const ProofTrace& trace);

}  // namespace pb::lean

#endif  // PB_LEAN_BRIDGE_H_
