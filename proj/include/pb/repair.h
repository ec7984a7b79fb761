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

#ifndef PB_REPAIR_H_
#define PB_REPAIR_H_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pb/client.h"
#include "pb/corpus.h"
#include "pb/equivalence.h"
#include "pb/lean_bridge.h"
#include "pb/prompting.h"
#include "pb/templates.h"

namespace pb::repair {

using corpus::TheoremProofPair;

inline constexpr int kDefaultMaxRounds = 5;

struct RepairTask {
  std::string id;
  TheoremProofPair nl;
  TheoremProofPair initial_fl;
  int r_max = kDefaultMaxRounds;
};

enum class RepairStatus { kVerified, kFailure, kTransportError };

std::string_view RepairStatusName(RepairStatus s);

struct RepairIteration {
  TheoremProofPair candidate;
  bool syntax_ok = false;
  bool semantics_ok = false;
  bool semantics_checked = false;
  std::string rationale;
  std::string feedback;  // Empty on the successful round.
  long long elapsed_ms = 0;
};

struct RepairOutcome {
  std::string id;
  RepairStatus status = RepairStatus::kFailure;
  std::optional<TheoremProofPair> final_fl;
  std::vector<RepairIteration> iterations;
  int generator_calls = 0;
  std::string error;  // Set for kTransportError.
};

// Decides whether a candidate states the same theorem as the task's NL side.
class SemanticsChecker {
 public:
  virtual ~SemanticsChecker() = default;
  virtual gen::JudgeVerdict Check(const RepairTask& task,
                                  const TheoremProofPair& candidate) = 0;
};

// Asks an LLM judge. A header that does not parse is judged not equivalent.
class JudgeSemanticsChecker : public SemanticsChecker {
 public:
  JudgeSemanticsChecker(gen::GenerationClient& judge,
                        const gen::TemplateStore& templates,
                        gen::JudgeOptions options = {})
      : judge_(judge), templates_(templates), options_(std::move(options)) {}

  gen::JudgeVerdict Check(const RepairTask& task,
                          const TheoremProofPair& candidate) override;

 private:
  gen::GenerationClient& judge_;
  const gen::TemplateStore& templates_;
  gen::JudgeOptions options_;
};

// Proves candidate <-> gold inside the verifier; usable when a gold FL
// theorem is known.
class BiconditionalSemanticsChecker : public SemanticsChecker {
 public:
  BiconditionalSemanticsChecker(std::string gold_theorem,
                                gen::GenerationClient& judge,
                                lean::VerifierBackend& backend,
                                const gen::TemplateStore& templates,
                                lean::EquivalenceOptions options = {})
      : gold_(std::move(gold_theorem)),
        judge_(judge),
        backend_(backend),
        templates_(templates),
        options_(std::move(options)) {}

  gen::JudgeVerdict Check(const RepairTask& task,
                          const TheoremProofPair& candidate) override;

 private:
  std::string gold_;
  gen::GenerationClient& judge_;
  lean::VerifierBackend& backend_;
  const gen::TemplateStore& templates_;
  lean::EquivalenceOptions options_;
};

struct RepairOptions {
  std::string template_id = "repair.v1";
  // Skip the semantics check on rounds whose syntax check failed.
  bool short_circuit = false;
  double temperature = 0.7;
  int max_tokens = 4096;
};

// Verify, judge, and regenerate up to task.r_max rounds. Transport failures
// end the task with kTransportError.
RepairOutcome RepairLoop(const RepairTask& task, lean::VerifierBackend& backend,
                         SemanticsChecker& semantics,
                         gen::GenerationClient& generator,
                         const gen::TemplateStore& templates,
                         const RepairOptions& options = {});

nlohmann::ordered_json ToJson(const RepairOutcome& outcome);

// Batch input lines: {"id", "nl_theorem", "nl_proof", "initial_fl"}.
std::vector<RepairTask> ParseRepairTasks(std::string_view jsonl, int r_max);

}  // namespace pb::repair

#endif  // PB_REPAIR_H_
