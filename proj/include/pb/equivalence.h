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

#ifndef PB_EQUIVALENCE_H_
#define PB_EQUIVALENCE_H_

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pb/client.h"
#include "pb/lean_bridge.h"
#include "pb/templates.h"

namespace pb::lean {

enum class RejectionReason {
  kNone,
  kGoalConstruction,
  kJudgeFailure,
  kWhitelistViolation,
  kTypeCheckFailed,
  kJudgeExhausted,
};

std::string_view RejectionReasonName(RejectionReason r);

struct EquivalenceAttempt {
  int attempt = 0;
  std::string script;
  RejectionReason outcome = RejectionReason::kNone;
  std::string detail;
};

struct EquivalenceVerdict {
  bool equivalent = false;
  int attempts_used = 0;
  // kNone on success; kGoalConstruction when no goal could be built;
  // otherwise kJudgeExhausted, with per-attempt reasons in `attempts`.
  RejectionReason rejection = RejectionReason::kNone;
  std::vector<EquivalenceAttempt> attempts;
  std::string goal;  // Goal text with a sorry placeholder.
};

struct EquivalenceOptions {
  int attempt_budget = 5;
  std::string template_id = "equiv.v1";
};

// Asks `judge` for a whitelisted tactic script proving candidate <-> gold
// and checks it with `backend`. Judge failures and rejected scripts consume
// attempts; an unreachable verifier throws.
EquivalenceVerdict CheckEquivalence(std::string_view candidate,
                                    std::string_view gold,
                                    gen::GenerationClient& judge,
                                    VerifierBackend& backend,
                                    const gen::TemplateStore& templates,
                                    const EquivalenceOptions& options = {});

nlohmann::ordered_json ToJson(const EquivalenceVerdict& verdict);

}  // namespace pb::lean

#endif  // PB_EQUIVALENCE_H_
