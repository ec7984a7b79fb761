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

#include "pb/equivalence.h"

#include "pb/error.h"
#include "pb/lean_syntax.h"

namespace pb::lean {
namespace {

std::string DescribeErrors(const VerificationReport& report) {
  std::string out;
  for (const auto& d : report.diagnostics) {
    if (d.severity != Severity::kError) continue;
    out += "line " + std::to_string(d.line) + ", column " +
           std::to_string(d.column) + ": " + d.message + "\n";
  }
  if (report.uses_sorry) out += "the script relies on sorry\n";
  return out.empty() ? "the checker rejected the script\n" : out;
}

}  // namespace

std::string_view RejectionReasonName(RejectionReason r) {
  switch (r) {
    case RejectionReason::kNone: return "none";
    case RejectionReason::kGoalConstruction: return "goal_construction";
    case RejectionReason::kJudgeFailure: return "judge_failure";
    case RejectionReason::kWhitelistViolation: return "whitelist_violation";
    case RejectionReason::kTypeCheckFailed: return "type_check_failed";
    case RejectionReason::kJudgeExhausted: return "judge_exhausted";
  }
  return "unknown";
}

EquivalenceVerdict CheckEquivalence(std::string_view candidate,
                                    std::string_view gold,
                                    gen::GenerationClient& judge,
                                    VerifierBackend& backend,
                                    const gen::TemplateStore& templates,
                                    const EquivalenceOptions& options) {
  if (options.attempt_budget < 1) {
    throw Error(ErrorCode::kInvalidArgument, "attempt_budget must be >= 1");
  }
  EquivalenceVerdict verdict;
  EquivalenceGoal goal;
  try {
    goal = BuildEquivalenceGoal(candidate, gold);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotAProposition &&
        e.code() != ErrorCode::kParseFailure) {
      throw;
    }
    verdict.rejection = RejectionReason::kGoalConstruction;
    verdict.attempts.push_back(
        {0, {}, RejectionReason::kGoalConstruction, e.what()});
    return verdict;
  }
  verdict.goal = goal.Text();
  const gen::Template& tmpl = templates.Get(options.template_id);
  std::string feedback;

  for (int attempt = 1; attempt <= options.attempt_budget; ++attempt) {
    verdict.attempts_used = attempt;
    EquivalenceAttempt record;
    record.attempt = attempt;
    gen::GenerationRequest req;
    req.prompt = tmpl.Render({{"goal", verdict.goal},
                              {"prop_a", goal.prop_a},
                              {"prop_b", goal.prop_b},
                              {"feedback", feedback}});
    req.n_samples = 1;
    req.temperature = 0.0;
    req.max_tokens = 2048;
    std::string reply;
    try {
      gen::GenerationResponse resp = judge.Generate(req);
      if (resp.candidates.empty()) {
        throw Error(ErrorCode::kUnavailable, "judge returned no candidates");
      }
      reply = resp.candidates.front();
    } catch (const Error& e) {
      record.outcome = RejectionReason::kJudgeFailure;
      record.detail = e.what();
      verdict.attempts.push_back(std::move(record));
      feedback.clear();
      continue;
    }
    record.script = NormalizeTacticScript(reply);
    WhitelistCheck check = ValidateTacticWhitelist(record.script);
    if (!check.accepted) {
      record.outcome = RejectionReason::kWhitelistViolation;
      record.detail = check.violation + ": " + check.offending;
      feedback = "The previous script was rejected (" + check.violation +
                 " in `" + check.offending +
                 "`). Use only rfl, simp, ring, constructor, intro, intros "
                 "and nlinarith, with simp bare.";
      verdict.attempts.push_back(std::move(record));
      continue;
    }
    VerificationReport report = CheckSource(goal.Render(record.script), backend);
    if (report.type_correct) {
      verdict.equivalent = true;
      verdict.rejection = RejectionReason::kNone;
      verdict.attempts.push_back(std::move(record));
      return verdict;
    }
    record.outcome = RejectionReason::kTypeCheckFailed;
    record.detail = DescribeErrors(report);
    feedback = "The previous script failed to check:\n" + record.detail;
    verdict.attempts.push_back(std::move(record));
  }
  verdict.rejection = RejectionReason::kJudgeExhausted;
  return verdict;
}

nlohmann::ordered_json ToJson(const EquivalenceVerdict& v) {
  nlohmann::ordered_json attempts = nlohmann::ordered_json::array();
  for (const auto& a : v.attempts) {
    attempts.push_back({{"attempt", a.attempt},
                        {"script", a.script},
                        {"outcome", RejectionReasonName(a.outcome)},
                        {"detail", a.detail}});
  }
  return {{"equivalent", v.equivalent},
          {"attempts_used", v.attempts_used},
          {"rejection", RejectionReasonName(v.rejection)},
          {"attempts", attempts}};
}

}  // namespace pb::lean
