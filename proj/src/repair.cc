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

#include "pb/repair.h"

#include <chrono>

#include "pb/error.h"
#include "pb/lean_syntax.h"
#include "pb/util.h"

namespace pb::repair {
namespace {

using Clock = std::chrono::steady_clock;

nlohmann::ordered_json PairJson(const TheoremProofPair& p) {
  return {{"theorem", p.theorem}, {"proof", p.proof}};
}

}  // namespace

std::string_view RepairStatusName(RepairStatus s) {
  switch (s) {
    case RepairStatus::kVerified: return "verified";
    case RepairStatus::kFailure: return "failure";
    case RepairStatus::kTransportError: return "transport_error";
  }
  return "unknown";
}

gen::JudgeVerdict JudgeSemanticsChecker::Check(
    const RepairTask& task, const TheoremProofPair& candidate) {
  try {
    lean::ParseTheoremHeader(candidate.theorem);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParseFailure &&
        e.code() != ErrorCode::kNotAProposition) {
      throw;
    }
    return {false, "unparseable header"};
  }
  return gen::JudgeSemantics(judge_, templates_, task.nl.theorem,
                             candidate.theorem, options_, task.nl.proof);
}

gen::JudgeVerdict BiconditionalSemanticsChecker::Check(
    const RepairTask&, const TheoremProofPair& candidate) {
  lean::EquivalenceVerdict v = lean::CheckEquivalence(
      candidate.theorem, gold_, judge_, backend_, templates_, options_);
  if (v.equivalent) return {true, "biconditional proved"};
  std::string why(lean::RejectionReasonName(v.rejection));
  if (!v.attempts.empty() && !v.attempts.back().detail.empty()) {
    why += ": " + v.attempts.back().detail;
  }
  return {false, why};
}

RepairOutcome RepairLoop(const RepairTask& task, lean::VerifierBackend& backend,
                         SemanticsChecker& semantics,
                         gen::GenerationClient& generator,
                         const gen::TemplateStore& templates,
                         const RepairOptions& options) {
  if (task.r_max < 1) {
    throw Error(ErrorCode::kInvalidArgument, "r_max must be >= 1");
  }
  RepairOutcome out;
  out.id = task.id;
  TheoremProofPair candidate = task.initial_fl;
  candidate.modality = corpus::Modality::kFl;
  const gen::Template& tmpl = templates.Get(options.template_id);

  try {
    for (int round = 0; round < task.r_max; ++round) {
      const auto start = Clock::now();
      RepairIteration it;
      it.candidate = candidate;
      const std::string source =
          lean::FlSource(candidate.theorem, candidate.proof);
      lean::VerificationReport report = lean::CheckSource(source, backend);
      it.syntax_ok = report.type_correct;
      std::optional<gen::JudgeVerdict> verdict;
      if (it.syntax_ok || !options.short_circuit) {
        verdict = semantics.Check(task, candidate);
        it.semantics_checked = true;
        it.semantics_ok = verdict->equivalent;
        it.rationale = verdict->rationale;
      }
      if (it.syntax_ok && it.semantics_ok) {
        it.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            Clock::now() - start)
                            .count();
        out.iterations.push_back(std::move(it));
        out.status = RepairStatus::kVerified;
        out.final_fl = candidate;
        return out;
      }
      it.feedback = gen::GenerateFeedback(
          {&report, source, verdict, task.nl.theorem});
      if (round + 1 < task.r_max) {
        gen::GenerationRequest req;
        req.prompt = tmpl.Render({{"nl_theorem", task.nl.theorem},
                                  {"nl_proof", task.nl.proof},
                                  {"previous_fl", source},
                                  {"feedback", it.feedback}});
        req.n_samples = 1;
        req.temperature = options.temperature;
        req.max_tokens = options.max_tokens;
        ++out.generator_calls;
        gen::GenerationResponse resp = generator.Generate(req);
        candidate = gen::ParseFlCandidate(
            resp.candidates.empty() ? std::string() : resp.candidates.front());
      }
      it.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          Clock::now() - start)
                          .count();
      out.iterations.push_back(std::move(it));
    }
  } catch (const Error& e) {
    if (!e.is_transport() && e.code() != ErrorCode::kMalformedRequest &&
        e.code() != ErrorCode::kBudgetExceeded) {
      throw;
    }
    out.status = RepairStatus::kTransportError;
    out.error = e.what();
    return out;
  }
  out.status = RepairStatus::kFailure;
  return out;
}

nlohmann::ordered_json ToJson(const RepairOutcome& o) {
  nlohmann::ordered_json iterations = nlohmann::ordered_json::array();
  for (const auto& it : o.iterations) {
    nlohmann::ordered_json j = {{"candidate", PairJson(it.candidate)},
                                {"syntax_ok", it.syntax_ok},
                                {"semantics_ok", it.semantics_ok},
                                {"semantics_checked", it.semantics_checked},
                                {"rationale", it.rationale},
                                {"feedback", it.feedback},
                                {"elapsed_ms", it.elapsed_ms}};
    iterations.push_back(std::move(j));
  }
  nlohmann::ordered_json j = {
      {"id", o.id},
      {"status", RepairStatusName(o.status)},
      {"final_fl", o.final_fl ? PairJson(*o.final_fl)
                              : nlohmann::ordered_json(nullptr)},
      {"generator_calls", o.generator_calls},
      {"iterations", iterations}};
  if (!o.error.empty()) j["error"] = o.error;
  return j;
}

std::vector<RepairTask> ParseRepairTasks(std::string_view jsonl, int r_max) {
  std::vector<RepairTask> tasks;
  int line_no = 0;
  for (const std::string& line : SplitLines(NormalizeLineEndings(jsonl))) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      RepairTask t;
      t.id = j.at("id").get<std::string>();
      t.nl = {corpus::Modality::kNl, j.at("nl_theorem").get<std::string>(),
              j.value("nl_proof", std::string()), t.id};
      t.initial_fl = gen::ParseFlCandidate(j.at("initial_fl").get<std::string>());
      t.initial_fl.source_id = t.id;
      t.r_max = r_max;
      tasks.push_back(std::move(t));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return tasks;
}

}  // namespace pb::repair
