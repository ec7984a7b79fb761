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

#include "pb/lean_bridge.h"

#include <algorithm>

#include "pb/error.h"
#include "pb/lean_syntax.h"
#include "pb/util.h"

namespace pb::lean {
namespace {

using nlohmann::json;

constexpr std::string_view kSorryWarning = "declaration uses 'sorry'";

int PosField(const json& msg, const char* key) {
  auto pos = msg.find("pos");
  if (pos == msg.end() || !pos->is_object()) return 0;
  auto v = pos->find(key);
  return v != pos->end() && v->is_number_integer() ? v->get<int>() : 0;
}

bool IsStructuralTactic(std::string_view tactic) {
  auto t = Trim(tactic);
  if (t.empty()) return true;
  if (StartsWith(t, "\xC2\xB7")) return true;  // ·
  if (t[0] == '.' && (t.size() == 1 || t[1] == ' ' || t[1] == '\n')) {
    return true;
  }
  if (StartsWith(t, "by") && (t.size() == 2 || t[2] == ' ' || t[2] == '\n')) {
    return true;
  }
  return false;
}

}  // namespace

bool VerificationReport::has_errors() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) {
                       return d.severity == Severity::kError;
                     });
}

std::string_view SeverityName(Severity s) {
  return s == Severity::kError ? "error" : "warning";
}

VerificationReport ReportFromResponse(std::string_view source,
                                      const json& response) {
  VerificationReport report;
  if (auto top = response.find("message");
      top != response.end() && top->is_string()) {
    // REPL-level failure (bad request, unknown environment).
    report.diagnostics.push_back(
        {Severity::kError, 0, 0, "repl: " + top->get<std::string>()});
  }
  bool sorry_warning = false;
  if (auto msgs = response.find("messages");
      msgs != response.end() && msgs->is_array()) {
    for (const auto& m : *msgs) {
      std::string sev = m.value("severity", "error");
      std::string data = m.value("data", "");
      if (data.find(kSorryWarning) != std::string::npos) sorry_warning = true;
      if (sev != "error" && sev != "warning") continue;
      report.diagnostics.push_back(
          {sev == "error" ? Severity::kError : Severity::kWarning,
           PosField(m, "line"), PosField(m, "column"), data});
    }
  }
  bool backend_sorries = false;
  if (auto s = response.find("sorries"); s != response.end() && s->is_array()) {
    backend_sorries = !s->empty();
  }
  report.uses_sorry =
      backend_sorries || sorry_warning || !FindSorryTokens(source).empty();
  report.type_correct = !report.uses_sorry && !report.has_errors();
  return report;
}

VerificationReport CheckSource(std::string_view source,
                               VerifierBackend& backend) {
  auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  try {
    report = ReportFromResponse(source, backend.Execute({std::string(source),
                                                         false}));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kTimeout) throw;
    report = VerificationReport{};
    report.timed_out = true;
    report.uses_sorry = !FindSorryTokens(source).empty();
    report.diagnostics.push_back({Severity::kError, 0, 0, e.what()});
  }
  report.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  return report;
}

VerificationReport CheckTypeCorrect(const corpus::TheoremProofPair& fl,
                                    VerifierBackend& backend) {
  return CheckSource(FlSource(fl.theorem, fl.proof), backend);
}

std::vector<std::string> SplitGoals(const json& goals) {
  std::vector<std::string> out;
  if (goals.is_array()) {
    for (const auto& g : goals) {
      if (g.is_string() && !Trim(g.get<std::string>()).empty()) {
        out.push_back(std::string(Trim(g.get<std::string>())));
      }
    }
    return out;
  }
  if (!goals.is_string()) return out;
  const std::string text = goals.get<std::string>();
  std::size_t start = 0;
  while (start < text.size()) {
    auto sep = text.find("\n\n", start);
    auto piece = Trim(std::string_view(text).substr(
        start, sep == std::string::npos ? std::string::npos : sep - start));
    if (!piece.empty() && piece != "no goals") out.emplace_back(piece);
    if (sep == std::string::npos) break;
    start = sep + 2;
  }
  return out;
}

ProofTrace TraceFromResponse(const json& response) {
  auto tactics = response.find("tactics");
  if (tactics == response.end() || !tactics->is_array() || tactics->empty()) {
    throw Error(ErrorCode::kTraceUnavailable, "backend returned no tactics");
  }
  std::vector<const json*> steps;
  for (const auto& t : *tactics) {
    if (!t.is_object() || !t.contains("tactic")) continue;
    if (IsStructuralTactic(t["tactic"].get<std::string>())) continue;
    steps.push_back(&t);
  }
  if (steps.empty()) {
    throw Error(ErrorCode::kTraceUnavailable, "no substantive tactics");
  }
  ProofTrace trace;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const json& step = *steps[i];
    trace.tactics.push_back(std::string(Trim(step["tactic"].get<std::string>())));
    trace.states.push_back(
        {SplitGoals(step.value("goals", json(""))), static_cast<int>(i)});
  }
  trace.states.push_back({{}, static_cast<int>(steps.size())});
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (auto after = steps[i]->find("goalsAfter"); after != steps[i]->end()) {
      trace.states[i + 1].goals = SplitGoals(*after);
    }
  }
  if (trace.states.front().goals.size() != 1) {
    throw Error(ErrorCode::kTraceUnavailable,
                "initial state must have exactly one goal, got " +
                    std::to_string(trace.states.front().goals.size()));
  }
  return trace;
}

ProofTrace ExtractTrace(const corpus::TheoremProofPair& fl,
                        VerifierBackend& backend) {
  const std::string source = FlSource(fl.theorem, fl.proof);
  json response = backend.Execute({source, true});
  VerificationReport report = ReportFromResponse(source, response);
  if (!report.type_correct) {
    throw Error(ErrorCode::kTraceUnavailable,
                "proof does not type-check; trace undefined");
  }
  return TraceFromResponse(response);
}

std::string ReplaySource(std::string_view theorem,
                         const std::vector<std::string>& tactics) {
  std::string out(Trim(theorem));
  out += " := by";
  for (const auto& t : tactics) out += "\n  " + t;
  return out;
}

json ToJson(const VerificationReport& report) {
  json diags = json::array();
  for (const auto& d : report.diagnostics) {
    diags.push_back({{"severity", SeverityName(d.severity)},
                     {"line", d.line},
                     {"column", d.column},
                     {"message", d.message}});
  }
  return {{"type_correct", report.type_correct},
          {"uses_sorry", report.uses_sorry},
          {"timed_out", report.timed_out},
          {"diagnostics", std::move(diags)},
          {"elapsed_ms", report.elapsed.count()}};
}

json ToJson(const ProofTrace& trace) {
  json states = json::array();
  for (const auto& s : trace.states) {
    states.push_back({{"index", s.index}, {"goals", s.goals}});
  }
  return {{"states", std::move(states)}, {"tactics", trace.tactics}};
}

}  // namespace pb::lean
