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

#include "pb/prompting.h"

#include <cstdio>

#include "json.hpp"
#include "pb/error.h"
#include "pb/lean_syntax.h"
#include "pb/util.h"

namespace pb::gen {
namespace {

std::string SourceLine(std::string_view source, int line) {
  std::vector<std::string> lines = SplitLines(std::string(source));
  if (line < 1 || static_cast<std::size_t>(line) > lines.size()) return {};
  return lines[static_cast<std::size_t>(line - 1)];
}

}  // namespace

std::string FormatRelevance(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", score);
  return buf;
}

PromptContext AssembleContext(const corpus::TheoremProofPair& nl,
                              const std::vector<retrieval::RetrievalHit>& hits,
                              const corpus::Corpus& corpus,
                              const std::string& template_id,
                              const TemplateStore& templates) {
  templates.Get(template_id);
  PromptContext ctx;
  ctx.nl = nl;
  ctx.template_id = template_id;
  for (const auto& hit : hits) {
    const corpus::NlFlRecord& rec = corpus.At(hit.id);
    ctx.demonstrations.push_back({hit.id, rec.fl, hit.score});
  }
  return ctx;
}

std::string RenderPrompt(const PromptContext& context,
                         const TemplateStore& templates) {
  const Template& t = templates.Get(context.template_id);
  std::string demos;
  for (std::size_t i = 0; i < context.demonstrations.size(); ++i) {
    const Demonstration& d = context.demonstrations[i];
    demos += t.RenderDemo({{"rank", std::to_string(i + 1)},
                           {"id", d.id},
                           {"relevance", FormatRelevance(d.relevance)},
                           {"fl_theorem", d.fl.theorem},
                           {"fl_proof", d.fl.proof},
                           {"fl_source", lean::FlSource(d.fl.theorem, d.fl.proof)}});
  }
  return t.Render({{"nl_theorem", context.nl.theorem},
                   {"nl_proof", context.nl.proof},
                   {"k", std::to_string(context.demonstrations.size())},
                   {"demonstrations", demos}});
}

std::string SftRecord::ToJsonLine() const {
  nlohmann::ordered_json j = {{"id", id},
                              {"prompt", prompt},
                              {"target", target},
                              {"template_digest", template_digest},
                              {"k", k},
                              {"demo_ids", demo_ids},
                              {"demo_scores", demo_scores}};
  return j.dump() + "\n";
}

std::vector<SftRecord> BuildSftRecords(const corpus::Corpus& train,
                                       const retrieval::RetrievalIndex& index,
                                       int k, const std::string& template_id,
                                       const TemplateStore& templates) {
  const Template& t = templates.Get(template_id);
  std::vector<SftRecord> out;
  out.reserve(train.size());
  for (const auto& rec : train.records()) {
    const embed::JointVector q =
        index.Row(retrieval::Target::kNl, index.RowOf(rec.id));
    retrieval::QueryOptions opts;
    opts.exclude_id = rec.id;
    auto hits = retrieval::Query(index, q, k, retrieval::Target::kFl, opts);
    PromptContext ctx = AssembleContext(rec.nl, hits, train, template_id, templates);
    SftRecord s;
    s.id = rec.id;
    s.prompt = RenderPrompt(ctx, templates);
    s.target = lean::FlSource(rec.fl.theorem, rec.fl.proof);
    s.template_digest = t.digest;
    s.k = k;
    for (const auto& h : hits) {
      s.demo_ids.push_back(h.id);
      s.demo_scores.push_back(h.score);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::size_t ExportSftRecords(const corpus::Corpus& train,
                             const retrieval::RetrievalIndex& index, int k,
                             const std::string& template_id,
                             const TemplateStore& templates,
                             const std::filesystem::path& out) {
  auto records = BuildSftRecords(train, index, k, template_id, templates);
  std::string text;
  for (const auto& r : records) text += r.ToJsonLine();
  WriteFileAtomic(out, text);
  return records.size();
}

JudgeVerdict ParseJudgeResponse(std::string_view text) {
  std::vector<std::string> lines = SplitLines(NormalizeLineEndings(text));
  std::size_t i = 0;
  while (i < lines.size() && Trim(lines[i]).empty()) ++i;
  if (i == lines.size()) return {false, std::string(kUnparseable)};
  std::string_view head = Trim(lines[i]);
  if (head != "YES" && head != "NO") return {false, std::string(kUnparseable)};
  std::string rest;
  for (std::size_t j = i + 1; j < lines.size(); ++j) {
    rest += lines[j];
    rest.push_back('\n');
  }
  return {head == "YES", std::string(Trim(rest))};
}

JudgeVerdict JudgeSemantics(GenerationClient& client,
                            const TemplateStore& templates,
                            std::string_view t_nl,
                            std::string_view t_fl_candidate,
                            const JudgeOptions& options,
                            std::string_view p_nl) {
  TemplateVars vars = {{"nl_theorem", std::string(t_nl)},
                       {"fl_theorem", std::string(t_fl_candidate)},
                       {"nl_proof", options.include_nl_proof
                                        ? std::string(p_nl)
                                        : std::string()}};
  GenerationRequest req;
  req.prompt = templates.Get(options.template_id).Render(vars);
  req.n_samples = 1;
  req.temperature = 0.0;
  req.max_tokens = 1024;
  GenerationResponse resp = client.Generate(req);
  if (resp.candidates.empty()) return {false, std::string(kUnparseable)};
  return ParseJudgeResponse(resp.candidates.front());
}

std::string GenerateFeedback(const FeedbackInput& input) {
  std::string out = "[" + std::string(kFeedbackVersion) + "]\n";
  if (input.report != nullptr && !input.report->type_correct) {
    out += "Syntax check failed.\n";
    bool any = false;
    for (const auto& d : input.report->diagnostics) {
      if (d.severity != lean::Severity::kError) continue;
      any = true;
      out += "- error at line " + std::to_string(d.line) + ", column " +
             std::to_string(d.column) + ": " + d.message + "\n";
      std::string line = SourceLine(input.source, d.line);
      if (!line.empty()) out += "  > " + line + "\n";
    }
    if (input.report->uses_sorry) {
      out += "- the proof uses sorry\n";
      any = true;
    }
    if (!any) out += "- the checker rejected the declaration\n";
  }
  if (input.verdict && !input.verdict->equivalent) {
    out += "Semantic check failed.\n";
    out += "Judge rationale: " +
           (input.verdict->rationale.empty() ? std::string("(none)")
                                             : input.verdict->rationale) +
           "\n";
    out += "Original theorem:\n" + std::string(input.t_nl) + "\n";
  }
  return out;
}

corpus::TheoremProofPair ParseFlCandidate(std::string_view text) {
  corpus::TheoremProofPair fl;
  fl.modality = corpus::Modality::kFl;
  try {
    lean::Declaration d = lean::SplitDeclaration(text);
    fl.theorem = d.theorem;
    fl.proof = d.proof;
  } catch (const Error&) {
    fl.theorem = lean::ExtractCodeBlock(text);
  }
  return fl;
}

}  // namespace pb::gen
