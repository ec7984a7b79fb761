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

#ifndef PB_PROMPTING_H_
#define PB_PROMPTING_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pb/client.h"
#include "pb/corpus.h"
#include "pb/lean_bridge.h"
#include "pb/retrieval.h"
#include "pb/templates.h"

namespace pb::gen {

inline constexpr int kDefaultRetrievalK = 5;

struct Demonstration {
  std::string id;
  corpus::TheoremProofPair fl;
  double relevance = 0.0;
};

struct PromptContext {
  corpus::TheoremProofPair nl;
  std::vector<Demonstration> demonstrations;  // Hit order.
  std::string template_id;
};

// Relevance as printed into prompts.
std::string FormatRelevance(double score);

PromptContext AssembleContext(const corpus::TheoremProofPair& nl,
                              const std::vector<retrieval::RetrievalHit>& hits,
                              const corpus::Corpus& corpus,
                              const std::string& template_id,
                              const TemplateStore& templates);

// Template vars: nl_theorem, nl_proof, k, demonstrations. Each demonstration
// renders the `.demo` fragment with rank, id, relevance, fl_theorem,
// fl_proof, fl_source.
std::string RenderPrompt(const PromptContext& context,
                         const TemplateStore& templates);

struct SftRecord {
  std::string id;
  std::string prompt;
  std::string target;
  std::string template_digest;
  int k = 0;
  std::vector<std::string> demo_ids;
  std::vector<double> demo_scores;

  std::string ToJsonLine() const;
};

// One record per corpus entry, demonstrations drawn from the index's FL bank
// with the record's own id excluded. The query is the record's NL row in
// `index`.
std::vector<SftRecord> BuildSftRecords(const corpus::Corpus& train,
                                       const retrieval::RetrievalIndex& index,
                                       int k, const std::string& template_id,
                                       const TemplateStore& templates);
std::size_t ExportSftRecords(const corpus::Corpus& train,
                             const retrieval::RetrievalIndex& index, int k,
                             const std::string& template_id,
                             const TemplateStore& templates,
                             const std::filesystem::path& out);

struct JudgeVerdict {
  bool equivalent = false;
  std::string rationale;
};

inline constexpr std::string_view kUnparseable = "unparseable";

// The first non-blank line must be exactly YES or NO.
JudgeVerdict ParseJudgeResponse(std::string_view text);

struct JudgeOptions {
  std::string template_id = "judge.v1";
  // Off by default; the informal proof is not part of the judged pair.
  bool include_nl_proof = false;
};

JudgeVerdict JudgeSemantics(GenerationClient& client,
                            const TemplateStore& templates,
                            std::string_view t_nl,
                            std::string_view t_fl_candidate,
                            const JudgeOptions& options = {},
                            std::string_view p_nl = {});

inline constexpr std::string_view kFeedbackVersion = "feedback.v1";

struct FeedbackInput {
  const lean::VerificationReport* report = nullptr;  // Null if not checked.
  std::string_view source;                            // Checked FL source.
  std::optional<JudgeVerdict> verdict;
  std::string_view t_nl;
};

std::string GenerateFeedback(const FeedbackInput& input);

// Parses a generated FL pair (optionally fenced). Text without a usable
// declaration becomes a pair whose theorem is the raw text and whose proof
// is empty, so that verification fails rather than the caller.
corpus::TheoremProofPair ParseFlCandidate(std::string_view text);

}  // namespace pb::gen

#endif  // PB_PROMPTING_H_
