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

#ifndef PB_EVALHARNESS_H_
#define PB_EVALHARNESS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pb/client.h"
#include "pb/corpus.h"
#include "pb/embed.h"
#include "pb/lean_bridge.h"
#include "pb/retrieval.h"
#include "pb/templates.h"
#include "pb/train.h"

namespace pb::eval {

inline const std::vector<int> kPassKs = {1, 2, 4, 8, 16, 32};

// True iff any of the first min(k, n) verdicts holds.
bool PassAtK(const std::vector<bool>& verdicts, int k);

struct CandidateVerdict {
  bool tc = false;
  std::optional<bool> sc;  // Only evaluated when tc holds.
};

struct CandidateSet {
  std::string record_id;
  std::vector<corpus::TheoremProofPair> candidates;  // Generation order.
  std::vector<CandidateVerdict> verdicts;
  bool incomplete = false;
  std::string error;

  std::vector<bool> TcVerdicts() const;
  std::vector<bool> ScVerdicts() const;
};

struct PassAtKReport {
  std::map<int, double> tc;  // k -> percentage of complete records.
  std::map<int, double> sc;
  int n_records = 0;
  int n_incomplete = 0;
  std::string config_digest;
};

// Rates over complete sets for every k in kPassKs not above k_max.
PassAtKReport Aggregate(const std::vector<CandidateSet>& sets, int k_max,
                        std::string config_digest);

struct EvalOptions {
  int k_max = 32;
  int retrieval_k = 5;
  int equiv_attempts = 5;
  double temperature = 1.0;
  int max_tokens = 4096;
  std::string prompt_template = "sft.v1";
  std::string equiv_template = "equiv.v1";
  std::size_t workers = 1;
  std::string config_digest;
};

struct EvalResult {
  PassAtKReport report;
  std::vector<CandidateSet> sets;  // Test corpus order.
};

// For each test record: retrieve demonstrations from `index` (the training
// bank) with the record's NL embedding, sample k_max candidates, type-check
// all, and prove equivalence to the gold theorem for the type-correct ones.
EvalResult Evaluate(const corpus::Corpus& test_corpus,
                    const corpus::Corpus& train_corpus,
                    const retrieval::RetrievalIndex& index,
                    const embed::BaseEmbeddingSet& base,
                    const train::Heads& heads,
                    gen::GenerationClient& generator,
                    lean::VerifierBackend& backend,
                    gen::GenerationClient& judge,
                    const gen::TemplateStore& templates,
                    const EvalOptions& options);

nlohmann::ordered_json ToJson(const PassAtKReport& report);
PassAtKReport ReportFromJson(const nlohmann::json& j);
nlohmann::ordered_json ToJson(const CandidateSet& set);

enum class ReportFormat { kJson, kTable };

std::string FormatPassAtKTable(const PassAtKReport& report);
std::string RenderReport(const PassAtKReport& report, ReportFormat format);
void EmitReport(const PassAtKReport& report, ReportFormat format,
                const std::filesystem::path& path);

}  // namespace pb::eval

#endif  // PB_EVALHARNESS_H_
