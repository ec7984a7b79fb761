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

#ifndef PB_RETRIEVAL_H_
#define PB_RETRIEVAL_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pb/embed.h"
#include "pb/train.h"

namespace pb::retrieval {

using embed::Matrix;
using embed::Vector;

enum class Target { kFl, kNl };
enum class Direction { kNlToFl, kFlToNl };

std::string_view DirectionName(Direction d);

struct RetrievalIndex {
  std::vector<std::string> ids;
  Matrix nl_bank;  // One unit row per id.
  Matrix fl_bank;
  std::string head_digest;

  std::size_t size() const { return ids.size(); }
  const Matrix& Bank(Target target) const {
    return target == Target::kFl ? fl_bank : nl_bank;
  }
  // Row of `id`; throws UnknownId.
  std::size_t RowOf(const std::string& id) const;
  embed::JointVector Row(Target side, std::size_t row) const;
  void Validate() const;
};

RetrievalIndex BuildIndex(const std::vector<std::string>& ids,
                          const embed::BaseEmbeddingSet& base,
                          const train::Heads& heads,
                          embed::EmbedOptions options = {});

// `<dir>/nl_bank.pbvec`, `<dir>/fl_bank.pbvec`, `<dir>/index.json`.
void SaveIndex(const RetrievalIndex& index, const std::filesystem::path& dir);
RetrievalIndex LoadIndex(const std::filesystem::path& dir);

struct RetrievalHit {
  std::string id;
  double score = 0.0;
  int rank = 0;
};

struct QueryOptions {
  // Skipped entirely, as if absent from the bank.
  std::optional<std::string> exclude_id;
};

// Exact top-k over the target bank, ordered by (score desc, id asc).
std::vector<RetrievalHit> Query(const RetrievalIndex& index,
                                const embed::JointVector& q, int k,
                                Target target, const QueryOptions& options = {});

// For every index row, the rank at which its own counterpart appears when
// the row is used as a query in `direction`.
std::vector<int> CounterpartRanks(const RetrievalIndex& index,
                                  Direction direction);

double RecallAtK(const std::vector<int>& ranks, int k);  // Percentage.
double Mrr(const std::vector<int>& ranks);

// Linear interpolation between closest ranks over sorted ascending values.
double Quantile(std::vector<double> values, double p);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

Quartiles QuartilesOf(const std::vector<double>& values);

struct SimilaritySummary {
  Quartiles retrieved;
  std::optional<Quartiles> non_retrieved;  // Absent when k = N.
};

// Per query, quartiles of the top-k scores and of the rest, averaged over
// queries. Every index row serves as a query.
SimilaritySummary SimilarityQuantiles(const RetrievalIndex& index,
                                      Direction direction, int k);

inline const std::vector<int> kDefaultRecallKs = {1, 5, 10, 20, 50};

struct RetrievalMetricsReport {
  Direction direction = Direction::kNlToFl;
  int n_queries = 0;
  std::map<int, double> recall_at;
  double mrr = 0.0;
  std::map<int, Quartiles> retrieved_quantiles;
  std::map<int, std::optional<Quartiles>> non_retrieved_quantiles;
};

// Ks greater than the index size are skipped.
RetrievalMetricsReport EvaluateRetrieval(
    const RetrievalIndex& index, Direction direction,
    const std::vector<int>& ks = kDefaultRecallKs);

nlohmann::ordered_json ToJson(const RetrievalMetricsReport& report);
RetrievalMetricsReport RetrievalReportFromJson(const nlohmann::json& j);
std::string FormatTable(const std::vector<RetrievalMetricsReport>& reports);

}  // namespace pb::retrieval

#endif  // PB_RETRIEVAL_H_
