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

#include "pb/retrieval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <unordered_set>

#include "pb/error.h"
#include "pb/tensor_io.h"
#include "pb/util.h"

namespace pb::retrieval {
namespace {

using nlohmann::ordered_json;

Target TargetOf(Direction d) {
  return d == Direction::kNlToFl ? Target::kFl : Target::kNl;
}
Target SourceOf(Direction d) {
  return d == Direction::kNlToFl ? Target::kNl : Target::kFl;
}

Vector Scores(const Matrix& bank, const Vector& q) {
  Vector s = bank * q;
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::clamp(s(i), -1.0, 1.0);
  return s;
}

io::Tensor BankTensor(const Matrix& bank, const std::vector<std::string>& ids) {
  io::Tensor t;
  t.dtype = io::DType::kF64;
  t.shape = {bank.rows(), bank.cols()};
  t.ids = ids;
  t.data.reserve(static_cast<std::size_t>(bank.size()));
  for (Eigen::Index r = 0; r < bank.rows(); ++r) {
    for (Eigen::Index c = 0; c < bank.cols(); ++c) t.data.push_back(bank(r, c));
  }
  return t;
}

Matrix BankFromTensor(const io::Tensor& t) {
  if (t.shape.size() != 2) {
    throw Error(ErrorCode::kDimensionMismatch, "index bank must be 2-d");
  }
  Matrix m(t.shape[0], t.shape[1]);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = t.data[static_cast<std::size_t>(r * m.cols() + c)];
    }
  }
  return m;
}

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

ordered_json QuartilesJson(const Quartiles& q) {
  return {{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
}

}  // namespace

std::string_view DirectionName(Direction d) {
  return d == Direction::kNlToFl ? "NL->FL" : "FL->NL";
}

std::size_t RetrievalIndex::RowOf(const std::string& id) const {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw Error(ErrorCode::kUnknownId, "not indexed: " + id);
  return static_cast<std::size_t>(it - ids.begin());
}

embed::JointVector RetrievalIndex::Row(Target side, std::size_t row) const {
  return {Bank(side).row(static_cast<Eigen::Index>(row)).transpose(), true};
}

void RetrievalIndex::Validate() const {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (nl_bank.rows() != n || fl_bank.rows() != n ||
      nl_bank.cols() != fl_bank.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "index banks disagree with ids");
  }
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw Error(ErrorCode::kDuplicateId, id);
  }
  for (const Matrix* bank : {&nl_bank, &fl_bank}) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(bank->row(i).norm() - 1.0) > embed::kUnitTolerance) {
        throw Error(ErrorCode::kNotNormalized,
                    "index row for " + ids[static_cast<std::size_t>(i)] +
                        " is not unit length");
      }
    }
  }
}

RetrievalIndex BuildIndex(const std::vector<std::string>& ids,
                          const embed::BaseEmbeddingSet& base,
                          const train::Heads& heads,
                          embed::EmbedOptions options) {
  RetrievalIndex index;
  index.ids = ids;
  const auto n = static_cast<Eigen::Index>(ids.size());
  index.nl_bank.resize(n, heads.f.out_dim());
  index.fl_bank.resize(n, heads.g.out_dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& id = ids[static_cast<std::size_t>(i)];
    index.nl_bank.row(i) = embed::EmbedNl(id, base, heads.f).values.transpose();
    index.fl_bank.row(i) =
        embed::EmbedFl(id, base, heads.g, options).values.transpose();
  }
  index.head_digest = train::HeadDigest(heads);
  index.Validate();
  return index;
}

void SaveIndex(const RetrievalIndex& index, const std::filesystem::path& dir) {
  index.Validate();
  io::SaveTensor(BankTensor(index.nl_bank, index.ids), dir / "nl_bank.pbvec");
  io::SaveTensor(BankTensor(index.fl_bank, index.ids), dir / "fl_bank.pbvec");
  ordered_json sidecar = {{"ids", index.ids},
                          {"head_digest", index.head_digest},
                          {"dim", index.nl_bank.cols()}};
  WriteFileAtomic(dir / "index.json", sidecar.dump(2) + "\n");
}

RetrievalIndex LoadIndex(const std::filesystem::path& dir) {
  RetrievalIndex index;
  try {
    auto sidecar = nlohmann::json::parse(ReadFile(dir / "index.json"));
    index.ids = sidecar.at("ids").get<std::vector<std::string>>();
    index.head_digest = sidecar.at("head_digest").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad index.json: ") + e.what());
  }
  io::Tensor nl = io::LoadTensor(dir / "nl_bank.pbvec");
  io::Tensor fl = io::LoadTensor(dir / "fl_bank.pbvec");
  if (nl.ids != index.ids || fl.ids != index.ids) {
    throw Error(ErrorCode::kDimensionMismatch,
                "bank ids disagree with index.json");
  }
  index.nl_bank = BankFromTensor(nl);
  index.fl_bank = BankFromTensor(fl);
  index.Validate();
  return index;
}

std::vector<RetrievalHit> Query(const RetrievalIndex& index,
                                const embed::JointVector& q, int k,
                                Target target, const QueryOptions& options) {
  if (index.size() == 0) throw Error(ErrorCode::kEmptyIndex, "index is empty");
  if (!q.normalized) {
    throw Error(ErrorCode::kNotNormalized, "query must be unit length");
  }
  const Matrix& bank = index.Bank(target);
  if (q.values.size() != bank.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim differs from index");
  }
  std::vector<std::size_t> rows;
  rows.reserve(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (options.exclude_id && index.ids[i] == *options.exclude_id) continue;
    rows.push_back(i);
  }
  if (k < 1 || static_cast<std::size_t>(k) > rows.size()) {
    throw Error(ErrorCode::kKOutOfRange,
                "k=" + std::to_string(k) + " outside [1, " +
                    std::to_string(rows.size()) + "]");
  }
  const Vector scores = Scores(bank, q.values);
  auto better = [&](std::size_t a, std::size_t b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return index.ids[a] < index.ids[b];
  };
  std::partial_sort(rows.begin(), rows.begin() + k, rows.end(), better);
  std::vector<RetrievalHit> hits;
  hits.reserve(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    std::size_t row = rows[static_cast<std::size_t>(r)];
    hits.push_back({index.ids[row], scores(row), r + 1});
  }
  return hits;
}

std::vector<int> CounterpartRanks(const RetrievalIndex& index,
                                  Direction direction) {
  if (index.size() == 0) throw Error(ErrorCode::kEmptyIndex, "index is empty");
  const Matrix& queries = index.Bank(SourceOf(direction));
  const Matrix& bank = index.Bank(TargetOf(direction));
  const Matrix sims = queries * bank.transpose();
  std::vector<int> ranks(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto qi = static_cast<Eigen::Index>(i);
    const double own = std::clamp(sims(qi, qi), -1.0, 1.0);
    int better = 0;
    for (std::size_t j = 0; j < index.size(); ++j) {
      const double s =
          std::clamp(sims(qi, static_cast<Eigen::Index>(j)), -1.0, 1.0);
      if (s > own || (s == own && index.ids[j] < index.ids[i])) ++better;
    }
    ranks[i] = better + 1;
  }
  return ranks;
}

double RecallAtK(const std::vector<int>& ranks, int k) {
  if (ranks.empty()) throw Error(ErrorCode::kEmptyInput, "no ranks");
  std::size_t hit = 0;
  for (int r : ranks) {
    if (r < 1) throw Error(ErrorCode::kInvalidArgument, "rank < 1");
    if (r <= k) ++hit;
  }
  return 100.0 * static_cast<double>(hit) / static_cast<double>(ranks.size());
}

double Mrr(const std::vector<int>& ranks) {
  if (ranks.empty()) throw Error(ErrorCode::kEmptyInput, "no ranks");
  long double sum = 0.0L;
  for (int r : ranks) {
    if (r < 1) throw Error(ErrorCode::kInvalidArgument, "rank < 1");
    sum += 1.0L / r;
  }
  return static_cast<double>(sum / ranks.size());
}

double Quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "no values");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Quartiles QuartilesOf(const std::vector<double>& values) {
  return {Quantile(values, 0.25), Quantile(values, 0.5),
          Quantile(values, 0.75)};
}

SimilaritySummary SimilarityQuantiles(const RetrievalIndex& index,
                                      Direction direction, int k) {
  const std::size_t n = index.size();
  if (n == 0) throw Error(ErrorCode::kEmptyIndex, "index is empty");
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::kKOutOfRange, "k outside [1, N]");
  }
  const Matrix& queries = index.Bank(SourceOf(direction));
  long double acc[2][3] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const embed::JointVector q{queries.row(static_cast<Eigen::Index>(i)).transpose(),
                               true};
    const Vector scores = Scores(index.Bank(TargetOf(direction)), q.values);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores(a) != scores(b)) return scores(a) > scores(b);
      return index.ids[a] < index.ids[b];
    });
    std::vector<double> top, rest;
    for (std::size_t r = 0; r < n; ++r) {
      (r < static_cast<std::size_t>(k) ? top : rest)
          .push_back(scores(order[r]));
    }
    Quartiles t = QuartilesOf(top);
    acc[0][0] += t.q1;
    acc[0][1] += t.median;
    acc[0][2] += t.q3;
    if (!rest.empty()) {
      Quartiles o = QuartilesOf(rest);
      acc[1][0] += o.q1;
      acc[1][1] += o.median;
      acc[1][2] += o.q3;
    }
  }
  auto avg = [n](long double v) { return static_cast<double>(v / n); };
  SimilaritySummary out;
  out.retrieved = {avg(acc[0][0]), avg(acc[0][1]), avg(acc[0][2])};
  if (static_cast<std::size_t>(k) < n) {
    out.non_retrieved =
        Quartiles{avg(acc[1][0]), avg(acc[1][1]), avg(acc[1][2])};
  }
  return out;
}

RetrievalMetricsReport EvaluateRetrieval(const RetrievalIndex& index,
                                         Direction direction,
                                         const std::vector<int>& ks) {
  RetrievalMetricsReport report;
  report.direction = direction;
  const std::vector<int> ranks = CounterpartRanks(index, direction);
  report.n_queries = static_cast<int>(ranks.size());
  report.mrr = Mrr(ranks);
  for (int k : ks) {
    if (k < 1 || static_cast<std::size_t>(k) > index.size()) continue;
    report.recall_at[k] = RecallAtK(ranks, k);
    SimilaritySummary s = SimilarityQuantiles(index, direction, k);
    report.retrieved_quantiles[k] = s.retrieved;
    report.non_retrieved_quantiles[k] = s.non_retrieved;
  }
  return report;
}

ordered_json ToJson(const RetrievalMetricsReport& r) {
  ordered_json recall = ordered_json::object();
  ordered_json retrieved = ordered_json::object();
  ordered_json rest = ordered_json::object();
  for (const auto& [k, v] : r.recall_at) recall[std::to_string(k)] = v;
  for (const auto& [k, q] : r.retrieved_quantiles) {
    retrieved[std::to_string(k)] = QuartilesJson(q);
  }
  for (const auto& [k, q] : r.non_retrieved_quantiles) {
    rest[std::to_string(k)] = q ? QuartilesJson(*q) : ordered_json(nullptr);
  }
  return {{"direction", DirectionName(r.direction)},
          {"n_queries", r.n_queries},
          {"recall_at", recall},
          {"mrr", r.mrr},
          {"retrieved_quantiles", retrieved},
          {"non_retrieved_quantiles", rest}};
}

RetrievalMetricsReport RetrievalReportFromJson(const nlohmann::json& j) {
  auto quartiles = [](const nlohmann::json& q) {
    return Quartiles{q.at("q1").get<double>(), q.at("median").get<double>(),
                     q.at("q3").get<double>()};
  };
  RetrievalMetricsReport r;
  try {
    const std::string dir = j.at("direction").get<std::string>();
    if (dir == DirectionName(Direction::kNlToFl)) {
      r.direction = Direction::kNlToFl;
    } else if (dir == DirectionName(Direction::kFlToNl)) {
      r.direction = Direction::kFlToNl;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown direction " + dir);
    }
    r.n_queries = j.at("n_queries").get<int>();
    r.mrr = j.at("mrr").get<double>();
    for (const auto& [k, v] : j.at("recall_at").items()) {
      r.recall_at[std::stoi(k)] = v.get<double>();
    }
    for (const auto& [k, v] : j.at("retrieved_quantiles").items()) {
      r.retrieved_quantiles[std::stoi(k)] = quartiles(v);
    }
    for (const auto& [k, v] : j.at("non_retrieved_quantiles").items()) {
      r.non_retrieved_quantiles[std::stoi(k)] =
          v.is_null() ? std::nullopt : std::optional<Quartiles>(quartiles(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed retrieval report: ") + e.what());
  }
  return r;
}

std::string FormatTable(const std::vector<RetrievalMetricsReport>& reports) {
  std::set<int> ks;
  for (const auto& r : reports) {
    for (const auto& [k, v] : r.recall_at) ks.insert(k);
  }
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.resize(w, ' ');
    return s;
  };
  auto triple = [](const Quartiles& q, int digits) {
    return Fixed(q.q1, digits) + "/" + Fixed(q.median, digits) + "/" +
           Fixed(q.q3, digits);
  };
  std::string out = pad("Direction", 10);
  for (int k : ks) out += pad("R@" + std::to_string(k), 8);
  out += pad("MRR", 7);
  for (int k : ks) out += pad("Top" + std::to_string(k) + " Q1/M/Q3", 16);
  for (int k : ks) out += pad("Rest" + std::to_string(k) + " Q1/M/Q3", 21);
  while (!out.empty() && out.back() == ' ') out.pop_back();
  out += "\n";
  for (const auto& r : reports) {
    std::string line = pad(std::string(DirectionName(r.direction)), 10);
    for (int k : ks) {
      auto it = r.recall_at.find(k);
      line += pad(it == r.recall_at.end() ? "-" : Fixed(it->second, 2), 8);
    }
    line += pad(Fixed(r.mrr, 3), 7);
    for (int k : ks) {
      auto it = r.retrieved_quantiles.find(k);
      line += pad(it == r.retrieved_quantiles.end() ? "-" : triple(it->second, 2),
                  16);
    }
    for (int k : ks) {
      auto it = r.non_retrieved_quantiles.find(k);
      line += pad(it == r.non_retrieved_quantiles.end() || !it->second
                      ? "-"
                      : triple(*it->second, 3),
                  21);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace pb::retrieval
