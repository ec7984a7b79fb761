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

#include "pb/evalharness.h"

#include <algorithm>
#include <cstdio>

#include "pb/equivalence.h"
#include "pb/error.h"
#include "pb/lean_syntax.h"
#include "pb/prompting.h"
#include "pb/util.h"

namespace pb::eval {
namespace {

using nlohmann::ordered_json;

std::string Fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

CandidateSet EvaluateRecord(const corpus::NlFlRecord& rec,
                            const corpus::Corpus& train_corpus,
                            const retrieval::RetrievalIndex& index,
                            const embed::BaseEmbeddingSet& base,
                            const train::Heads& heads,
                            gen::GenerationClient& generator,
                            lean::VerifierBackend& backend,
                            gen::GenerationClient& judge,
                            const gen::TemplateStore& templates,
                            const EvalOptions& options) {
  CandidateSet set;
  set.record_id = rec.id;
  try {
    std::vector<retrieval::RetrievalHit> hits;
    const int k = std::min<int>(options.retrieval_k,
                                static_cast<int>(index.size()));
    if (k > 0) {
      hits = retrieval::Query(index, embed::EmbedNl(rec.id, base, heads.f), k,
                              retrieval::Target::kFl);
    }
    gen::PromptContext ctx = gen::AssembleContext(
        rec.nl, hits, train_corpus, options.prompt_template, templates);
    gen::GenerationRequest req;
    req.prompt = gen::RenderPrompt(ctx, templates);
    req.n_samples = options.k_max;
    req.temperature = options.temperature;
    req.max_tokens = options.max_tokens;
    gen::GenerationResponse resp = generator.Generate(req);
    for (const std::string& text : resp.candidates) {
      corpus::TheoremProofPair fl = gen::ParseFlCandidate(text);
      fl.source_id = rec.id;
      CandidateVerdict v;
      v.tc = lean::CheckTypeCorrect(fl, backend).type_correct;
      if (v.tc) {
        lean::EquivalenceOptions eo;
        eo.attempt_budget = options.equiv_attempts;
        eo.template_id = options.equiv_template;
        v.sc = lean::CheckEquivalence(fl.theorem, rec.fl.theorem, judge,
                                      backend, templates, eo)
                   .equivalent;
      }
      set.candidates.push_back(std::move(fl));
      set.verdicts.push_back(v);
    }
  } catch (const Error& e) {
    if (!e.is_transport()) throw;
    set.incomplete = true;
    set.error = e.what();
  }
  return set;
}

}  // namespace

bool PassAtK(const std::vector<bool>& verdicts, int k) {
  const std::size_t n =
      std::min(verdicts.size(), static_cast<std::size_t>(std::max(k, 0)));
  return std::any_of(verdicts.begin(), verdicts.begin() + n,
                     [](bool b) { return b; });
}

std::vector<bool> CandidateSet::TcVerdicts() const {
  std::vector<bool> out;
  for (const auto& v : verdicts) out.push_back(v.tc);
  return out;
}

std::vector<bool> CandidateSet::ScVerdicts() const {
  std::vector<bool> out;
  for (const auto& v : verdicts) out.push_back(v.tc && v.sc.value_or(false));
  return out;
}

PassAtKReport Aggregate(const std::vector<CandidateSet>& sets, int k_max,
                        std::string config_digest) {
  PassAtKReport r;
  r.config_digest = std::move(config_digest);
  std::vector<const CandidateSet*> complete;
  for (const auto& s : sets) {
    if (s.incomplete) {
      ++r.n_incomplete;
    } else {
      complete.push_back(&s);
    }
  }
  r.n_records = static_cast<int>(complete.size());
  for (int k : kPassKs) {
    if (k > k_max) break;
    if (complete.empty()) {
      r.tc[k] = 0.0;
      r.sc[k] = 0.0;
      continue;
    }
    int tc = 0, sc = 0;
    for (const CandidateSet* s : complete) {
      tc += PassAtK(s->TcVerdicts(), k);
      sc += PassAtK(s->ScVerdicts(), k);
    }
    r.tc[k] = 100.0 * tc / static_cast<double>(complete.size());
    r.sc[k] = 100.0 * sc / static_cast<double>(complete.size());
  }
  return r;
}

EvalResult Evaluate(const corpus::Corpus& test_corpus,
                    const corpus::Corpus& train_corpus,
                    const retrieval::RetrievalIndex& index,
                    const embed::BaseEmbeddingSet& base,
                    const train::Heads& heads,
                    gen::GenerationClient& generator,
                    lean::VerifierBackend& backend,
                    gen::GenerationClient& judge,
                    const gen::TemplateStore& templates,
                    const EvalOptions& options) {
  if (options.k_max < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k_max must be >= 1");
  }
  const auto& records = test_corpus.records();
  std::vector<CandidateSet> sets(records.size());
  ParallelFor(records.size(), options.workers, [&](std::size_t i) {
    sets[i] = EvaluateRecord(records[i], train_corpus, index, base, heads,
                             generator, backend, judge, templates, options);
  });
  EvalResult result;
  result.report = Aggregate(sets, options.k_max, options.config_digest);
  result.sets = std::move(sets);
  return result;
}

ordered_json ToJson(const PassAtKReport& r) {
  ordered_json tc = ordered_json::object();
  ordered_json sc = ordered_json::object();
  for (const auto& [k, v] : r.tc) tc[std::to_string(k)] = v;
  for (const auto& [k, v] : r.sc) sc[std::to_string(k)] = v;
  return {{"metrics", {{"tc", tc}, {"sc", sc}}},
          {"n_records", r.n_records},
          {"n_incomplete", r.n_incomplete},
          {"config_digest", r.config_digest}};
}

PassAtKReport ReportFromJson(const nlohmann::json& j) {
  PassAtKReport r;
  try {
    for (const auto& [k, v] : j.at("metrics").at("tc").items()) {
      r.tc[std::stoi(k)] = v.get<double>();
    }
    for (const auto& [k, v] : j.at("metrics").at("sc").items()) {
      r.sc[std::stoi(k)] = v.get<double>();
    }
    r.n_records = j.at("n_records").get<int>();
    r.n_incomplete = j.at("n_incomplete").get<int>();
    r.config_digest = j.at("config_digest").get<std::string>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed report: ") + e.what());
  }
  return r;
}

ordered_json ToJson(const CandidateSet& s) {
  ordered_json cands = ordered_json::array();
  for (std::size_t i = 0; i < s.candidates.size(); ++i) {
    const auto& v = s.verdicts[i];
    cands.push_back({{"theorem", s.candidates[i].theorem},
                     {"proof", s.candidates[i].proof},
                     {"tc", v.tc},
                     {"sc", v.sc ? ordered_json(*v.sc) : ordered_json(nullptr)}});
  }
  ordered_json j = {{"id", s.record_id},
                    {"incomplete", s.incomplete},
                    {"candidates", cands}};
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

std::string FormatPassAtKTable(const PassAtKReport& r) {
  std::vector<int> ks;
  for (const auto& [k, v] : r.tc) ks.push_back(k);
  auto cell = [](std::string s) {
    s.resize(std::max<std::size_t>(s.size(), 9), ' ');
    return s;
  };
  std::string groups = cell("") + "| SC (%)";
  std::string header = cell("metric") + "|";
  for (int k : ks) header += " " + cell("pass@" + std::to_string(k));
  header += " |";
  for (int k : ks) header += " " + cell("pass@" + std::to_string(k));
  groups.resize(header.find('|', header.find('|') + 1), ' ');
  groups += "| TC (%)";
  std::string row = cell("rate") + "|";
  for (int k : ks) row += " " + cell(Fixed2(r.sc.at(k)));
  row += " |";
  for (int k : ks) row += " " + cell(Fixed2(r.tc.at(k)));
  auto rstrip = [](std::string s) {
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s;
  };
  std::string out = rstrip(groups) + "\n" + rstrip(header) + "\n";
  if (r.n_records > 0) out += rstrip(row) + "\n";
  return out;
}

std::string RenderReport(const PassAtKReport& report, ReportFormat format) {
  if (format == ReportFormat::kJson) return ToJson(report).dump(2) + "\n";
  return FormatPassAtKTable(report);
}

void EmitReport(const PassAtKReport& report, ReportFormat format,
                const std::filesystem::path& path) {
  WriteFileAtomic(path, RenderReport(report, format));
}

}  // namespace pb::eval
