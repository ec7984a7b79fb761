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

#include "pb/corpus.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "pb/error.h"
#include "pb/lean_syntax.h"
#include "pb/util.h"

namespace pb::corpus {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string RequireString(const json& obj, const char* field,
                          std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) {
    throw Error(ErrorCode::kMissingField,
                std::string(field) + " (line " + std::to_string(line_no) + ")",
                field);
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedLine,
                "line " + std::to_string(line_no) + ": " + field +
                    " is not a string",
                std::to_string(line_no));
  }
  return it->get<std::string>();
}

std::string OptionalString(const json& obj, const char* field,
                           std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw Error(ErrorCode::kMalformedLine,
                "line " + std::to_string(line_no) + ": " + field +
                    " is not a string",
                std::to_string(line_no));
  }
  return it->get<std::string>();
}

Error Malformed(std::size_t line_no, const std::string& why) {
  return Error(ErrorCode::kMalformedLine,
               "line " + std::to_string(line_no) + ": " + why,
               std::to_string(line_no));
}

NlFlRecord ParseRecordLine(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Malformed(line_no, e.what());
  }
  if (!obj.is_object()) throw Malformed(line_no, "not a JSON object");

  NlFlRecord r;
  r.id = RequireString(obj, "id", line_no);
  if (Trim(r.id).empty()) throw Malformed(line_no, "empty id");
  r.nl.modality = Modality::kNl;
  r.nl.theorem = RequireString(obj, "nl_theorem", line_no);
  r.nl.proof = OptionalString(obj, "nl_proof", line_no);
  r.nl.source_id = r.id;
  r.fl.modality = Modality::kFl;
  r.fl.theorem = RequireString(obj, "fl_theorem", line_no);
  r.fl.proof = OptionalString(obj, "fl_proof", line_no);
  r.fl.source_id = r.id;

  if (Trim(r.nl.theorem).empty()) throw Malformed(line_no, "empty nl_theorem");
  if (!lean::LooksLikeTheoremHeader(r.fl.theorem)) {
    throw Malformed(line_no,
                    "fl_theorem is not a theorem/lemma declaration header");
  }

  if (auto it = obj.find("sketch"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) throw Malformed(line_no, "sketch is not a string");
    r.sketch = it->get<std::string>();
  }
  if (auto it = obj.find("flags"); it != obj.end() && !it->is_null()) {
    if (!it->is_object()) throw Malformed(line_no, "flags is not an object");
    auto flag = [&](const char* name) {
      auto f = it->find(name);
      if (f == it->end() || f->is_null()) return false;
      if (!f->is_boolean()) {
        throw Malformed(line_no, std::string("flag ") + name +
                                     " is not a boolean");
      }
      return f->get<bool>();
    };
    r.flags.fl_verified = flag("fl_verified");
    r.flags.fl_repaired = flag("fl_repaired");
    r.flags.nl_proof_informalized = flag("nl_proof_informalized");
  }
  return r;
}

}  // namespace

Corpus::Corpus(std::vector<NlFlRecord> records, std::string lean_toolchain)
    : records_(std::move(records)), lean_toolchain_(std::move(lean_toolchain)) {
  index_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!index_.emplace(records_[i].id, i).second) {
      throw Error(ErrorCode::kDuplicateId, records_[i].id, records_[i].id);
    }
  }
}

const NlFlRecord* Corpus::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &records_[it->second];
}

const NlFlRecord& Corpus::At(std::string_view id) const {
  const auto* r = Find(id);
  if (r == nullptr) {
    throw Error(ErrorCode::kUnknownId, std::string(id), std::string(id));
  }
  return *r;
}

std::vector<std::string> Corpus::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(records_.size());
  for (const auto& r : records_) ids.push_back(r.id);
  return ids;
}

Corpus ParseCorpus(std::string_view text) {
  std::vector<NlFlRecord> records;
  std::size_t line_no = 0;
  for (const auto& line : SplitLines(text)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    records.push_back(ParseRecordLine(line, line_no));
  }
  return Corpus(std::move(records));
}

Corpus LoadCorpus(const std::filesystem::path& path) {
  return ParseCorpus(ReadFile(path));
}

std::string SerializeRecord(const NlFlRecord& r) {
  ordered_json obj;
  obj["id"] = r.id;
  obj["nl_theorem"] = r.nl.theorem;
  obj["nl_proof"] = r.nl.proof;
  obj["fl_theorem"] = r.fl.theorem;
  obj["fl_proof"] = r.fl.proof;
  obj["sketch"] = r.sketch ? ordered_json(*r.sketch) : ordered_json(nullptr);
  ordered_json flags;
  flags["fl_verified"] = r.flags.fl_verified;
  flags["fl_repaired"] = r.flags.fl_repaired;
  flags["nl_proof_informalized"] = r.flags.nl_proof_informalized;
  obj["flags"] = std::move(flags);
  return obj.dump();
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.records()) {
    out += SerializeRecord(r);
    out.push_back('\n');
  }
  return out;
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  WriteFileAtomic(path, SerializeCorpus(corpus));
}

std::vector<SketchEntry> ParseSketches(std::string_view text) {
  std::vector<SketchEntry> out;
  std::size_t line_no = 0;
  for (const auto& line : SplitLines(text)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Malformed(line_no, e.what());
    }
    if (!obj.is_object()) throw Malformed(line_no, "not a JSON object");
    out.push_back({RequireString(obj, "problem", line_no),
                   RequireString(obj, "solution", line_no)});
  }
  return out;
}

std::vector<SketchEntry> LoadSketches(const std::filesystem::path& path) {
  return ParseSketches(ReadFile(path));
}

Corpus MatchSketches(const Corpus& corpus,
                     const std::vector<SketchEntry>& sketches) {
  std::unordered_map<std::string, std::size_t> first;
  first.reserve(sketches.size());
  for (std::size_t i = 0; i < sketches.size(); ++i) {
    first.emplace(NormalizeLineEndings(sketches[i].problem), i);
  }
  std::vector<NlFlRecord> out = corpus.records();
  for (auto& r : out) {
    auto it = first.find(NormalizeLineEndings(r.nl.theorem));
    if (it != first.end()) r.sketch = sketches[it->second].solution;
  }
  return Corpus(std::move(out), corpus.lean_toolchain());
}

std::size_t TrainSize(std::size_t n, double train_fraction) {
  return static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n) + 0.5));
}

std::pair<Corpus, Corpus> Split(const Corpus& corpus, double train_fraction,
                                std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "train_fraction must lie in (0, 1)");
  }
  const std::size_t n = corpus.size();
  if (n == 0) throw Error(ErrorCode::kEmptyCorpus, "cannot split");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  const std::size_t n_train = std::min(n, TrainSize(n, train_fraction));
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + n_train);
  std::vector<std::size_t> test_idx(perm.begin() + n_train, perm.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  auto gather = [&](const std::vector<std::size_t>& idx) {
    std::vector<NlFlRecord> rs;
    rs.reserve(idx.size());
    for (auto i : idx) rs.push_back(corpus.records()[i]);
    return Corpus(std::move(rs), corpus.lean_toolchain());
  };
  return {gather(train_idx), gather(test_idx)};
}

}  // namespace pb::corpus
