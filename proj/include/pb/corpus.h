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

#ifndef PB_CORPUS_H_
#define PB_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pb::corpus {

enum class Modality { kNl, kFl };

struct TheoremProofPair {
  Modality modality = Modality::kNl;
  std::string theorem;
  std::string proof;  // May be empty for statement-only records.
  std::string source_id;
};

struct RecordFlags {
  bool fl_verified = false;
  bool fl_repaired = false;
  bool nl_proof_informalized = false;

  bool operator==(const RecordFlags&) const = default;
};

struct NlFlRecord {
  std::string id;
  TheoremProofPair nl;
  TheoremProofPair fl;
  std::optional<std::string> sketch;
  RecordFlags flags;
};

inline constexpr std::string_view kDefaultLeanToolchain = "v4.15.0";

// An ordered, id-unique collection of records. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  // Throws DuplicateId if two records share an id.
  explicit Corpus(std::vector<NlFlRecord> records,
                  std::string lean_toolchain =
                      std::string(kDefaultLeanToolchain));

  const std::vector<NlFlRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::string& lean_toolchain() const { return lean_toolchain_; }

  // Null when absent.
  const NlFlRecord* Find(std::string_view id) const;
  // Throws UnknownId when absent.
  const NlFlRecord& At(std::string_view id) const;

  std::vector<std::string> Ids() const;

 private:
  std::vector<NlFlRecord> records_;
  std::string lean_toolchain_ = std::string(kDefaultLeanToolchain);
  std::unordered_map<std::string, std::size_t> index_;
};

struct SketchEntry {
  std::string problem;
  std::string solution;
};

// JSON-lines records file. Blank lines are skipped; errors report 1-based
// line numbers.
Corpus ParseCorpus(std::string_view text);
Corpus LoadCorpus(const std::filesystem::path& path);

std::string SerializeRecord(const NlFlRecord& record);
// Canonical form: fixed key order, one record per line, trailing newline.
std::string SerializeCorpus(const Corpus& corpus);
void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path);

std::vector<SketchEntry> ParseSketches(std::string_view text);
std::vector<SketchEntry> LoadSketches(const std::filesystem::path& path);

// Sets `sketch` on every record whose NL theorem equals a sketch problem
// byte for byte after CRLF -> LF. First match in `sketches` order wins.
// Records without a match keep whatever sketch they already had.
Corpus MatchSketches(const Corpus& corpus,
                     const std::vector<SketchEntry>& sketches);

// Train size is round-half-up(train_fraction * N). Both halves keep corpus
// order. Deterministic for a fixed seed.
std::pair<Corpus, Corpus> Split(const Corpus& corpus, double train_fraction,
                                std::uint64_t seed);

std::size_t TrainSize(std::size_t n, double train_fraction);

}  // namespace pb::corpus

#endif  // PB_CORPUS_H_
