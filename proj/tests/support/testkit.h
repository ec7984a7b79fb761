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

#ifndef PB_TESTS_SUPPORT_TESTKIT_H_
#define PB_TESTS_SUPPORT_TESTKIT_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "pb/corpus.h"
#include "pb/embed.h"
#include "pb/repair.h"
#include "pb/retrieval.h"

namespace pb::testkit {

std::filesystem::path FixtureDir();

// Lines of `text` with blank ones dropped.
std::vector<std::string> NonEmptyLines(std::string_view text);

// Fresh empty directory under the system temp dir; removed by the caller.
std::filesystem::path MakeTempDir(const std::string& tag);

struct SyntheticOptions {
  int latent_dim = 8;
  int nl_dim = embed::kNlDim;
  int fl_dim = embed::kFlDim;
  double noise = 0.05;
  int min_states = 2;
  int max_states = 4;
};

// Paired base embeddings from a shared latent: z ~ N(0, I), NL = A z + e,
// each FL state = B z + e, with A and B drawn entrywise from N(0, 1/latent).
// Ids are `<prefix>NNNN`.
embed::BaseEmbeddingSet MakeSyntheticBase(int n_pairs, std::uint64_t seed,
                                          const std::string& prefix = "s",
                                          SyntheticOptions options = {});
embed::BaseEmbeddingSet MakeSyntheticBase(const std::vector<std::string>& ids,
                                          std::uint64_t seed,
                                          SyntheticOptions options = {});

// Records r00..r{n-1} with markers the scripted mocks key on.
//   * ids divisible by 5 have a BROKEN FL proof; r05 cannot be repaired;
//   * ids divisible by 3 have no NL proof.
corpus::Corpus MakeSyntheticCorpus(int n);
std::string MarkerOf(const std::string& id);
std::string GoldTheorem(const std::string& id);

// Writes corpus.jsonl, embeddings/, generator and judge scripts and
// pipeline.toml into `dir`. Returns the config path.
std::filesystem::path WritePipelineWorkspace(const std::filesystem::path& dir,
                                             int n_records, std::uint64_t seed);

struct GradCheck {
  double max_relative_error = 0.0;
  double loss = 0.0;
};

// Central finite differences (step h) of BatchLoss against LossGradients on
// a random batch, over every weight and bias of both heads. The error for a
// tensor is max|analytic - numeric| / max(max|analytic|, max|numeric|); the
// result is the worst tensor.
GradCheck CheckGradients(int n, int d_in, int d, double temperature,
                         std::uint64_t seed, double h = 1e-6);

// Random unit rows on both sides. A fraction of rows copy an earlier row so
// that exact score ties occur.
retrieval::RetrievalIndex RandomIndex(int n, int d, std::uint64_t seed,
                                      double duplicate_fraction = 0.0);
embed::JointVector RandomUnitVector(int d, std::mt19937_64& rng);

// Scores every row with a plain loop, sorts all of them by (score desc,
// id asc) and keeps the first k.
std::vector<retrieval::RetrievalHit> BruteForceQuery(
    const retrieval::RetrievalIndex& index, const embed::JointVector& q, int k,
    retrieval::Target target, const std::string& exclude_id = "");

// One repair run against scripted doubles. Round r verifies candidate `c<r>`;
// its syntax and semantics outcomes come from the schedule.
struct RepairSchedule {
  std::vector<bool> syntax_ok;
  std::vector<bool> semantics_ok;
  bool short_circuit = false;
  int r_max = 5;
  int FirstSuccess() const;  // -1 when no round within r_max succeeds.
};
struct ScheduleRun {
  repair::RepairOutcome outcome;
  int verifier_calls = 0;
  int generator_calls = 0;
  int semantics_calls = 0;
};
RepairSchedule RandomRepairSchedule(std::mt19937_64& rng);
ScheduleRun RunRepairSchedule(const RepairSchedule& schedule);
// Empty when the run honours the loop contract, else a description.
std::string RepairContractViolation(const RepairSchedule& schedule,
                                    const ScheduleRun& run);

struct GeneratedScript {
  std::string text;
  bool expected_accept = false;
};

// Random tactic script over whitelisted and foreign tactics with random
// arguments and separators. `expected_accept` is computed from the generated
// structure, not by parsing the text.
GeneratedScript RandomTacticScript(std::mt19937_64& rng);

}  // namespace pb::testkit

#endif  // PB_TESTS_SUPPORT_TESTKIT_H_
