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

#ifndef PB_CURATE_H_
#define PB_CURATE_H_

#include <string>

#include "json.hpp"
#include "pb/client.h"
#include "pb/corpus.h"
#include "pb/lean_bridge.h"
#include "pb/templates.h"

namespace pb::corpus {

struct CurationReport {
  int initially_failing = 0;
  int repaired = 0;
  int dropped = 0;
  int informalized = 0;

  nlohmann::ordered_json ToJson() const;
  std::string Summary() const;
  bool operator==(const CurationReport&) const = default;
};

struct CurationOptions {
  int max_repair_rounds = 5;
  std::size_t workers = 1;
  std::string repair_template = "curate_repair.v1";
  std::string informalize_template = "informalize.v1";
};

struct CurationResult {
  Corpus corpus;
  CurationReport report;
};

// Type-checks every FL pair, asks `repair_client` to fix failures (with the
// diagnostics in the prompt) up to max_repair_rounds re-verifications, drops
// records that never verify, and fills missing NL proofs through
// `informalizer`. Any transport failure aborts the whole run.
CurationResult Curate(const Corpus& input, lean::VerifierBackend& verifier,
                      gen::GenerationClient& repair_client,
                      gen::GenerationClient& informalizer,
                      const gen::TemplateStore& templates,
                      const CurationOptions& options = {});

}  // namespace pb::corpus

#endif  // PB_CURATE_H_
