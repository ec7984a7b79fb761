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

#include "pb/curate.h"

#include <optional>

#include "pb/error.h"
#include "pb/lean_syntax.h"
#include "pb/prompting.h"
#include "pb/util.h"

namespace pb::corpus {
namespace {

struct RecordResult {
  std::optional<NlFlRecord> record;
  bool initially_failing = false;
  bool repaired = false;
  bool informalized = false;
};

std::string Diagnostics(const lean::VerificationReport& report) {
  std::string out;
  for (const auto& d : report.diagnostics) {
    out += std::string(lean::SeverityName(d.severity)) + " at line " +
           std::to_string(d.line) + ", column " + std::to_string(d.column) +
           ": " + d.message + "\n";
  }
  if (report.uses_sorry) out += "the proof uses sorry\n";
  return out;
}

std::string FirstCandidate(gen::GenerationClient& client,
                           const std::string& prompt) {
  gen::GenerationRequest req;
  req.prompt = prompt;
  req.n_samples = 1;
  req.temperature = 0.0;
  gen::GenerationResponse resp = client.Generate(req);
  return resp.candidates.empty() ? std::string() : resp.candidates.front();
}

RecordResult CurateRecord(const NlFlRecord& input,
                          lean::VerifierBackend& verifier,
                          gen::GenerationClient& repair_client,
                          gen::GenerationClient& informalizer,
                          const gen::TemplateStore& templates,
                          const CurationOptions& options) {
  RecordResult out;
  NlFlRecord rec = input;
  lean::VerificationReport report = lean::CheckTypeCorrect(rec.fl, verifier);
  if (!report.type_correct) {
    out.initially_failing = true;
    const gen::Template& tmpl = templates.Get(options.repair_template);
    for (int round = 0; round < options.max_repair_rounds; ++round) {
      std::string reply = FirstCandidate(
          repair_client,
          tmpl.Render({{"nl_theorem", rec.nl.theorem},
                       {"fl_source", lean::FlSource(rec.fl.theorem, rec.fl.proof)},
                       {"diagnostics", Diagnostics(report)}}));
      TheoremProofPair fixed = gen::ParseFlCandidate(reply);
      fixed.source_id = rec.fl.source_id;
      report = lean::CheckTypeCorrect(fixed, verifier);
      rec.fl = std::move(fixed);
      if (report.type_correct) {
        out.repaired = true;
        rec.flags.fl_repaired = true;
        break;
      }
    }
    if (!report.type_correct) return out;
  }
  rec.flags.fl_verified = true;
  if (Trim(rec.nl.proof).empty()) {
    const gen::Template& tmpl = templates.Get(options.informalize_template);
    rec.nl.proof = std::string(Trim(FirstCandidate(
        informalizer, tmpl.Render({{"fl_theorem", rec.fl.theorem},
                                   {"fl_proof", rec.fl.proof},
                                   {"nl_theorem", rec.nl.theorem},
                                   {"sketch", rec.sketch.value_or("")}}))));
    if (rec.nl.proof.empty()) {
      throw Error(ErrorCode::kUnavailable,
                  "informalizer returned no proof for " + rec.id);
    }
    rec.flags.nl_proof_informalized = true;
    out.informalized = true;
  }
  out.record = std::move(rec);
  return out;
}

}  // namespace

nlohmann::ordered_json CurationReport::ToJson() const {
  return {{"initially_failing", initially_failing},
          {"repaired", repaired},
          {"dropped", dropped},
          {"informalized", informalized}};
}

std::string CurationReport::Summary() const {
  return "initially failing: " + std::to_string(initially_failing) +
         "\nrepaired: " + std::to_string(repaired) +
         "\ndropped: " + std::to_string(dropped) +
         "\ninformalized: " + std::to_string(informalized) + "\n";
}

CurationResult Curate(const Corpus& input, lean::VerifierBackend& verifier,
                      gen::GenerationClient& repair_client,
                      gen::GenerationClient& informalizer,
                      const gen::TemplateStore& templates,
                      const CurationOptions& options) {
  if (options.max_repair_rounds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_repair_rounds must be >= 1");
  }
  const auto& records = input.records();
  std::vector<RecordResult> results(records.size());
  ParallelFor(records.size(), options.workers, [&](std::size_t i) {
    results[i] = CurateRecord(records[i], verifier, repair_client,
                              informalizer, templates, options);
  });
  CurationResult out;
  std::vector<NlFlRecord> kept;
  for (auto& r : results) {
    out.report.initially_failing += r.initially_failing;
    out.report.repaired += r.repaired;
    out.report.informalized += r.informalized;
    if (r.record) {
      kept.push_back(std::move(*r.record));
    } else {
      ++out.report.dropped;
    }
  }
  out.corpus = Corpus(std::move(kept), input.lean_toolchain());
  return out;
}

}  // namespace pb::corpus
