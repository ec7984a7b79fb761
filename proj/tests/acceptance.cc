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

// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pb/evalharness.h"
#include "pb/lean_bridge.h"
#include "pb/lean_syntax.h"
#include "pb/mock_backend.h"
#include "pb/repl_process.h"
#include "pb/retrieval.h"
#include "pb/train.h"
#include "pb/util.h"
#include "testkit.h"

namespace pb {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Verdict {
  bool pass = true;
  std::string note;

  void Require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      note = what;
    }
  }
};

std::string Fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 -------------------------------------------------------------------------

Verdict GradientCheck() {
  Verdict v;
  const auto start = Clock::now();
  double worst = 0.0;
  int configs = 0;
  for (int n : {2, 8}) {
    for (int d_in : {6, 16}) {
      for (int d : {4, 8}) {
        for (double tau : {0.07, 1.0}) {
          const auto c = testkit::CheckGradients(n, d_in, d, tau,
                                                 1000 + 7 * n + 3 * d_in + d);
          worst = std::max(worst, c.max_relative_error);
          ++configs;
        }
      }
    }
  }
  const double elapsed = Seconds(start);
  v.Require(worst < 1e-5, "max relative error " + Fmt("%.3e", worst));
  v.Require(elapsed < 5.0, "took " + Fmt("%.2f", elapsed) + " s");
  v.note = v.pass ? std::to_string(configs) + " configs, max rel err " +
                        Fmt("%.2e", worst) + ", " + Fmt("%.2f", elapsed) + " s"
                  : v.note;
  return v;
}

// 2 -------------------------------------------------------------------------

Verdict LossClosedForms() {
  Verdict v;
  std::mt19937_64 rng(2);
  const embed::Matrix one = testkit::RandomUnitVector(5, rng).values.transpose();
  const embed::Matrix other = testkit::RandomUnitVector(5, rng).values.transpose();
  v.Require(train::ContrastiveLoss(one, other, 0.07) == 0.0, "n = 1 loss not exactly 0");
  embed::Matrix same = embed::Matrix::Zero(4, 3);
  same.col(1).setOnes();
  const double uniform = train::ContrastiveLoss(same, same, 0.07);
  v.Require(std::abs(uniform - std::log(4.0)) <= 1e-9,
            "uniform batch gave " + Fmt("%.12f", uniform));
  const embed::Matrix eye = embed::Matrix::Identity(2, 2);
  const double orth = train::ContrastiveLoss(eye, eye, 1.0);
  v.Require(std::abs(orth - std::log(1.0 + std::exp(-1.0))) <= 1e-9,
            "aligned/orthogonal batch gave " + Fmt("%.12f", orth));
  if (v.pass) v.note = "0, ln 4, ln(1 + 1/e) reproduced";
  return v;
}

// 3 -------------------------------------------------------------------------

struct AlignmentRun {
  double recall1 = 0.0;
  double mrr = 0.0;
  double untrained_recall1 = 0.0;
  double seconds = 0.0;
  std::string head_digest;
  std::string checkpoint;
  std::string index_bytes;
  std::string report;
};

AlignmentRun RunAlignment(const fs::path& scratch) {
  const auto start = Clock::now();
  AlignmentRun run;
  const auto all = testkit::MakeSyntheticBase(250, 2026);
  const std::vector<std::string> ids = all.Ids();
  const std::vector<std::string> train_ids(ids.begin(), ids.begin() + 200);
  const std::vector<std::string> held_out(ids.begin() + 200, ids.end());
  train::TrainConfig config;
  config.epochs = 10;
  const train::FitResult fit = train::Fit(all.Subset(train_ids), config);
  const auto index = retrieval::BuildIndex(held_out, all, fit.heads);
  const auto report = retrieval::EvaluateRetrieval(index, retrieval::Direction::kNlToFl, {1, 5});
  run.recall1 = report.recall_at.at(1);
  run.mrr = report.mrr;
  const auto untrained = retrieval::BuildIndex(
      held_out, all, train::InitializeHeads(all.nl_dim(), all.fl_dim(), config));
  run.untrained_recall1 =
      retrieval::EvaluateRetrieval(untrained, retrieval::Direction::kNlToFl, {1}).recall_at.at(1);
  run.seconds = Seconds(start);
  run.head_digest = train::HeadDigest(fit.heads);
  run.checkpoint = train::EncodeCheckpoint(fit.heads, config);
  fs::remove_all(scratch);
  retrieval::SaveIndex(index, scratch);
  for (const char* f : {"index.json", "nl_bank.pbvec", "fl_bank.pbvec"}) {
    run.index_bytes += ReadFile(scratch / f);
  }
  run.report = retrieval::ToJson(report).dump();
  return run;
}

Verdict SyntheticAlignment(const AlignmentRun& run) {
  Verdict v;
  v.Require(run.recall1 >= 90.0, "Recall@1 " + Fmt("%.2f", run.recall1) + "%");
  v.Require(run.mrr >= 0.93, "MRR " + Fmt("%.4f", run.mrr));
  v.Require(run.untrained_recall1 <= 20.0,
            "untrained Recall@1 " + Fmt("%.2f", run.untrained_recall1) + "%");
  v.Require(run.seconds < 60.0, "took " + Fmt("%.1f", run.seconds) + " s");
  if (v.pass) {
    v.note = "R@1 " + Fmt("%.1f", run.recall1) + "%, MRR " + Fmt("%.4f", run.mrr) +
             ", untrained R@1 " + Fmt("%.1f", run.untrained_recall1) + "%, " +
             Fmt("%.1f", run.seconds) + " s";
  }
  return v;
}

// 4 -------------------------------------------------------------------------

Verdict RetrievalOracle() {
  Verdict v;
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20 && v.pass; ++trial) {
    const auto index = testkit::RandomIndex(1000, 512, rng(), 0.05);
    const auto q = testkit::RandomUnitVector(512, rng);
    const auto target = trial % 2 ? retrieval::Target::kNl : retrieval::Target::kFl;
    const auto got = retrieval::Query(index, q, 50, target);
    const auto want = testkit::BruteForceQuery(index, q, 50, target);
    v.Require(got.size() == want.size(), "wrong hit count in trial " + std::to_string(trial));
    for (std::size_t r = 0; r < want.size() && v.pass; ++r) {
      v.Require(got[r].id == want[r].id && got[r].rank == want[r].rank,
                "trial " + std::to_string(trial) + " differs at rank " + std::to_string(r + 1));
    }
  }
  if (v.pass) v.note = "20 instances, N = 1000, d = 512, K = 50";
  return v;
}

// 5 -------------------------------------------------------------------------

Verdict MetricFixtures() {
  Verdict v;
  v.Require(std::abs(retrieval::Mrr({1, 2, 4}) - 7.0 / 12.0) < 1e-12, "MRR fixture");
  v.Require(std::abs(retrieval::RecallAtK({1, 3, 7}, 5) - 66.67) < 0.005, "Recall@5 fixture");
  v.Require(!eval::PassAtK({false, true}, 1) && eval::PassAtK({false, true}, 2),
            "pass@k fixture");
  // NL->FL scores per query: [1, s, 0], [0, s, s], [0, 0, s] with s = sqrt(1/2).
  retrieval::RetrievalIndex index;
  index.ids = {"a", "b", "c"};
  index.nl_bank = embed::Matrix::Identity(3, 3);
  const double s = std::sqrt(0.5);
  index.fl_bank.resize(3, 3);
  index.fl_bank << 1, 0, 0, s, s, 0, 0, s, s;
  const auto q = retrieval::SimilarityQuantiles(index, retrieval::Direction::kNlToFl, 1);
  v.Require(std::abs(q.retrieved.median - (1 + 2 * s) / 3) < 1e-12 && q.non_retrieved &&
                std::abs(q.non_retrieved->median - s / 3) < 1e-12,
            "similarity quantile fixture");
  if (v.pass) v.note = "MRR 7/12, R@5 66.67%, pass@1/2, quantiles";
  return v;
}

// 6 -------------------------------------------------------------------------

Verdict RepairContract() {
  Verdict v;
  std::mt19937_64 rng(6);
  int verified = 0, failed = 0;
  for (int trial = 0; trial < 1000 && v.pass; ++trial) {
    const auto schedule = testkit::RandomRepairSchedule(rng);
    const auto run = testkit::RunRepairSchedule(schedule);
    const std::string why = testkit::RepairContractViolation(schedule, run);
    v.Require(why.empty(), "schedule " + std::to_string(trial) + ": " + why);
    (run.outcome.status == repair::RepairStatus::kVerified ? verified : failed) += 1;
  }
  testkit::RepairSchedule never;
  never.syntax_ok.assign(5, false);
  never.semantics_ok.assign(5, true);
  const auto run = testkit::RunRepairSchedule(never);
  v.Require(run.outcome.status == repair::RepairStatus::kFailure &&
                run.outcome.iterations.size() == 5,
            "never-success schedule did not stop at 5 rounds");
  if (v.pass) {
    v.note = "1000 schedules (" + std::to_string(verified) + " verified, " +
             std::to_string(failed) + " failed)";
  }
  return v;
}

// 7 -------------------------------------------------------------------------

Verdict Whitelist() {
  Verdict v;
  v.Require(lean::ValidateTacticWhitelist(
                "constructor\n· intro\n  simp\n· ring\n  simp\n  intros\n  nlinarith")
                .accepted,
            "reference script rejected");
  for (const char* bad : {"simp [x]", "simp only", "linarith", "nlinarith at h"}) {
    v.Require(!lean::ValidateTacticWhitelist(bad).accepted, std::string("accepted ") + bad);
  }
  std::mt19937_64 rng(7);
  int accepted = 0;
  for (int i = 0; i < 500 && v.pass; ++i) {
    const auto script = testkit::RandomTacticScript(rng);
    const bool got = lean::ValidateTacticWhitelist(script.text).accepted;
    v.Require(got == script.expected_accept, "oracle disagrees on: " + script.text);
    accepted += got;
  }
  if (v.pass) v.note = "500 scripts, " + std::to_string(accepted) + " accepted";
  return v;
}

// 8 -------------------------------------------------------------------------

corpus::TheoremProofPair Fl(std::string theorem, std::string proof) {
  return {corpus::Modality::kFl, std::move(theorem), std::move(proof), "t"};
}

bool TraceShapeOk(const lean::ProofTrace& t) {
  return !t.tactics.empty() && t.states.size() == t.tactics.size() + 1 &&
         t.states.back().goals.empty();
}

Verdict BridgeRoundTrip() {
  Verdict v;
  lean::MockBackend::Options opts;
  opts.synthesize = false;
  lean::MockBackend mock(opts);
  mock.LoadTranscripts(testkit::FixtureDir() / "repl");
  const auto rfl = lean::CheckTypeCorrect(Fl("theorem t : 1 = 1", "rfl"), mock);
  v.Require(rfl.type_correct, "rfl fixture not type-correct");
  const auto sorry = lean::CheckTypeCorrect(Fl("theorem t : 1 = 2", "sorry"), mock);
  v.Require(sorry.uses_sorry && !sorry.type_correct, "sorry fixture misreported");
  v.Require(TraceShapeOk(lean::ExtractTrace(Fl("theorem t : 1 = 1", "by rfl"), mock)),
            "rfl trace shape");
  v.Require(TraceShapeOk(lean::ExtractTrace(
                Fl("theorem two_step (p q : Prop) (hp : p) (hq : q) : p ∧ q",
                   "by\n  constructor\n  · exact hp\n  · exact hq"),
                mock)),
            "bullet trace shape");
  if (!v.pass) return v;

  const char* cmd = std::getenv("PB_LEAN_CMD");
  if (cmd == nullptr || *cmd == '\0') {
    v.note = "fixtures ok; live part skipped (PB_LEAN_CMD unset)";
    return v;
  }
  lean::ReplPool pool(lean::ReplOptions::FromEnv());
  const std::vector<std::pair<std::string, std::string>> theorems = {
      {"theorem live1 : 2 + 2 = 4", "by rfl"},
      {"theorem live2 (n : ℕ) : n + 0 = n", "by simp"},
      {"theorem live3 (a b : ℕ) : a + b = b + a", "by ring"},
      {"theorem live4 (p q : Prop) (hp : p) (hq : q) : p ∧ q",
       "by\n  constructor\n  · exact hp\n  · exact hq"},
      {"theorem live5 (x : ℝ) : 0 ≤ x ^ 2", "by nlinarith [sq_nonneg x]"}};
  for (const auto& [theorem, proof] : theorems) {
    const auto report = lean::CheckTypeCorrect(Fl(theorem, proof), pool);
    v.Require(report.type_correct, "live: not type-correct: " + theorem);
    v.Require(TraceShapeOk(lean::ExtractTrace(Fl(theorem, proof), pool)),
              "live: bad trace for " + theorem);
  }
  const auto live_sorry = lean::CheckTypeCorrect(Fl("theorem live6 : 1 = 2", "sorry"), pool);
  v.Require(live_sorry.uses_sorry && !live_sorry.type_correct, "live: sorry misreported");
  if (v.pass) v.note = "fixtures and 5 live theorems ok";
  return v;
}

// 9 -------------------------------------------------------------------------

struct PipelineRun {
  bool ok = false;
  std::string failure;
  double seconds = 0.0;
  fs::path dir;
};

int RunCli(const fs::path& config, const std::string& args, const fs::path& log) {
  const std::string command = std::string("\"") + PB_CLI_PATH + "\" --config \"" +
                              config.string() + "\" " + args + " >>\"" + log.string() +
                              "\" 2>&1";
  return std::system(command.c_str());
}

PipelineRun RunPipeline(const fs::path& dir) {
  PipelineRun run;
  run.dir = dir;
  fs::remove_all(dir);
  const fs::path config = testkit::WritePipelineWorkspace(dir, 20, 99);
  const auto start = Clock::now();
  for (const char* stage :
       {"curate", "train-embed", "build-index", "export-sft", "autoformalize", "eval"}) {
    if (RunCli(config, stage, dir / "cli.log") != 0) {
      run.failure = std::string(stage) + " failed; see " + (dir / "cli.log").string();
      return run;
    }
  }
  run.seconds = Seconds(start);
  run.ok = true;
  return run;
}

std::string SchemaProblem(const fs::path& out) {
  try {
    for (const char* f : {"curated.jsonl", "train.jsonl", "test.jsonl"}) {
      const auto c = corpus::LoadCorpus(out / f);
      if (c.empty()) return std::string(f) + " is empty";
    }
    const json curation = json::parse(ReadFile(out / "curation_report.json"));
    for (const char* k : {"initially_failing", "repaired", "dropped", "informalized"}) {
      if (!curation.at(k).is_number_integer()) return std::string("curation_report.") + k;
    }
    const auto ck = train::LoadCheckpoint(out / "heads.ckpt");
    if (ck.digest_mismatch) return "checkpoint config digest mismatch";
    const auto index = retrieval::LoadIndex(out / "index");
    if (index.head_digest != train::HeadDigest(ck.heads)) return "index/head digest mismatch";
    for (const auto& line : testkit::NonEmptyLines(ReadFile(out / "sft.jsonl"))) {
      const json j = json::parse(line);
      for (const char* k : {"id", "prompt", "target", "template_digest", "k", "demo_ids",
                            "demo_scores"}) {
        if (!j.contains(k)) return std::string("sft record lacks ") + k;
      }
    }
    for (const auto& line : testkit::NonEmptyLines(ReadFile(out / "autoformalize.jsonl"))) {
      const json j = json::parse(line);
      const std::string status = j.at("status");
      if (status != "verified" && status != "failure" && status != "transport_error") {
        return "bad autoformalize status " + status;
      }
      if (!j.at("iterations").is_array()) return "autoformalize iterations";
    }
    for (const auto& line : testkit::NonEmptyLines(ReadFile(out / "eval_records.jsonl"))) {
      const json j = json::parse(line);
      if (!j.at("id").is_string() || !j.at("candidates").is_array()) return "eval record shape";
    }
    const auto report = eval::ReportFromJson(json::parse(ReadFile(out / "eval_report.json")));
    if (report.n_records == 0) return "eval report has no records";
    double prev_tc = 0.0, prev_sc = 0.0;
    for (const auto& [k, tc] : report.tc) {
      const double sc = report.sc.at(k);
      if (sc > tc) return "sc > tc at k = " + std::to_string(k);
      if (tc < prev_tc || sc < prev_sc) return "pass@k not monotone at k = " + std::to_string(k);
      prev_tc = tc;
      prev_sc = sc;
    }
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

Verdict PipelineSmoke(const PipelineRun& run) {
  Verdict v;
  v.Require(run.ok, run.failure);
  if (!v.pass) return v;
  const std::string problem = SchemaProblem(run.dir / "out");
  v.Require(problem.empty(), problem);
  v.Require(run.seconds < 120.0, "took " + Fmt("%.1f", run.seconds) + " s");
  if (v.pass) v.note = "6 stages in " + Fmt("%.1f", run.seconds) + " s";
  return v;
}

// 10 ------------------------------------------------------------------------

Verdict Determinism(const AlignmentRun& a1, const AlignmentRun& a2, const PipelineRun& p1,
                    const PipelineRun& p2) {
  Verdict v;
  v.Require(a1.head_digest == a2.head_digest && a1.checkpoint == a2.checkpoint,
            "alignment checkpoints differ");
  v.Require(a1.index_bytes == a2.index_bytes, "alignment indexes differ");
  v.Require(a1.report == a2.report, "alignment reports differ");
  v.Require(p1.ok && p2.ok, "pipeline run failed");
  if (!v.pass) return v;
  std::vector<fs::path> files = {"heads.ckpt",           "index/index.json",
                                 "index/nl_bank.pbvec",  "index/fl_bank.pbvec",
                                 "curated.jsonl",        "train.jsonl",
                                 "test.jsonl",           "curation_report.json",
                                 "train_history.jsonl",  "sft.jsonl",
                                 "eval_report.json",     "eval_records.jsonl"};
  for (const auto& f : files) {
    v.Require(ReadFile(p1.dir / "out" / f) == ReadFile(p2.dir / "out" / f),
              "pipeline output differs: " + f.string());
  }
  if (v.pass) v.note = std::to_string(files.size() + 3) + " artifacts bitwise equal";
  return v;
}

}  // namespace
}  // namespace pb

int main() {
  using namespace pb;
  int failures = 0;
  auto report = [&](int n, const char* name, const Verdict& v) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << name
              << "): " << v.note << std::endl;
    failures += v.pass ? 0 : 1;
  };
  auto guarded = [](const std::function<Verdict()>& fn) {
    try {
      return fn();
    } catch (const std::exception& e) {
      return Verdict{false, std::string("exception: ") + e.what()};
    }
  };
  const fs::path scratch = testkit::MakeTempDir("acceptance");

  report(1, "gradient check", guarded(GradientCheck));
  report(2, "loss closed forms", guarded(LossClosedForms));
  AlignmentRun a1, a2;
  report(3, "synthetic alignment", guarded([&] {
           a1 = RunAlignment(scratch / "align1");
           return SyntheticAlignment(a1);
         }));
  report(4, "retrieval oracle", guarded(RetrievalOracle));
  report(5, "metric fixtures", guarded(MetricFixtures));
  report(6, "repair contract", guarded(RepairContract));
  report(7, "tactic whitelist", guarded(Whitelist));
  report(8, "bridge round trip", guarded(BridgeRoundTrip));
  PipelineRun p1, p2;
  report(9, "pipeline smoke", guarded([&] {
           p1 = RunPipeline(scratch / "pipeline1");
           return PipelineSmoke(p1);
         }));
  report(10, "determinism", guarded([&] {
           a2 = RunAlignment(scratch / "align2");
           p2 = RunPipeline(scratch / "pipeline2");
           return Determinism(a1, a2, p1, p2);
         }));

  fs::remove_all(scratch);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
