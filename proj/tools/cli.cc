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

#include "cli.h"

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "pb/client.h"
#include "pb/config.h"
#include "pb/corpus.h"
#include "pb/curate.h"
#include "pb/embed.h"
#include "pb/equivalence.h"
#include "pb/error.h"
#include "pb/evalharness.h"
#include "pb/lean_bridge.h"
#include "pb/mock_backend.h"
#include "pb/prompting.h"
#include "pb/repair.h"
#include "pb/repl_process.h"
#include "pb/retrieval.h"
#include "pb/templates.h"
#include "pb/train.h"
#include "pb/util.h"

namespace pb::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Every recognised key with its default. Each can be overridden by
// PB_<SECTION>_<KEY> and then by --set.
const std::vector<std::pair<std::string, json>>& Defaults() {
  static const std::vector<std::pair<std::string, json>> kDefaults = {
      {"paths.corpus", "corpus.jsonl"},
      {"paths.sketches", ""},
      {"paths.embeddings", "embeddings"},
      {"paths.templates", ""},
      {"paths.curated", "out/curated.jsonl"},
      {"paths.train", "out/train.jsonl"},
      {"paths.test", "out/test.jsonl"},
      {"paths.curation_report", "out/curation_report.json"},
      {"paths.checkpoint", "out/heads.ckpt"},
      {"paths.checkpoint_dir", ""},
      {"paths.history", "out/train_history.jsonl"},
      {"paths.index", "out/index"},
      {"paths.retrieval_report", "out/retrieval_report.json"},
      {"paths.sft", "out/sft.jsonl"},
      {"paths.tasks", ""},
      {"paths.autoformalize", "out/autoformalize.jsonl"},
      {"paths.eval_report", "out/eval_report.json"},
      {"paths.eval_records", "out/eval_records.jsonl"},
      {"split.train_fraction", 0.9},
      {"split.seed", 0},
      {"train.temperature", 0.07},
      {"train.batch_size", 256},
      {"train.epochs", 10},
      {"train.learning_rate", 1e-3},
      {"train.optimizer", "adam"},
      {"train.adam_beta1", 0.9},
      {"train.adam_beta2", 0.999},
      {"train.adam_epsilon", 1e-8},
      {"train.seed", 0},
      {"train.d", 512},
      {"train.use_bias", true},
      {"train.include_initial_state", true},
      {"retrieval.k", 5},
      {"retrieval.recall_ks", json::array({1, 5, 10, 20, 50})},
      {"prompts.sft", "sft.v1"},
      {"prompts.judge", "judge.v1"},
      {"prompts.repair", "repair.v1"},
      {"prompts.equiv", "equiv.v1"},
      {"prompts.curate_repair", "curate_repair.v1"},
      {"prompts.informalize", "informalize.v1"},
      {"generation.temperature", 1.0},
      {"generation.max_tokens", 4096},
      {"eval.k_max", 32},
      {"eval.equiv_attempts", 5},
      {"repair.r_max", 5},
      {"repair.short_circuit", false},
      {"repair.semantics", "judge"},
      {"repair.judge_sees_nl_proof", false},
      {"curate.max_repair_rounds", 5},
      {"clients.generator", ""},
      {"clients.judge", ""},
      {"clients.repair", ""},
      {"clients.informalizer", ""},
      {"verifier.backend", "repl"},
      {"verifier.transcripts", ""},
      {"verifier.lean_cmd", ""},
      {"verifier.timeout_s", 60},
      {"verifier.workers", 1},
      {"run.workers", 1},
  };
  return kDefaults;
}

bool ExcludedFromDigest(const std::string& key) {
  return StartsWith(key, "paths.") || StartsWith(key, "clients.") ||
         key == "verifier.transcripts" || key == "verifier.lean_cmd" ||
         key == "run.workers" || key == "verifier.workers";
}

class NullClient : public gen::GenerationClient {
 public:
  explicit NullClient(std::string role) : role_(std::move(role)) {}
  gen::GenerationResponse Generate(const gen::GenerationRequest&) override {
    throw Error(ErrorCode::kUnavailable,
                "no " + role_ + " client configured (clients." + role_ + ")");
  }

 private:
  std::string role_;
};

struct Context {
  Config config;
  fs::path base_dir;
  bool dry_run = false;
  bool json_log = true;
  std::ostream* out = nullptr;
  std::shared_ptr<spdlog::logger> log;
  std::string stage;

  fs::path Path(const std::string& key) const {
    fs::path p = config.GetString(key);
    if (p.empty() || p.is_absolute()) return p;
    return base_dir / p;
  }
  int Int(const std::string& key) const {
    return static_cast<int>(config.GetInt(key, 0));
  }
  std::string Digest() const {
    ordered_json j = ordered_json::object();
    for (const auto& [k, v] : config.values()) {
      if (!ExcludedFromDigest(k)) j[k] = v;
    }
    return Sha256Hex(j.dump());
  }

  void Event(spdlog::level::level_enum level, const std::string& event,
             ordered_json fields = ordered_json::object()) const {
    if (json_log) {
      ordered_json j = {{"stage", stage}, {"event", event}};
      for (auto& [k, v] : fields.items()) j[k] = v;
      std::string body = j.dump();
      log->log(level, "{}", std::string_view(body).substr(1, body.size() - 2));
    } else {
      std::string line = stage + ": " + event;
      for (auto& [k, v] : fields.items()) line += " " + k + "=" + v.dump();
      log->log(level, "{}", line);
    }
  }
};

struct Plan {
  std::vector<std::string> inputs;    // Keys; a leading '?' marks optional.
  std::vector<std::string> outputs;
};

gen::TemplateStore Templates(const Context& ctx) {
  fs::path dir = ctx.Path("paths.templates");
  return dir.empty() ? gen::TemplateStore::Default() : gen::TemplateStore(dir);
}

std::unique_ptr<gen::GenerationClient> Client(const Context& ctx,
                                              const std::string& role,
                                              const std::string& fallback = {}) {
  std::string key = "clients." + role;
  if (ctx.config.GetString(key).empty() && !fallback.empty()) {
    key = "clients." + fallback;
  }
  fs::path path = ctx.Path(key);
  if (path.empty()) return std::make_unique<NullClient>(role);
  return gen::MakeClient(gen::ClientConfig::Load(path), path.parent_path());
}

std::unique_ptr<lean::VerifierBackend> Verifier(const Context& ctx) {
  const std::string kind = ctx.config.GetString("verifier.backend", "repl");
  if (kind == "mock") {
    auto mock = std::make_unique<lean::MockBackend>();
    fs::path transcripts = ctx.Path("verifier.transcripts");
    if (!transcripts.empty()) mock->LoadTranscripts(transcripts);
    return mock;
  }
  if (kind != "repl") {
    throw Error(ErrorCode::kInvalidArgument,
                "verifier.backend must be repl or mock, got " + kind);
  }
  lean::ReplOptions opts;
  opts.command = ctx.config.GetString("verifier.lean_cmd");
  opts.timeout = std::chrono::seconds(ctx.config.GetInt("verifier.timeout_s", 60));
  opts.workers = static_cast<std::size_t>(
      std::max<long long>(1, ctx.config.GetInt("verifier.workers", 1)));
  opts = lean::ReplOptions::FromEnv(opts);
  if (opts.command.empty()) {
    throw Error(ErrorCode::kBackendUnavailable,
                "no Lean REPL command configured; set PB_LEAN_CMD or "
                "verifier.lean_cmd");
  }
  return std::make_unique<lean::ReplPool>(opts);
}

train::Heads LoadHeads(const Context& ctx) {
  train::Checkpoint ck = train::LoadCheckpoint(ctx.Path("paths.checkpoint"));
  if (ck.digest_mismatch) {
    ctx.Event(spdlog::level::warn, "checkpoint_config_digest_mismatch");
  }
  return ck.heads;
}

embed::EmbedOptions EmbedOpts(const Context& ctx) {
  embed::EmbedOptions o;
  o.include_initial_state =
      ctx.config.GetBool("train.include_initial_state", true);
  return o;
}

void WriteJson(const fs::path& path, const ordered_json& j) {
  WriteFileAtomic(path, j.dump(2) + "\n");
}

std::vector<int> RecallKs(const Context& ctx) {
  std::vector<int> ks;
  for (long long k : ctx.config.GetIntList("retrieval.recall_ks", {1, 5, 10, 20, 50})) {
    ks.push_back(static_cast<int>(k));
  }
  return ks;
}

// ---- Subcommands ----

void RunCurate(Context& ctx) {
  corpus::Corpus input = corpus::LoadCorpus(ctx.Path("paths.corpus"));
  fs::path sketches = ctx.Path("paths.sketches");
  if (!sketches.empty()) {
    input = corpus::MatchSketches(input, corpus::LoadSketches(sketches));
  }
  auto verifier = Verifier(ctx);
  auto repair = Client(ctx, "repair", "generator");
  auto informalizer = Client(ctx, "informalizer", "generator");
  corpus::CurationOptions opts;
  opts.max_repair_rounds = ctx.Int("curate.max_repair_rounds");
  opts.workers = static_cast<std::size_t>(std::max(1, ctx.Int("run.workers")));
  opts.repair_template = ctx.config.GetString("prompts.curate_repair");
  opts.informalize_template = ctx.config.GetString("prompts.informalize");
  corpus::CurationResult result =
      corpus::Curate(input, *verifier, *repair, *informalizer, Templates(ctx), opts);
  auto [train_split, test_split] =
      corpus::Split(result.corpus, ctx.config.GetDouble("split.train_fraction", 0.9),
                    static_cast<std::uint64_t>(ctx.config.GetInt("split.seed", 0)));
  corpus::SaveCorpus(result.corpus, ctx.Path("paths.curated"));
  corpus::SaveCorpus(train_split, ctx.Path("paths.train"));
  corpus::SaveCorpus(test_split, ctx.Path("paths.test"));
  WriteJson(ctx.Path("paths.curation_report"), result.report.ToJson());
  *ctx.out << result.report.Summary();
  ctx.Event(spdlog::level::info, "curated",
            {{"records", result.corpus.size()},
             {"train", train_split.size()},
             {"test", test_split.size()}});
}

void RunSplit(Context& ctx) {
  corpus::Corpus curated = corpus::LoadCorpus(ctx.Path("paths.curated"));
  auto [train_split, test_split] =
      corpus::Split(curated, ctx.config.GetDouble("split.train_fraction", 0.9),
                    static_cast<std::uint64_t>(ctx.config.GetInt("split.seed", 0)));
  corpus::SaveCorpus(train_split, ctx.Path("paths.train"));
  corpus::SaveCorpus(test_split, ctx.Path("paths.test"));
  *ctx.out << ordered_json({{"train", train_split.size()},
                            {"test", test_split.size()}})
                  .dump()
           << "\n";
}

void RunTrainEmbed(Context& ctx) {
  corpus::Corpus train_split = corpus::LoadCorpus(ctx.Path("paths.train"));
  embed::BaseEmbeddingSet base =
      embed::LoadBaseEmbeddings(ctx.Path("paths.embeddings"))
          .Subset(train_split.Ids());
  train::TrainConfig cfg = train::TrainConfig::FromConfig(ctx.config);
  train::FitOptions opts;
  opts.checkpoint_dir = ctx.Path("paths.checkpoint_dir");
  train::FitResult fit = train::Fit(base, cfg, opts);
  if (fit.effective_batch_size != cfg.batch_size) {
    ctx.Event(spdlog::level::warn, "batch_size_capped",
              {{"requested", cfg.batch_size},
               {"effective", fit.effective_batch_size}});
  }
  train::SaveCheckpoint(fit.heads, cfg, ctx.Path("paths.checkpoint"));
  WriteFileAtomic(ctx.Path("paths.history"), fit.history.ToJsonl());
  ordered_json summary = fit.history.Summary();
  summary["head_digest"] = train::HeadDigest(fit.heads);
  summary["config_digest"] = cfg.Digest();
  *ctx.out << summary.dump() << "\n";
}

void RunBuildIndex(Context& ctx) {
  corpus::Corpus train_split = corpus::LoadCorpus(ctx.Path("paths.train"));
  embed::BaseEmbeddingSet base =
      embed::LoadBaseEmbeddings(ctx.Path("paths.embeddings"));
  retrieval::RetrievalIndex index = retrieval::BuildIndex(
      train_split.Ids(), base, LoadHeads(ctx), EmbedOpts(ctx));
  retrieval::SaveIndex(index, ctx.Path("paths.index"));
  *ctx.out << ordered_json({{"ids", index.size()},
                            {"head_digest", index.head_digest}})
                  .dump()
           << "\n";
}

void RunRetrieve(Context& ctx, const std::string& id, int k,
                 const std::string& direction) {
  embed::BaseEmbeddingSet base =
      embed::LoadBaseEmbeddings(ctx.Path("paths.embeddings"));
  train::Heads heads = LoadHeads(ctx);
  retrieval::RetrievalIndex index = retrieval::LoadIndex(ctx.Path("paths.index"));
  embed::JointVector q;
  retrieval::Target target;
  if (direction == "nl2fl") {
    q = embed::EmbedNl(id, base, heads.f);
    target = retrieval::Target::kFl;
  } else {
    q = embed::EmbedFl(id, base, heads.g, EmbedOpts(ctx));
    target = retrieval::Target::kNl;
  }
  if (k <= 0) k = ctx.Int("retrieval.k");
  ordered_json hits = ordered_json::array();
  for (const auto& h : retrieval::Query(index, q, k, target)) {
    hits.push_back({{"rank", h.rank}, {"id", h.id}, {"score", h.score}});
  }
  *ctx.out << ordered_json({{"query", id}, {"direction", direction}, {"hits", hits}})
                  .dump(2)
           << "\n";
}

void RunEvalRetrieval(Context& ctx, bool untrained) {
  corpus::Corpus test_split = corpus::LoadCorpus(ctx.Path("paths.test"));
  embed::BaseEmbeddingSet base =
      embed::LoadBaseEmbeddings(ctx.Path("paths.embeddings"));
  train::Heads heads =
      untrained ? train::InitializeHeads(base.nl_dim(), base.fl_dim(),
                                         train::TrainConfig::FromConfig(ctx.config))
                : LoadHeads(ctx);
  retrieval::RetrievalIndex index =
      retrieval::BuildIndex(test_split.Ids(), base, heads, EmbedOpts(ctx));
  std::vector<retrieval::RetrievalMetricsReport> reports = {
      retrieval::EvaluateRetrieval(index, retrieval::Direction::kNlToFl, RecallKs(ctx)),
      retrieval::EvaluateRetrieval(index, retrieval::Direction::kFlToNl, RecallKs(ctx))};
  WriteJson(ctx.Path("paths.retrieval_report"),
            {{"nl_to_fl", retrieval::ToJson(reports[0])},
             {"fl_to_nl", retrieval::ToJson(reports[1])},
             {"head_digest", index.head_digest},
             {"untrained", untrained}});
  *ctx.out << retrieval::FormatTable(reports);
}

void RunExportSft(Context& ctx) {
  corpus::Corpus train_split = corpus::LoadCorpus(ctx.Path("paths.train"));
  retrieval::RetrievalIndex index = retrieval::LoadIndex(ctx.Path("paths.index"));
  std::size_t n = gen::ExportSftRecords(
      train_split, index, ctx.Int("retrieval.k"),
      ctx.config.GetString("prompts.sft"), Templates(ctx), ctx.Path("paths.sft"));
  *ctx.out << ordered_json({{"records", n}}).dump() << "\n";
}

void RunAutoformalize(Context& ctx) {
  const gen::TemplateStore templates = Templates(ctx);
  auto backend = Verifier(ctx);
  auto generator = Client(ctx, "generator");
  auto judge = Client(ctx, "judge");
  const int r_max = ctx.Int("repair.r_max");
  const auto workers = static_cast<std::size_t>(std::max(1, ctx.Int("run.workers")));

  std::vector<repair::RepairTask> tasks;
  std::vector<std::string> generation_errors;
  std::optional<corpus::Corpus> test_split;
  fs::path tasks_path = ctx.Path("paths.tasks");
  if (!tasks_path.empty()) {
    tasks = repair::ParseRepairTasks(ReadFile(tasks_path), r_max);
    generation_errors.resize(tasks.size());
  } else {
    test_split = corpus::LoadCorpus(ctx.Path("paths.test"));
    corpus::Corpus train_split = corpus::LoadCorpus(ctx.Path("paths.train"));
    embed::BaseEmbeddingSet base =
        embed::LoadBaseEmbeddings(ctx.Path("paths.embeddings"));
    train::Heads heads = LoadHeads(ctx);
    retrieval::RetrievalIndex index =
        retrieval::LoadIndex(ctx.Path("paths.index"));
    const auto& records = test_split->records();
    tasks.resize(records.size());
    generation_errors.resize(records.size());
    ParallelFor(records.size(), workers, [&](std::size_t i) {
      const corpus::NlFlRecord& rec = records[i];
      repair::RepairTask& task = tasks[i];
      task.id = rec.id;
      task.nl = rec.nl;
      task.r_max = r_max;
      const int k = std::min<int>(ctx.Int("retrieval.k"),
                                  static_cast<int>(index.size()));
      auto hits = retrieval::Query(index, embed::EmbedNl(rec.id, base, heads.f),
                                   k, retrieval::Target::kFl);
      gen::GenerationRequest req;
      req.prompt = gen::RenderPrompt(
          gen::AssembleContext(rec.nl, hits, train_split,
                               ctx.config.GetString("prompts.sft"), templates),
          templates);
      req.n_samples = 1;
      req.temperature = ctx.config.GetDouble("generation.temperature", 1.0);
      req.max_tokens = ctx.Int("generation.max_tokens");
      try {
        gen::GenerationResponse resp = generator->Generate(req);
        task.initial_fl = gen::ParseFlCandidate(
            resp.candidates.empty() ? std::string() : resp.candidates.front());
        task.initial_fl.source_id = rec.id;
      } catch (const Error& e) {
        if (!e.is_transport()) throw;
        generation_errors[i] = e.what();
      }
    });
  }

  const std::string semantics = ctx.config.GetString("repair.semantics", "judge");
  if (semantics != "judge" && semantics != "biconditional") {
    throw Error(ErrorCode::kInvalidArgument,
                "repair.semantics must be judge or biconditional");
  }
  if (semantics == "biconditional" && !test_split) {
    throw Error(ErrorCode::kInvalidArgument,
                "biconditional semantics needs gold theorems from paths.test");
  }
  repair::RepairOptions ropts;
  ropts.template_id = ctx.config.GetString("prompts.repair");
  ropts.short_circuit = ctx.config.GetBool("repair.short_circuit", false);
  ropts.temperature = ctx.config.GetDouble("generation.temperature", 1.0);
  ropts.max_tokens = ctx.Int("generation.max_tokens");
  gen::JudgeOptions jopts;
  jopts.template_id = ctx.config.GetString("prompts.judge");
  jopts.include_nl_proof = ctx.config.GetBool("repair.judge_sees_nl_proof", false);
  lean::EquivalenceOptions eopts;
  eopts.attempt_budget = ctx.Int("eval.equiv_attempts");
  eopts.template_id = ctx.config.GetString("prompts.equiv");

  std::vector<repair::RepairOutcome> outcomes(tasks.size());
  ParallelFor(tasks.size(), workers, [&](std::size_t i) {
    if (!generation_errors[i].empty()) {
      outcomes[i].id = tasks[i].id;
      outcomes[i].status = repair::RepairStatus::kTransportError;
      outcomes[i].error = generation_errors[i];
      return;
    }
    std::unique_ptr<repair::SemanticsChecker> checker;
    if (semantics == "judge") {
      checker = std::make_unique<repair::JudgeSemanticsChecker>(*judge, templates, jopts);
    } else {
      checker = std::make_unique<repair::BiconditionalSemanticsChecker>(
          test_split->At(tasks[i].id).fl.theorem, *judge, *backend, templates, eopts);
    }
    outcomes[i] = repair::RepairLoop(tasks[i], *backend, *checker, *generator,
                                     templates, ropts);
  });

  std::string lines;
  std::map<std::string, int> counts = {
      {"verified", 0}, {"failure", 0}, {"transport_error", 0}};
  for (const auto& o : outcomes) {
    lines += repair::ToJson(o).dump() + "\n";
    ++counts[std::string(repair::RepairStatusName(o.status))];
  }
  WriteFileAtomic(ctx.Path("paths.autoformalize"), lines);
  *ctx.out << ordered_json(counts).dump() << "\n";
}

void RunEval(Context& ctx) {
  const gen::TemplateStore templates = Templates(ctx);
  corpus::Corpus test_split = corpus::LoadCorpus(ctx.Path("paths.test"));
  corpus::Corpus train_split = corpus::LoadCorpus(ctx.Path("paths.train"));
  embed::BaseEmbeddingSet base =
      embed::LoadBaseEmbeddings(ctx.Path("paths.embeddings"));
  train::Heads heads = LoadHeads(ctx);
  retrieval::RetrievalIndex index = retrieval::LoadIndex(ctx.Path("paths.index"));
  auto backend = Verifier(ctx);
  auto generator = Client(ctx, "generator");
  auto judge = Client(ctx, "judge");
  eval::EvalOptions opts;
  opts.k_max = ctx.Int("eval.k_max");
  opts.retrieval_k = ctx.Int("retrieval.k");
  opts.equiv_attempts = ctx.Int("eval.equiv_attempts");
  opts.temperature = ctx.config.GetDouble("generation.temperature", 1.0);
  opts.max_tokens = ctx.Int("generation.max_tokens");
  opts.prompt_template = ctx.config.GetString("prompts.sft");
  opts.equiv_template = ctx.config.GetString("prompts.equiv");
  opts.workers = static_cast<std::size_t>(std::max(1, ctx.Int("run.workers")));
  opts.config_digest = ctx.Digest();
  eval::EvalResult result = eval::Evaluate(test_split, train_split, index, base,
                                           heads, *generator, *backend, *judge,
                                           templates, opts);
  std::string records;
  for (const auto& s : result.sets) records += eval::ToJson(s).dump() + "\n";
  WriteFileAtomic(ctx.Path("paths.eval_records"), records);
  eval::EmitReport(result.report, eval::ReportFormat::kJson,
                   ctx.Path("paths.eval_report"));
  *ctx.out << eval::FormatPassAtKTable(result.report);
}

void RunReport(Context& ctx, const std::string& input, const std::string& format) {
  fs::path path = input.empty() ? ctx.Path("paths.eval_report") : fs::path(input);
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                path.string() + " is not JSON: " + e.what());
  }
  if (j.contains("metrics")) {
    eval::PassAtKReport r = eval::ReportFromJson(j);
    *ctx.out << eval::RenderReport(
        r, format == "json" ? eval::ReportFormat::kJson : eval::ReportFormat::kTable);
    return;
  }
  if (j.contains("nl_to_fl")) {
    std::vector<retrieval::RetrievalMetricsReport> reports = {
        retrieval::RetrievalReportFromJson(j.at("nl_to_fl")),
        retrieval::RetrievalReportFromJson(j.at("fl_to_nl"))};
    if (format == "json") {
      *ctx.out << ordered_json({{"nl_to_fl", retrieval::ToJson(reports[0])},
                                {"fl_to_nl", retrieval::ToJson(reports[1])}})
                      .dump(2)
               << "\n";
    } else {
      *ctx.out << retrieval::FormatTable(reports);
    }
    return;
  }
  throw Error(ErrorCode::kInvalidArgument,
              path.string() + " is neither a pass@k nor a retrieval report");
}

struct Command {
  std::string name;
  std::string description;
  Plan plan;
  CLI::App* app = nullptr;
  std::function<void(Context&)> run;
};

ordered_json PlanJson(const Context& ctx, const Command& cmd) {
  ordered_json inputs = ordered_json::object();
  ordered_json outputs = ordered_json::object();
  for (std::string key : cmd.plan.inputs) {
    bool optional = !key.empty() && key[0] == '?';
    if (optional) key = key.substr(1);
    fs::path p = ctx.Path(key);
    if (p.empty() && optional) continue;
    inputs[key] = {{"path", p.string()}, {"exists", !p.empty() && fs::exists(p)}};
  }
  for (const auto& key : cmd.plan.outputs) {
    fs::path p = ctx.Path(key);
    if (!p.empty()) outputs[key] = p.string();
  }
  return {{"command", cmd.name},
          {"dry_run", true},
          {"inputs", inputs},
          {"outputs", outputs},
          {"config_digest", ctx.Digest()},
          {"config", ctx.config.ToJson()}};
}

void CheckInputs(const Context& ctx, const Command& cmd) {
  for (std::string key : cmd.plan.inputs) {
    bool optional = !key.empty() && key[0] == '?';
    if (optional) key = key.substr(1);
    fs::path p = ctx.Path(key);
    if (p.empty() && optional) continue;
    if (p.empty() || !fs::exists(p)) {
      throw Error(ErrorCode::kIo,
                  "missing input " + key + " (" + p.string() + ")");
    }
  }
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"pb: retrieval-augmented proof autoformalization pipeline", "pb"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  bool dry_run = false;
  std::string log_format = "json";
  app.add_option("-c,--config", config_path,
                 "Pipeline config file (TOML subset); defaults to $PB_CONFIG");
  app.add_option("--set", sets, "Override a config key: --set section.key=value")
      ->take_all();
  app.add_flag("--dry-run", dry_run, "Validate and print the plan without side effects");
  app.add_option("--log", log_format, "Log format on stderr")
      ->check(CLI::IsMember({"json", "human"}));

  std::string retrieve_id;
  int retrieve_k = 0;
  std::string retrieve_direction = "nl2fl";
  bool untrained = false;
  std::string report_input;
  std::string report_format = "table";

  std::vector<Command> commands = {
      {"curate", "Verify, repair, informalize and split the corpus",
       {{"paths.corpus", "?paths.sketches"},
        {"paths.curated", "paths.train", "paths.test", "paths.curation_report"}},
       nullptr, RunCurate},
      {"split", "Re-split the curated corpus into train and test",
       {{"paths.curated"}, {"paths.train", "paths.test"}}, nullptr, RunSplit},
      {"train-embed", "Train the NL and FL projection heads",
       {{"paths.train", "paths.embeddings"},
        {"paths.checkpoint", "paths.history", "paths.checkpoint_dir"}},
       nullptr, RunTrainEmbed},
      {"build-index", "Embed the training split into a retrieval index",
       {{"paths.train", "paths.embeddings", "paths.checkpoint"}, {"paths.index"}},
       nullptr, RunBuildIndex},
      {"retrieve", "Query the index with one record's embedding",
       {{"paths.embeddings", "paths.checkpoint", "paths.index"}, {}}, nullptr,
       [&](Context& c) { RunRetrieve(c, retrieve_id, retrieve_k, retrieve_direction); }},
      {"eval-retrieval", "Cross-modal retrieval metrics on the test split",
       {{"paths.test", "paths.embeddings", "paths.checkpoint"},
        {"paths.retrieval_report"}},
       nullptr, [&](Context& c) { RunEvalRetrieval(c, untrained); }},
      {"export-sft", "Write retrieval-augmented fine-tuning records",
       {{"paths.train", "paths.index"}, {"paths.sft"}}, nullptr, RunExportSft},
      {"autoformalize", "Retrieve, generate and repair FL for the test split",
       {{"?paths.tasks", "paths.test", "paths.train", "paths.embeddings",
         "paths.checkpoint", "paths.index"},
        {"paths.autoformalize"}},
       nullptr, RunAutoformalize},
      {"eval", "pass@k type and semantic correctness on the test split",
       {{"paths.test", "paths.train", "paths.embeddings", "paths.checkpoint",
         "paths.index"},
        {"paths.eval_report", "paths.eval_records"}},
       nullptr, RunEval},
      {"report", "Render a saved pass@k or retrieval report",
       {{}, {}}, nullptr,
       [&](Context& c) { RunReport(c, report_input, report_format); }},
  };
  for (auto& cmd : commands) cmd.app = app.add_subcommand(cmd.name, cmd.description);
  for (auto& cmd : commands) {
    if (cmd.name == "retrieve") {
      cmd.app->add_option("--id", retrieve_id, "Record id to use as the query")
          ->required();
      cmd.app->add_option("-k", retrieve_k, "Number of hits (default retrieval.k)");
      cmd.app->add_option("--direction", retrieve_direction)
          ->check(CLI::IsMember({"nl2fl", "fl2nl"}));
    } else if (cmd.name == "eval-retrieval") {
      cmd.app->add_flag("--untrained", untrained,
                        "Use freshly initialized heads instead of the checkpoint");
    } else if (cmd.name == "report") {
      cmd.app->add_option("--input", report_input, "Report file (default paths.eval_report)");
      cmd.app->add_option("--format", report_format)
          ->check(CLI::IsMember({"table", "json"}));
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("pb", sink);
  if (log_format == "json") {
    logger->set_pattern(R"({"ts":"%Y-%m-%dT%H:%M:%S.%e%z","level":"%l",%v})");
  } else {
    logger->set_pattern("[%H:%M:%S.%e] [%l] %v");
  }

  Context ctx;
  ctx.dry_run = dry_run;
  ctx.json_log = log_format == "json";
  ctx.out = &out;
  ctx.log = logger;
  const Command* selected = nullptr;
  for (const auto& cmd : commands) {
    if (cmd.app->parsed()) selected = &cmd;
  }
  ctx.stage = selected->name;

  try {
    for (const auto& [key, value] : Defaults()) ctx.config.Set(key, value);
    if (config_path.empty()) {
      if (const char* env = std::getenv("PB_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) {
      Config file = Config::Load(config_path);
      for (const auto& [key, value] : file.values()) ctx.config.Set(key, value);
      ctx.base_dir = fs::absolute(config_path).parent_path();
    } else {
      ctx.base_dir = fs::current_path();
    }
    std::vector<std::string> keys;
    for (const auto& [key, value] : Defaults()) keys.push_back(key);
    ctx.config.ApplyEnvOverrides(keys);
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) {
        err << "error: --set expects key=value, got '" << s << "'\n\n"
            << app.help();
        return kExitUsage;
      }
      ctx.config.SetFromText(s.substr(0, eq), s.substr(eq + 1));
    }

    if (dry_run) {
      ordered_json plan = PlanJson(ctx, *selected);
      bool ready = true;
      for (const auto& [key, input] : plan["inputs"].items()) {
        ready = ready && input["exists"].get<bool>();
      }
      plan["ready"] = ready;
      out << plan.dump(2) << "\n";
      if (!ready) CheckInputs(ctx, *selected);
      return kExitOk;
    }
    CheckInputs(ctx, *selected);
    const auto start = std::chrono::steady_clock::now();
    ctx.Event(spdlog::level::info, "start");
    selected->run(ctx);
    ctx.Event(spdlog::level::info, "done",
              {{"elapsed_ms", std::chrono::duration_cast<std::chrono::milliseconds>(
                                  std::chrono::steady_clock::now() - start)
                                  .count()}});
    return kExitOk;
  } catch (const Error& e) {
    ctx.Event(spdlog::level::err, "failed",
              {{"code", ErrorCodeName(e.code())}, {"message", e.what()}});
    return kExitDomainError;
  } catch (const std::exception& e) {
    ctx.Event(spdlog::level::err, "failed", {{"message", e.what()}});
    return kExitDomainError;
  }
}

}  // namespace pb::cli
