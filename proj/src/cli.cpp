// Copyright 2026 The kgreason Authors
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

#include "kgr/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgr/config.hpp"
#include "kgr/constraints.hpp"
#include "kgr/error.hpp"
#include "kgr/evaluation.hpp"
#include "kgr/http_backend.hpp"
#include "kgr/knowledge_graph.hpp"
#include "kgr/llm_gateway.hpp"
#include "kgr/orchestrator.hpp"
#include "kgr/path_extraction.hpp"
#include "kgr/preference.hpp"
#include "kgr/prompts.hpp"

namespace kgr {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Writes through a temporary sibling so readers never see a partial file.
template <typename Fn>
void write_artifact(const fs::path& path, Fn&& fill) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write " + tmp.string());
    fill(out);
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const ojson& j) {
  write_artifact(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

struct Run {
  std::string command;
  RunConfig cfg;
  std::string started_at = utc_now();
  std::string backend_identity;
  std::vector<std::string> outputs;

  fs::path out(const std::string& name) {
    outputs.push_back(name);
    return cfg.output_dir / name;
  }

  void finish(std::ostream& log) {
    fs::create_directories(cfg.output_dir);
    ojson manifest{{"command", command},
                   {"config", cfg.to_json()},
                   {"seed", cfg.seed},
                   {"backend", backend_identity},
                   {"prompt_template_version", kPromptTemplateVersion},
                   {"outputs", outputs},
                   {"started_at", started_at},
                   {"finished_at", utc_now()}};
    const auto name = "manifest_" + command + ".json";
    write_json(cfg.output_dir / name, manifest);
    for (const auto& o : outputs) log << (cfg.output_dir / o).string() << '\n';
    log << (cfg.output_dir / name).string() << '\n';
  }
};

RunConfig load_config(const CommonOptions& opts) {
  auto cfg = RunConfig::load(opts.config);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.reasoner.seed = *opts.seed;
  }
  if (!opts.output_dir.empty()) cfg.output_dir = opts.output_dir;
  return cfg;
}

KnowledgeGraph load_kg(const RunConfig& cfg) {
  return load_graph(cfg.graph, LoadOptions{.materialize_inverse = cfg.inverse_edges});
}

std::vector<Question> load_dataset(const RunConfig& cfg, std::optional<std::size_t> sample) {
  auto questions = load_questions(cfg.dataset);
  if (sample) questions = sample_questions(questions, *sample, cfg.seed);
  return questions;
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& b) {
  if (b.kind == BackendKind::kScripted) {
    return std::make_unique<ScriptedOracle>(ScriptedOracle::load(b.rules));
  }
  HttpBackendOptions o;
  o.base_url = b.endpoint;
  o.api_key = credential_from_env(b.api_key_env);
  o.max_retries = b.max_retries;
  o.timeout = std::chrono::seconds(b.timeout_seconds);
  return std::make_unique<HttpChatBackend>(std::move(o));
}

// ---------------------------------------------------------------------------
// Subcommands.

void cmd_extract(Run& run) {
  const auto g = load_kg(run.cfg);
  const auto questions = load_dataset(run.cfg, std::nullopt);
  const auto records = extract_weak_supervision(g, questions, run.cfg.k);
  fs::create_directories(run.cfg.output_dir);
  write_artifact(run.out("sft.jsonl"),
                 [&](std::ostream& out) { emit_sft_dataset(records, out); });
  write_artifact(run.out("weak_supervision.jsonl"),
                 [&](std::ostream& out) { write_weak_supervision(records, out); });
}

void cmd_build_prefs(Run& run) {
  const auto g = load_kg(run.cfg);
  const auto questions = load_dataset(run.cfg, std::nullopt);
  const auto records = extract_weak_supervision(g, questions, run.cfg.k);
  PreferenceSummary summary;
  const auto examples = build_preference_examples(records, run.cfg.seed, &summary);
  summary.kto = run.cfg.kto;
  fs::create_directories(run.cfg.output_dir);
  write_artifact(run.out("preferences.jsonl"),
                 [&](std::ostream& out) { write_preference_examples(examples, out); });
  write_json(run.out("preference_summary.json"), summary.to_json());
}

void cmd_loss_check(Run& run, const fs::path& scored, std::optional<double> z0) {
  std::ifstream in(scored);
  if (!in) throw IoError("cannot open " + scored.string());
  std::vector<double> sft_losses;
  std::vector<ScoredExample> batch;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("not a JSON object", line_no);
    try {
      if (j.contains("token_logprobs")) {
        const auto lp = j.at("token_logprobs").get<std::vector<double>>();
        sft_losses.push_back(sft_loss(lp));
        continue;
      }
      ScoredExample ex;
      ex.policy_logprob = j.at("policy_logprob").get<double>();
      ex.ref_logprob = j.at("ref_logprob").get<double>();
      ex.desirable = j.at("desirable").get<bool>();
      if (j.contains("mismatched_policy_logprob")) {
        ex.mismatched_policy_logprob = j["mismatched_policy_logprob"].get<double>();
      }
      if (j.contains("mismatched_ref_logprob")) {
        ex.mismatched_ref_logprob = j["mismatched_ref_logprob"].get<double>();
      }
      batch.push_back(ex);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (sft_losses.empty() && batch.empty()) throw ParseError("no scored records in " + scored.string());

  ojson report;
  if (!sft_losses.empty()) {
    double sum = 0;
    for (double v : sft_losses) sum += v;
    report["sft"] = {{"sequences", sft_losses.size()},
                     {"per_sequence", sft_losses},
                     {"mean", sum / static_cast<double>(sft_losses.size())}};
  }
  if (!batch.empty()) {
    const auto r = kto_loss(batch, run.cfg.kto, z0);
    report["kto"] = {{"examples", batch.size()},
                     {"loss", r.loss},
                     {"z0", r.z0},
                     {"z0_overridden", z0.has_value()},
                     {"per_example", r.per_example}};
  }
  report["kto_config"] = {
      {"beta", run.cfg.kto.beta}, {"lambda_p", run.cfg.kto.lambda_p},
      {"lambda_n", run.cfg.kto.lambda_n}};
  fs::create_directories(run.cfg.output_dir);
  write_json(run.out("loss_report.json"), report);
}

void cmd_answer(Run& run, std::optional<std::size_t> sample, int parallel) {
  if (parallel < 1) throw ConfigError("--parallel must be at least 1");
  const auto g = load_kg(run.cfg);
  const auto questions = load_dataset(run.cfg, sample);
  auto backend = make_backend(run.cfg.backend);
  run.backend_identity = backend->identity();

  std::unique_ptr<ChatBackend> planner_backend;
  if (run.cfg.planner.kind == PlannerKind::kHttp) {
    BackendConfig pb;
    pb.kind = BackendKind::kHttp;
    pb.endpoint = run.cfg.planner.endpoint;
    pb.api_key_env = run.cfg.planner.api_key_env;
    pb.max_retries = run.cfg.backend.max_retries;
    pb.timeout_seconds = run.cfg.backend.timeout_seconds;
    planner_backend = make_backend(pb);
  }
  const auto& rc = run.cfg.reasoner;
  auto make_generator = [&]() -> std::unique_ptr<PathGenerator> {
    if (planner_backend) {
      return std::make_unique<LlmPathGenerator>(*planner_backend, run.cfg.planner.model,
                                                rc.candidate_limit);
    }
    return std::make_unique<EnumeratingPathGenerator>(g, rc.max_depth, rc.candidate_limit);
  };
  const auto traces = answer_all(questions, g, rc, *backend, make_generator, parallel);
  fs::create_directories(run.cfg.output_dir);
  write_artifact(run.out("traces.jsonl"), [&](std::ostream& out) { write_traces(traces, out); });
}

void cmd_eval(Run& run, fs::path traces_path, fs::path gold_path, bool per_record) {
  if (traces_path.empty()) traces_path = run.cfg.output_dir / "traces.jsonl";
  if (gold_path.empty()) gold_path = run.cfg.dataset;
  std::ifstream in(traces_path);
  if (!in) throw IoError("cannot open traces " + traces_path.string());
  const auto traces = read_traces(in);
  const auto gold = load_questions(gold_path);
  const auto records = join_traces(traces, gold);
  const auto report = score_records(records);
  fs::create_directories(run.cfg.output_dir);
  write_json(run.out("metrics.json"), report.to_json());
  if (per_record) {
    write_artifact(run.out("per_record.csv"),
                   [&](std::ostream& out) { write_per_record_csv(records, out); });
  }
}

void cmd_stats(Run& run, std::optional<std::size_t> sample, std::ostream& out) {
  const auto g = load_kg(run.cfg);
  out << graph_stats(g).dump(2) << '\n';
  const auto questions = load_dataset(run.cfg, sample);
  auto backend = make_backend(run.cfg.backend);
  run.backend_identity = backend->identity();
  Session session(*backend, run.cfg.backend.model);
  auto report = constraint_statistics(questions, session);
  report["graph"] = graph_stats(g);
  fs::create_directories(run.cfg.output_dir);
  write_json(run.out("constraint_stats.json"), report);
}

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("-c,--config", opts.config, "Run configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", opts.seed, "Override the configured seed");
  sub->add_option("-o,--output-dir", opts.output_dir, "Override the configured output directory");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constraint-guided reasoning over knowledge graphs", "kgreason"};
  app.require_subcommand(1);
  app.fallthrough(false);

  CommonOptions common;
  std::string mock;
  std::optional<std::size_t> sample;
  int parallel = 1;
  std::string scored;
  std::optional<double> z0;
  std::string traces;
  std::string gold;
  bool per_record = false;

  auto* extract = app.add_subcommand("extract", "Mine weak supervision and write the SFT dataset");
  auto* prefs = app.add_subcommand("build-prefs", "Write the KTO preference dataset");
  auto* loss = app.add_subcommand("loss-check", "Evaluate SFT/KTO losses over scored JSONL");
  auto* answer = app.add_subcommand("answer", "Answer questions and write reasoning traces");
  auto* eval = app.add_subcommand("eval", "Score traces against gold answers");
  auto* stats = app.add_subcommand("stats", "Graph statistics and constraint distribution");
  for (auto* sub : {extract, prefs, loss, answer, eval, stats}) add_common(sub, common);

  loss->add_option("--scored", scored, "Scored JSONL input")->required()->check(CLI::ExistingFile);
  loss->add_option("--z0", z0, "Fixed KTO reference point");
  answer->add_option("--mock", mock, "Scripted-oracle rules; replaces the configured backend")
      ->check(CLI::ExistingFile);
  answer->add_option("--parallel", parallel, "Concurrent question sessions")
      ->check(CLI::PositiveNumber);
  for (auto* sub : {answer, stats}) {
    sub->add_option("--sample", sample, "Seeded sample of N questions");
  }
  eval->add_option("--traces", traces, "Trace JSONL (default: <output_dir>/traces.jsonl)");
  eval->add_option("--gold", gold, "Gold question JSONL (default: the configured dataset)");
  eval->add_flag("--per-record", per_record, "Also write per_record.csv");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run;
  run.command = sub->get_name();
  try {
    run.cfg = load_config(common);
    if (sub == answer && !mock.empty()) {
      BackendConfig scripted;
      scripted.rules = fs::absolute(mock).lexically_normal();
      scripted.model = run.cfg.backend.model;
      run.cfg.backend = scripted;
    }
    run.cfg.validate();
  } catch (const Error& e) {
    err << "kgreason " << run.command << ": " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (sub == extract) {
      cmd_extract(run);
    } else if (sub == prefs) {
      cmd_build_prefs(run);
    } else if (sub == loss) {
      cmd_loss_check(run, scored, z0);
    } else if (sub == answer) {
      cmd_answer(run, sample, parallel);
    } else if (sub == eval) {
      cmd_eval(run, traces, gold, per_record);
    } else {
      cmd_stats(run, sample, out);
    }
    run.finish(out);
  } catch (const ConfigError& e) {
    err << "kgreason " << run.command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "kgreason " << run.command << ": " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace kgr
