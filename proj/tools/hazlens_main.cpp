// Copyright 2026 The hazlens Authors.
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

// hazlens command-line driver.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hazlens/config.hpp"
#include "hazlens/dataset.hpp"
#include "hazlens/guidelines.hpp"
#include "hazlens/harness.hpp"
#include "hazlens/prompting.hpp"
#include "hazlens/report_emit.hpp"
#include "hazlens/service.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hazlens;

namespace {

constexpr int kExitError = 1;
constexpr int kExitDraftGate = 3;

struct Globals {
  std::string config = "hazlens.json";
  std::string cache_dir;
  bool offline = false;
  bool no_cache = false;
  bool verbose = false;
};

struct Session {
  HarnessConfig config;
  std::unique_ptr<ProviderRegistry> registry;
};

Session open_session(const Globals& g) {
  Session s;
  s.config = load_config(g.config);
  RegistryOptions opts;
  opts.offline = g.offline;
  opts.cache = s.config.run.cache && !g.no_cache;
  if (!g.cache_dir.empty()) opts.cache_dir = fs::path(g.cache_dir);
  s.registry = std::make_unique<ProviderRegistry>(s.config, opts);
  return s;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::vector<RunResult> read_results(const fs::path& path, SeverityScale scale) {
  std::vector<RunResult> out;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(run_result_from_json(json::parse(line), scale));
  }
  return out;
}

std::string results_jsonl(const std::vector<RunResult>& results) {
  std::string out;
  for (const RunResult& r : results) out += run_result_to_json(r).dump() + "\n";
  return out;
}

EngineeredPrompt prompt_for(const Session& s, const std::string& prompt_file) {
  if (prompt_file.empty()) return resolve_prompt(s.config, *s.registry);
  return EngineeredPrompt::from_json(json::parse(slurp(prompt_file)));
}

std::vector<ReportFormat> parse_formats(const std::vector<std::string>& names) {
  std::vector<ReportFormat> out;
  for (const std::string& n : names) out.push_back(parse_report_format(n));
  return out;
}

std::string latency_markdown(const std::vector<LatencyRow>& rows) {
  std::string out = "| Model | n | Mean (s) | p50 (s) | p95 (s) | Reference (s) |\n|---|---:|---:|---:|---:|---:|\n";
  for (const LatencyRow& l : rows) {
    out += fmt::format("| {} | {} | {:.2f} | {:.2f} | {:.2f} | {} |\n", l.model_id, l.n, l.mean_s, l.p50_s, l.p95_s,
                       l.reference_s ? fmt::format("{:.2f}", *l.reference_s) : std::string("n/a"));
  }
  return out;
}

int serve(const Globals& g, const std::string& host, int port, const std::string& dataset) {
  // Block termination signals before any thread starts so every thread
  // inherits the mask and sigwait below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ServiceOptions opts;
  opts.config = load_config(g.config);
  opts.registry.offline = g.offline;
  opts.registry.cache = opts.config.run.cache && !g.no_cache;
  if (!g.cache_dir.empty()) opts.registry.cache_dir = fs::path(g.cache_dir);
  if (!dataset.empty()) opts.dataset = dataset;
  Service service(std::move(opts));
  const int bound = service.bind(host, port);
  spdlog::info("serving on http://{}:{}", host, bound);
  std::thread server([&] { service.run(); });
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {} received; shutting down", sig);
  service.stop();
  server.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Construction-site hazard assessment with vision-language models: prompt engineering, "
               "batch inference and evaluation."};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Harness configuration file")->capture_default_str();
  app.add_option("--cache-dir", g.cache_dir, "Override the replay cache directory");
  app.add_flag("--offline", g.offline, "Never touch the network: live providers answer from the cache only");
  app.add_flag("--no-cache", g.no_cache, "Disable the record/replay cache");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");

  auto* engineer = app.add_subcommand("engineer-prompt", "Compile guidelines into an inference prompt");
  std::string eng_mode, eng_guidelines, eng_out;
  engineer->add_option("--mode", eng_mode, "meta or deterministic (default: from config)")
      ->check(CLI::IsMember({"meta", "deterministic"}));
  engineer->add_option("--guidelines", eng_guidelines, "Guideline file (default: from config)");
  engineer->add_option("-o,--out", eng_out, "Write the prompt JSON here instead of stdout");

  auto* assess = app.add_subcommand("assess", "Assess one image with one model");
  std::string assess_image, assess_model, assess_prompt;
  assess->add_option("image", assess_image, "Image file (jpeg or png)")->required()->check(CLI::ExistingFile);
  assess->add_option("-m,--model", assess_model, "Model id from the config (default: first)");
  assess->add_option("--prompt", assess_prompt, "Engineered prompt JSON (default: from config)");

  auto* bootstrap = app.add_subcommand("bootstrap-gt", "Draft ground truth for records that lack it");
  std::string bs_dataset, bs_out, bs_model, bs_prompt;
  bootstrap->add_option("--dataset", bs_dataset, "Input JSONL (default: from config)");
  bootstrap->add_option("-o,--out", bs_out, "Output JSONL (default: overwrite input)");
  bootstrap->add_option("-m,--model", bs_model, "Drafting model id (default: first)");
  bootstrap->add_option("--prompt", bs_prompt, "Engineered prompt JSON (default: from config)");

  auto* review = app.add_subcommand("review", "List, approve or label dataset records");
  std::string rv_dataset;
  std::vector<std::string> rv_approve, rv_labels;
  review->add_option("--dataset", rv_dataset, "Dataset JSONL (default: from config)");
  review->add_option("--approve", rv_approve, "Record ids to approve");
  review->add_option("--label", rv_labels, "record_id=label (false_hazard, context_misclassification, hallucination)");

  auto* run = app.add_subcommand("run", "Run models over the dataset");
  std::string run_out = "results.jsonl", run_report, run_prompt;
  std::vector<std::string> run_models_opt, run_formats{"json", "csv", "md"};
  run->add_option("--models", run_models_opt, "Model ids (default: all)")->delimiter(',');
  run->add_option("-o,--out", run_out, "Results JSONL")->capture_default_str();
  run->add_option("--prompt", run_prompt, "Engineered prompt JSON (default: from config)");
  run->add_option("--report-dir", run_report, "Also evaluate and write reports here");
  run->add_option("--format", run_formats, "Report formats")->delimiter(',')->capture_default_str();

  auto* evaluate = app.add_subcommand("evaluate", "Score stored results against ground truth");
  std::string ev_results = "results.jsonl", ev_out = "table.json", ev_prompt;
  evaluate->add_option("--results", ev_results, "Results JSONL")->capture_default_str();
  evaluate->add_option("-o,--out", ev_out, "Evaluation table JSON")->capture_default_str();
  evaluate->add_option("--prompt", ev_prompt, "Prompt JSON the results were produced with");

  auto* bench = app.add_subcommand("bench", "Latency summary of stored results");
  std::string bench_results = "results.jsonl";
  bench->add_option("--results", bench_results, "Results JSONL")->capture_default_str();

  auto* report = app.add_subcommand("report", "Render an evaluation table");
  std::string rep_table = "table.json", rep_dir = "reports";
  std::vector<std::string> rep_formats{"json", "csv", "md"};
  report->add_option("--table", rep_table, "Evaluation table JSON")->capture_default_str();
  report->add_option("--out-dir", rep_dir, "Output directory")->capture_default_str();
  report->add_option("--format", rep_formats, "Formats")->delimiter(',')->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "Serve the review API");
  std::string sv_host = "127.0.0.1", sv_dataset;
  int sv_port = 8080;
  serve_cmd->add_option("--host", sv_host)->capture_default_str();
  serve_cmd->add_option("--port", sv_port)->capture_default_str();
  serve_cmd->add_option("--dataset", sv_dataset, "Dataset JSONL (default: from config)");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::default_logger());
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*engineer) {
      Session s = open_session(g);
      const fs::path gl = eng_guidelines.empty() ? s.config.prompt.guidelines : fs::path(eng_guidelines);
      const ResponseTemplate tmpl{.severity_scale = s.config.run.scale};
      const GuidelineSet set = load_guidelines(gl);
      const bool meta = eng_mode.empty() ? s.config.prompt.mode == PromptMode::kMeta : eng_mode == "meta";
      EngineeredPrompt p;
      if (meta) {
        const PromptSpec& ps = s.config.prompt;
        if (ps.engineer_provider.empty()) throw ConfigError("config has no prompt.engineer section");
        p = engineer_prompt(set, tmpl, *s.registry->get(ps.engineer_provider),
                            GenerationParams{ps.engineer_temperature, ps.engineer_max_tokens, ps.engineer_model});
      } else {
        p = deterministic_prompt(set, tmpl);
      }
      write_text(eng_out, p.to_json().dump(2) + "\n");
    } else if (*assess) {
      Session s = open_session(g);
      if (s.config.models.empty()) throw ConfigError("config lists no models");
      const ModelSpec& m = assess_model.empty() ? s.config.models.front() : s.config.model(assess_model);
      const EngineeredPrompt prompt = prompt_for(s, assess_prompt);
      const ImageAttachment image = read_image_file(assess_image);
      const CompletionResult c = s.registry->get(m.provider)->complete(prompt.text, &image, m.params());
      const ParsedReport parsed = parse_report(c.text, s.config.run.scale);
      json issues = json::array();
      for (const ParseIssue& i : parsed.issues) issues.push_back(issue_to_json(i));
      std::cout << json{{"model_id", m.id},
                        {"report", report_to_json(parsed.report)},
                        {"issues", issues},
                        {"latency_s", c.latency_s}}
                       .dump(2)
                << "\n";
    } else if (*bootstrap) {
      Session s = open_session(g);
      const fs::path in = bs_dataset.empty() ? s.config.dataset : fs::path(bs_dataset);
      const std::vector<DatasetRecord> records = load_dataset(in, s.config.run.scale);
      if (s.config.models.empty()) throw ConfigError("config lists no models");
      const ModelSpec& m = bs_model.empty() ? s.config.models.front() : s.config.model(bs_model);
      const std::vector<DatasetRecord> drafted =
          bootstrap_ground_truth(records, *s.registry->get(m.provider), prompt_for(s, bs_prompt), m.params(),
                                 s.config.run.scale, s.config.run.concurrency);
      save_dataset(bs_out.empty() ? in : fs::path(bs_out), drafted);
      std::size_t drafts = 0;
      for (const DatasetRecord& r : drafted) drafts += r.approved() ? 0 : 1;
      spdlog::info("{} records, {} awaiting review", drafted.size(), drafts);
    } else if (*review) {
      const HarnessConfig cfg = rv_dataset.empty() ? load_config(g.config) : HarnessConfig{};
      const fs::path path = rv_dataset.empty() ? cfg.dataset : fs::path(rv_dataset);
      std::vector<DatasetRecord> records = load_dataset(path, cfg.run.scale);
      auto find = [&](const std::string& id) -> DatasetRecord& {
        for (DatasetRecord& r : records) {
          if (r.record_id == id) return r;
        }
        throw DatasetError("unknown record " + id);
      };
      for (const std::string& id : rv_approve) {
        DatasetRecord& r = find(id);
        if (!r.ground_truth || r.ground_truth->summary.empty()) {
          throw DatasetError("record " + id + " has no ground truth summary to approve");
        }
        r.review_status = ReviewStatus::kApproved;
      }
      for (const std::string& spec : rv_labels) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--label expects record_id=label");
        find(spec.substr(0, eq)).failure_labels.insert(parse_failure_label(spec.substr(eq + 1)));
      }
      if (!rv_approve.empty() || !rv_labels.empty()) save_dataset(path, records);
      for (const DatasetRecord& r : records) {
        std::cout << fmt::format("{}\t{}\t{} hazards\n", r.record_id, to_string(r.review_status),
                                 r.ground_truth ? r.ground_truth->hazards.size() : 0);
      }
    } else if (*run) {
      Session s = open_session(g);
      const std::vector<DatasetRecord> records = load_dataset(s.config.dataset, s.config.run.scale);
      const RunConfig rc = build_run_config(s.config, *s.registry, prompt_for(s, run_prompt), run_models_opt);
      const std::vector<RunResult> results = run_models(rc, records);
      write_text(run_out, results_jsonl(results));
      if (!run_report.empty()) {
        const EvalTable table = evaluate_run(rc, results, records, build_embedding_config(s.config, *s.registry));
        for (const fs::path& p : emit_report(table, run_report, parse_formats(run_formats))) {
          spdlog::info("wrote {}", p.string());
        }
      }
    } else if (*evaluate) {
      Session s = open_session(g);
      const std::vector<DatasetRecord> records = load_dataset(s.config.dataset, s.config.run.scale);
      const std::vector<RunResult> results = read_results(ev_results, s.config.run.scale);
      std::vector<std::string> ids;
      for (const RunResult& r : results) {
        if (std::find(ids.begin(), ids.end(), r.model_id) == ids.end()) ids.push_back(r.model_id);
      }
      const RunConfig rc = build_run_config(s.config, *s.registry, prompt_for(s, ev_prompt), ids);
      const EvalTable table = evaluate_run(rc, results, records, build_embedding_config(s.config, *s.registry));
      write_text(ev_out, eval_table_to_json(table).dump(2) + "\n");
    } else if (*bench) {
      const HarnessConfig cfg = load_config(g.config);
      std::vector<LatencyRow> rows = bench_latency(read_results(bench_results, cfg.run.scale));
      for (LatencyRow& row : rows) {
        for (const ModelSpec& m : cfg.models) {
          if (m.id == row.model_id && m.reference_latency_s) row.reference_s = m.reference_latency_s;
        }
      }
      std::cout << latency_markdown(rows);
    } else if (*report) {
      const EvalTable table = eval_table_from_json(json::parse(slurp(rep_table)));
      for (const fs::path& p : emit_report(table, rep_dir, parse_formats(rep_formats))) std::cout << p.string() << "\n";
    } else if (*serve_cmd) {
      return serve(g, sv_host, sv_port, sv_dataset);
    }
  } catch (const DraftGateError& e) {
    spdlog::error("{}", e.what());
    return kExitDraftGate;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitError;
  }
  return 0;
}
