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

#include "hazlens/service.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "hazlens/encoding.hpp"
#include "hazlens/guidelines.hpp"

namespace hazlens {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view message) {
  send_json(res, status, json{{"error", message}});
}

std::optional<json> parse_body(const httplib::Request& req, httplib::Response& res) {
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    send_error(res, 400, "request body must be a JSON object");
    return std::nullopt;
  }
  return j;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomically(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

std::string_view extension_for(MediaType t) { return t == MediaType::kPng ? ".png" : ".jpg"; }

enum class RunState { kRunning, kDone, kFailed };

struct RunEntry {
  RunState state = RunState::kRunning;
  json table;
  std::string error;
};

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  ProviderRegistry registry;
  fs::path dataset_path;
  fs::path media_dir;
  httplib::Server server;

  // Dataset: one writer at a time, readers see the last saved state.
  mutable std::shared_mutex records_mu;
  std::vector<DatasetRecord> records;

  std::mutex prompts_mu;
  std::map<std::string, EngineeredPrompt> prompts;
  std::optional<std::string> default_prompt_id;

  std::mutex runs_mu;
  std::map<std::string, RunEntry> runs;
  std::vector<std::jthread> workers;

  explicit Impl(ServiceOptions opts)
      : options(std::move(opts)),
        registry(options.config, options.registry),
        dataset_path(options.dataset.empty() ? options.config.dataset : options.dataset),
        media_dir(options.media_dir.empty() ? options.config.media_dir : options.media_dir) {
    if (dataset_path.empty()) throw ConfigError("service needs a dataset path");
    records = load_dataset(dataset_path, options.config.run.scale);
    fs::create_directories(media_dir);
    routes();
  }

  EngineeredPrompt default_prompt() {
    std::lock_guard lock(prompts_mu);
    if (!default_prompt_id) {
      EngineeredPrompt p = resolve_prompt(options.config, registry);
      default_prompt_id = p.id();
      prompts.emplace(p.id(), std::move(p));
    }
    return prompts.at(*default_prompt_id);
  }

  std::optional<EngineeredPrompt> find_prompt(const std::string& id) {
    {
      std::lock_guard lock(prompts_mu);
      if (auto it = prompts.find(id); it != prompts.end()) return it->second;
    }
    const fs::path path = media_dir / "prompts" / (id + ".json");
    if (id.find_first_not_of("0123456789abcdef") != std::string::npos || !fs::exists(path)) return std::nullopt;
    EngineeredPrompt p = EngineeredPrompt::from_json(json::parse(read_file(path)));
    std::lock_guard lock(prompts_mu);
    return prompts.emplace(id, std::move(p)).first->second;
  }

  void remember_prompt(const EngineeredPrompt& p) {
    write_atomically(media_dir / "prompts" / (p.id() + ".json"), p.to_json().dump(2));
    std::lock_guard lock(prompts_mu);
    prompts.emplace(p.id(), p);
  }

  void routes() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      try {
        std::rethrow_exception(ep);
      } catch (const DraftGateError& e) {
        send_json(res, 409, json{{"error", e.what()}, {"draft_ids", e.draft_ids()}});
      } catch (const ProviderError& e) {
        const int status = e.kind() == ProviderErrorKind::kAuth ? 502 : 503;
        send_json(res, status, json{{"error", e.what()}, {"kind", std::string(to_string(e.kind()))}});
      } catch (const ConfigError& e) {
        send_error(res, 400, e.what());
      } catch (const Error& e) {
        send_error(res, 422, e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, std::string("malformed JSON: ") + e.what());
      } catch (const std::exception& e) {
        spdlog::error("unhandled: {}", e.what());
        send_error(res, 500, "internal error");
      }
    });

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, json{{"status", "ok"}});
    });

    server.Get("/api/models", [this](const httplib::Request&, httplib::Response& res) {
      json out = json::array();
      for (const ModelSpec& m : options.config.models) {
        out.push_back({{"id", m.id}, {"model", m.model}, {"temperature", m.temperature}, {"max_tokens", m.max_tokens}});
      }
      send_json(res, 200, out);
    });

    server.Post("/api/prompt/engineer", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      const std::string mode =
          body->value("mode", options.config.prompt.engineer_provider.empty() ? "deterministic" : "meta");
      const ResponseTemplate tmpl{.severity_scale = options.config.run.scale};
      EngineeredPrompt p;
      if (body->contains("guidelines")) {
        const GuidelineSet set = guidelines_from_json(body->at("guidelines"), "request");
        if (mode == "meta") {
          if (options.config.prompt.engineer_provider.empty()) throw ConfigError("no prompt engineer configured");
          const auto& ps = options.config.prompt;
          p = engineer_prompt(set, tmpl, *registry.get(ps.engineer_provider),
                              GenerationParams{ps.engineer_temperature, ps.engineer_max_tokens, ps.engineer_model});
        } else if (mode == "deterministic") {
          p = deterministic_prompt(set, tmpl);
        } else {
          throw ConfigError("unknown prompt mode '" + mode + "'");
        }
        remember_prompt(p);
      } else {
        p = default_prompt();
      }
      send_json(res, 200, p.to_json());
    });

    server.Get(R"(/api/prompts/([0-9a-z]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (id == "default") return send_json(res, 200, default_prompt().to_json());
      const auto p = find_prompt(id);
      if (!p) return send_error(res, 404, "unknown prompt " + id);
      send_json(res, 200, p->to_json());
    });

    server.Post("/api/assess", [this](const httplib::Request& req, httplib::Response& res) { assess(req, res); });

    server.Get("/api/records", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(records_mu);
      json out = json::array();
      for (const DatasetRecord& r : records) out.push_back(record_to_json(r));
      send_json(res, 200, out);
    });

    server.Get(R"(/api/records/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_lock lock(records_mu);
      const DatasetRecord* r = find_record(req.matches[1]);
      if (!r) return send_error(res, 404, "unknown record " + std::string(req.matches[1]));
      send_json(res, 200, record_to_json(*r));
    });

    server.Put(R"(/api/records/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req, res);
      if (!body) return;
      update_record(req.matches[1], *body, res);
    });

    server.Get(R"(/api/records/([^/]+)/image)", [this](const httplib::Request& req, httplib::Response& res) {
      fs::path path;
      {
        std::shared_lock lock(records_mu);
        const DatasetRecord* r = find_record(req.matches[1]);
        if (!r) return send_error(res, 404, "unknown record " + std::string(req.matches[1]));
        path = r->image_path;
      }
      res.set_content(read_file(path), std::string(mime_type(media_type_for_path(path))));
    });

    server.Post("/api/runs", [this](const httplib::Request& req, httplib::Response& res) { start_run(req, res); });

    server.Get(R"(/api/runs/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      std::lock_guard lock(runs_mu);
      auto it = runs.find(id);
      if (it == runs.end()) {
        const fs::path path = media_dir / "runs" / (id + ".json");
        if (!fs::exists(path)) return send_error(res, 404, "unknown run " + id);
        it = runs.emplace(id, RunEntry{RunState::kDone, json::parse(read_file(path)), {}}).first;
      }
      switch (it->second.state) {
        case RunState::kRunning:
          return send_json(res, 202, json{{"run_id", id}, {"status", "running"}});
        case RunState::kFailed:
          return send_json(res, 500, json{{"run_id", id}, {"status", "failed"}, {"error", it->second.error}});
        case RunState::kDone: {
          json out = it->second.table;
          out["run_id"] = id;
          out["status"] = "done";
          return send_json(res, 200, out);
        }
      }
    });
  }

  DatasetRecord* find_record(const std::string& id) {
    for (DatasetRecord& r : records) {
      if (r.record_id == id) return &r;
    }
    return nullptr;
  }

  void assess(const httplib::Request& req, httplib::Response& res) {
    if (!req.has_file("image")) return send_error(res, 400, "multipart field 'image' is required");
    const auto file = req.get_file_value("image");
    const std::string model_id = req.has_file("model_id") ? req.get_file_value("model_id").content : "";
    const std::string prompt_id = req.has_file("prompt_id") ? req.get_file_value("prompt_id").content : "";
    if (model_id.empty()) return send_error(res, 400, "multipart field 'model_id' is required");
    const ModelSpec& model = options.config.model(model_id);

    MediaType media;
    if (!file.content_type.empty() && file.content_type != "application/octet-stream") {
      media = parse_media_type(file.content_type);
    } else {
      media = media_type_for_path(file.filename);
    }
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(file.content.data()),
                                              file.content.size());
    const ImageAttachment image = encode_image(bytes, media);
    const fs::path stored = media_dir / "images" / (image.content_hash + std::string(extension_for(media)));
    if (!fs::exists(stored)) write_atomically(stored, file.content);

    EngineeredPrompt prompt;
    if (prompt_id.empty() || prompt_id == "default") {
      prompt = default_prompt();
    } else {
      auto p = find_prompt(prompt_id);
      if (!p) return send_error(res, 404, "unknown prompt " + prompt_id);
      prompt = std::move(*p);
    }

    const CompletionResult c = registry.get(model.provider)->complete(prompt.text, &image, model.params());
    const ParsedReport parsed = parse_report(c.text, options.config.run.scale);
    json issues = json::array();
    for (const ParseIssue& i : parsed.issues) issues.push_back(issue_to_json(i));
    send_json(res, 200,
              json{{"model_id", model.id},
                   {"prompt_id", prompt.id()},
                   {"image_sha256", image.content_hash},
                   {"report", report_to_json(parsed.report)},
                   {"canonical", canonicalize(parsed.report)},
                   {"issues", std::move(issues)},
                   {"latency_s", c.latency_s},
                   {"reference_latency_s", model.reference_latency_s
                                               ? json(*model.reference_latency_s)
                                               : (reference_latency(model.id) ? json(*reference_latency(model.id))
                                                                              : json(nullptr))}});
  }

  void update_record(const std::string& id, const json& body, httplib::Response& res) {
    std::unique_lock lock(records_mu);
    DatasetRecord* current = find_record(id);
    if (!current) return send_error(res, 404, "unknown record " + id);
    json merged = record_to_json(*current);
    for (const char* key : {"ground_truth", "review_status", "failure_labels", "notes"}) {
      if (body.contains(key)) merged[key] = body.at(key);
    }
    if (body.contains("record_id") && body.at("record_id") != id) {
      return send_error(res, 400, "record_id cannot be changed");
    }
    DatasetRecord updated = record_from_json(merged, dataset_path.parent_path(), options.config.run.scale);
    std::vector<DatasetRecord> next = records;
    for (DatasetRecord& r : next) {
      if (r.record_id == id) r = updated;
    }
    save_dataset(dataset_path, next);
    records = std::move(next);
    send_json(res, 200, record_to_json(updated));
  }

  void start_run(const httplib::Request& req, httplib::Response& res) {
    json body = json::object();
    if (!is_blank(req.body)) {
      const auto parsed = parse_body(req, res);
      if (!parsed) return;
      body = *parsed;
    }
    std::vector<std::string> model_ids;
    if (body.contains("models")) model_ids = body.at("models").get<std::vector<std::string>>();

    std::vector<DatasetRecord> snapshot;
    {
      std::shared_lock lock(records_mu);
      snapshot = records;
    }
    ensure_evaluable(snapshot);
    RunConfig rc = build_run_config(options.config, registry, default_prompt(), model_ids);
    const EmbeddingConfig emb = build_embedding_config(options.config, registry);

    json dataset_state = json::array();
    for (const DatasetRecord& r : snapshot) dataset_state.push_back(record_to_json(r));
    const std::string run_id =
        sha256_hex(run_fingerprint(rc, emb, snapshot) + sha256_hex(dataset_state.dump())).substr(0, 16);

    {
      std::lock_guard lock(runs_mu);
      const auto it = runs.find(run_id);
      if (it != runs.end() && it->second.state != RunState::kFailed) {
        return send_json(res, 202, json{{"run_id", run_id}});
      }
      if (fs::exists(media_dir / "runs" / (run_id + ".json"))) return send_json(res, 202, json{{"run_id", run_id}});
      runs[run_id] = RunEntry{};
      workers.emplace_back([this, run_id, rc = std::move(rc), emb, snapshot = std::move(snapshot)] {
        RunEntry done;
        try {
          const std::vector<RunResult> results = run_models(rc, snapshot);
          done.table = eval_table_to_json(evaluate_run(rc, results, snapshot, emb));
          done.state = RunState::kDone;
          write_atomically(media_dir / "runs" / (run_id + ".json"), done.table.dump(2));
        } catch (const std::exception& e) {
          done.state = RunState::kFailed;
          done.error = e.what();
          spdlog::error("run {} failed: {}", run_id, e.what());
        }
        std::lock_guard lock(runs_mu);
        runs[run_id] = std::move(done);
      });
    }
    send_json(res, 202, json{{"run_id", run_id}});
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Service::run() {
  if (!impl_->server.listen_after_bind()) throw Error("service stopped with an error");
}

void Service::stop() {
  impl_->server.stop();
  std::vector<std::jthread> workers;
  {
    std::lock_guard lock(impl_->runs_mu);
    workers.swap(impl_->workers);
  }
  workers.clear();
}

const ProviderRegistry& Service::registry() const { return impl_->registry; }

}  // namespace hazlens
