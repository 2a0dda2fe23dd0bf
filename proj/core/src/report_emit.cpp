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

#include "hazlens/report_emit.hpp"

#include <fstream>
#include <system_error>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace hazlens {

namespace fs = std::filesystem;

std::string_view to_string(ReportFormat f) {
  switch (f) {
    case ReportFormat::kJson:
      return "json";
    case ReportFormat::kCsv:
      return "csv";
    case ReportFormat::kMarkdown:
      return "md";
  }
  return "unknown";
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "md" || name == "markdown") return ReportFormat::kMarkdown;
  throw ReportError("unknown report format '" + std::string(name) + "'");
}

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Pipes and newlines would break a table cell.
std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

std::string fixed3(double v) { return fmt::format("{:.3f}", v); }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw ReportError("write failed for " + path.string());
}

}  // namespace

std::string render_json(const EvalTable& table) { return eval_table_to_json(table).dump(2) + "\n"; }

std::string render_csv(const EvalTable& table) {
  std::string out = "model_id,track,n,cosine,bert_precision,bert_recall,bert_f1,judge_normalized,judge_n\n";
  for (const ScoreRow& r : table.rows) {
    out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{},{}\n", csv_field(r.model_id), to_string(r.track), r.n,
                       r.cosine, r.bert_precision, r.bert_recall, r.bert_f1,
                       r.judge_normalized ? fmt::format("{:.6f}", *r.judge_normalized) : std::string(), r.judge_n);
  }
  return out;
}

std::string render_markdown(const EvalTable& table) {
  std::string out = "# Evaluation report\n\n";
  out += "Run fingerprint: `" + table.run_fingerprint + "`\n\n";

  out += "## Hazard Detection Accuracy\n\n";
  out += "| Model | n | Cosine Similarity | BERTScore Precision | BERTScore Recall | BERTScore F1 |\n";
  out += "|---|---:|---:|---:|---:|---:|\n";
  for (const ScoreRow& r : table.rows) {
    if (r.track != Track::kHazardDetection) continue;
    out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", md_cell(r.model_id), r.n, fixed3(r.cosine),
                       fixed3(r.bert_precision), fixed3(r.bert_recall), fixed3(r.bert_f1));
  }

  out += "\n## Overall Response Accuracy and Completeness\n\n";
  out += "| Model | n | Cosine Similarity | BERTScore Precision | BERTScore Recall | BERTScore F1 | LLM as Judge | "
         "Judge n |\n";
  out += "|---|---:|---:|---:|---:|---:|---:|---:|\n";
  for (const ScoreRow& r : table.rows) {
    if (r.track != Track::kOverall) continue;
    out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |\n", md_cell(r.model_id), r.n, fixed3(r.cosine),
                       fixed3(r.bert_precision), fixed3(r.bert_recall), fixed3(r.bert_f1),
                       r.judge_normalized ? fixed3(*r.judge_normalized) : std::string("n/a"), r.judge_n);
  }

  out += "\n## Inference Speed\n\n";
  out += "| Model | n | Mean (s) | p50 (s) | p95 (s) | Reference (s) |\n";
  out += "|---|---:|---:|---:|---:|---:|\n";
  for (const LatencyRow& l : table.latency_rows) {
    out += fmt::format("| {} | {} | {:.2f} | {:.2f} | {:.2f} | {} |\n", md_cell(l.model_id), l.n, l.mean_s, l.p50_s,
                       l.p95_s, l.reference_s ? fmt::format("{:.2f}", *l.reference_s) : std::string("n/a"));
  }

  out += "\n## Exclusions\n\n";
  if (table.exclusions.empty()) {
    out += "None.\n";
  } else {
    out += "| Record | Model | Stage | Reason |\n|---|---|---|---|\n";
    for (const Exclusion& e : table.exclusions) {
      out += fmt::format("| {} | {} | {} | {} |\n", md_cell(e.record_id), md_cell(e.model_id), md_cell(e.stage),
                         md_cell(e.reason));
    }
  }
  return out;
}

std::vector<fs::path> emit_report(const EvalTable& table, const fs::path& out_dir,
                                  const std::vector<ReportFormat>& formats) {
  if (table.rows.empty()) throw ReportError("evaluation table has no score rows");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ReportError("cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  for (ReportFormat f : formats) {
    fs::path path;
    std::string content;
    switch (f) {
      case ReportFormat::kJson:
        path = out_dir / "report.json";
        content = render_json(table);
        break;
      case ReportFormat::kCsv:
        path = out_dir / "report.csv";
        content = render_csv(table);
        break;
      case ReportFormat::kMarkdown:
        path = out_dir / "report.md";
        content = render_markdown(table);
        break;
    }
    write_file(path, content);
    written.push_back(path);
  }
  return written;
}

}  // namespace hazlens
