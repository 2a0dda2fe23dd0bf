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

#include "hazlens/reportparse.hpp"

#include <optional>

#include <nlohmann/json.hpp>

#include "hazlens/encoding.hpp"

namespace hazlens {

using json = nlohmann::json;

namespace {

enum class LabelType { kSummary, kHazard, kSeverity, kExplanation, kSuggestion };

struct Label {
  LabelType type;
  std::size_t start = 0;          // offset of the label's first character
  std::size_t content_begin = 0;  // first byte after the label
};

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Case-insensitive match of `word` at `pos`; does not check what follows.
bool match_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (lower(text[pos + k]) != word[k]) return false;
  }
  return true;
}

std::size_t skip_inline_space(std::string_view text, std::size_t pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  return pos;
}

// "<word>\s*:" ; returns the offset just past the colon.
std::optional<std::size_t> match_field(std::string_view text, std::size_t pos,
                                       std::string_view word, bool allow_plural) {
  if (!match_at(text, pos, word)) return std::nullopt;
  std::size_t p = pos + word.size();
  if (allow_plural && p < text.size() && lower(text[p]) == 's') ++p;
  if (p < text.size() && is_alnum(text[p])) return std::nullopt;
  p = skip_inline_space(text, p);
  if (p < text.size() && text[p] == ':') return p + 1;
  return std::nullopt;
}

// "hazard" [no[.] | number | #] <digits> (':' | '.' | ')' | '-')
std::optional<std::size_t> match_hazard(std::string_view text, std::size_t pos) {
  if (!match_at(text, pos, "hazard")) return std::nullopt;
  std::size_t p = pos + 6;
  if (p < text.size() && is_alnum(text[p])) return std::nullopt;
  p = skip_inline_space(text, p);
  if (match_at(text, p, "number") && (p + 6 >= text.size() || !is_alnum(text[p + 6]))) {
    p += 6;
  } else if (match_at(text, p, "no") && (p + 2 >= text.size() || !is_alnum(text[p + 2]))) {
    p += 2;
    if (p < text.size() && text[p] == '.') ++p;
  }
  p = skip_inline_space(text, p);
  if (p < text.size() && text[p] == '#') p = skip_inline_space(text, p + 1);
  const std::size_t digits_begin = p;
  while (p < text.size() && is_digit(text[p]) && p - digits_begin < 9) ++p;
  if (p == digits_begin || (p < text.size() && is_digit(text[p]))) return std::nullopt;
  p = skip_inline_space(text, p);
  if (p < text.size() && (text[p] == ':' || text[p] == '.' || text[p] == ')' || text[p] == '-')) {
    return p + 1;
  }
  return std::nullopt;
}

std::vector<Label> scan_labels(std::string_view text) {
  std::vector<Label> labels;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i > 0 && is_alnum(text[i - 1])) continue;
    const char c = lower(text[i]);
    std::optional<std::size_t> end;
    LabelType type{};
    switch (c) {
      case 's':
        if ((end = match_field(text, i, "summary", false))) {
          type = LabelType::kSummary;
        } else if ((end = match_field(text, i, "severity", false))) {
          type = LabelType::kSeverity;
        } else if ((end = match_field(text, i, "suggestion", true))) {
          type = LabelType::kSuggestion;
        }
        break;
      case 'h':
        if ((end = match_hazard(text, i))) type = LabelType::kHazard;
        break;
      case 'e':
        if ((end = match_field(text, i, "explanation", false))) type = LabelType::kExplanation;
        break;
      default:
        break;
    }
    if (end) {
      labels.push_back(Label{type, i, *end});
      i = *end - 1;
    }
  }
  return labels;
}

bool is_trim_char(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' ||
         c == '*' || c == '#' || c == '-';
}

// Strips whitespace and markdown decoration around a field body.
std::string field_text(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_trim_char(s[b])) ++b;
  while (e > b && is_trim_char(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string hazard_name_text(std::string_view s) {
  std::string name = field_text(s);
  while (!name.empty() && name.back() == '.') {
    name.pop_back();
    name = field_text(name);
  }
  return name;
}

struct SeverityParse {
  std::optional<int> value;
  std::string problem;
};

SeverityParse parse_severity(std::string_view body, const SeverityScale& scale) {
  const std::string s = field_text(body);
  std::size_t p = 0;
  long long numerator = 0;
  while (p < s.size() && is_digit(s[p]) && p < 9) numerator = numerator * 10 + (s[p++] - '0');
  if (p == 0) return {std::nullopt, "severity is not a number"};
  if (p < s.size() && is_digit(s[p])) return {std::nullopt, "severity value too large"};
  if (p + 1 < s.size() && s[p] == '.' && is_digit(s[p + 1])) {
    return {std::nullopt, "severity is not an integer"};
  }
  std::size_t q = skip_inline_space(s, p);
  if (q < s.size() && s[q] == '/') {
    q = skip_inline_space(s, q + 1);
    const std::size_t d0 = q;
    long long denominator = 0;
    while (q < s.size() && is_digit(s[q]) && q - d0 < 9) denominator = denominator * 10 + (s[q++] - '0');
    if (q == d0) return {std::nullopt, "severity fraction lacks a denominator"};
    if (denominator != scale.high) {
      return {std::nullopt, "severity denominator " + std::to_string(denominator) +
                                " does not match scale maximum " + std::to_string(scale.high)};
    }
  }
  if (numerator < scale.low || numerator > scale.high) {
    return {std::nullopt, "severity " + std::to_string(numerator) + " outside scale " +
                              std::to_string(scale.low) + "-" + std::to_string(scale.high)};
  }
  return {static_cast<int>(numerator), {}};
}

struct Block {
  std::size_t hazard_label = 0;
  std::string name;
  std::optional<std::string> severity_body;
  std::size_t severity_at = 0;
  std::optional<std::string> explanation;
  std::optional<std::string> suggestion;
};

}  // namespace

std::string_view to_string(ParseIssueKind kind) {
  switch (kind) {
    case ParseIssueKind::kMissingSummary:
      return "missing_summary";
    case ParseIssueKind::kBadSeverity:
      return "bad_severity";
    case ParseIssueKind::kTruncatedBlock:
      return "truncated_block";
    case ParseIssueKind::kNoHazardBlocks:
      return "no_hazard_blocks";
  }
  return "unknown";
}

ParseIssueKind parse_issue_kind(std::string_view name) {
  if (name == "missing_summary") return ParseIssueKind::kMissingSummary;
  if (name == "bad_severity") return ParseIssueKind::kBadSeverity;
  if (name == "truncated_block") return ParseIssueKind::kTruncatedBlock;
  if (name == "no_hazard_blocks") return ParseIssueKind::kNoHazardBlocks;
  throw ReportError("unknown parse issue kind '" + std::string(name) + "'");
}

ParsedReport parse_report(std::string_view text, SeverityScale scale) {
  if (text.empty()) throw ReportParseError(ParseIssueKind::kNoHazardBlocks, "empty model output");

  const std::vector<Label> labels = scan_labels(text);
  auto body_of = [&](std::size_t li) {
    const std::size_t end = li + 1 < labels.size() ? labels[li + 1].start : text.size();
    return text.substr(labels[li].content_begin, end - labels[li].content_begin);
  };

  ParsedReport out;
  out.report.raw_text = std::string(text);
  std::optional<std::size_t> summary_label;
  std::vector<Block> blocks;

  for (std::size_t li = 0; li < labels.size(); ++li) {
    const Label& label = labels[li];
    switch (label.type) {
      case LabelType::kSummary:
        if (!summary_label) {
          summary_label = li;
          out.report.summary = field_text(body_of(li));
        }
        break;
      case LabelType::kHazard:
        blocks.push_back(Block{label.start, hazard_name_text(body_of(li)), {}, 0, {}, {}});
        break;
      case LabelType::kSeverity:
        if (!blocks.empty() && !blocks.back().severity_body) {
          blocks.back().severity_body = std::string(body_of(li));
          blocks.back().severity_at = label.start;
        }
        break;
      case LabelType::kExplanation:
        if (!blocks.empty() && !blocks.back().explanation) {
          blocks.back().explanation = field_text(body_of(li));
        }
        break;
      case LabelType::kSuggestion:
        if (!blocks.empty() && !blocks.back().suggestion) {
          blocks.back().suggestion = field_text(body_of(li));
        }
        break;
    }
  }

  auto issue = [&](ParseIssueKind kind, std::size_t at, std::string message) {
    out.issues.push_back(ParseIssue{kind, at, std::move(message)});
  };

  for (const Block& b : blocks) {
    if (b.name.empty()) {
      issue(ParseIssueKind::kTruncatedBlock, b.hazard_label, "hazard block without a name; dropped");
      continue;
    }
    if (!b.severity_body) {
      issue(ParseIssueKind::kTruncatedBlock, b.hazard_label,
            "hazard '" + b.name + "' has no severity; dropped");
      continue;
    }
    const SeverityParse sev = parse_severity(*b.severity_body, scale);
    if (!sev.value) {
      issue(ParseIssueKind::kBadSeverity, b.severity_at,
            "hazard '" + b.name + "': " + sev.problem + "; dropped");
      continue;
    }
    if (!b.explanation || !b.suggestion) {
      issue(ParseIssueKind::kTruncatedBlock, b.hazard_label,
            "hazard '" + b.name + "' is missing " +
                (!b.explanation ? std::string("an explanation") : std::string("a suggestion")));
    }
    HazardRecord rec;
    rec.index = static_cast<int>(out.report.hazards.size()) + 1;
    rec.name = b.name;
    rec.severity = *sev.value;
    rec.explanation = b.explanation.value_or("");
    rec.suggestion = b.suggestion.value_or("");
    out.report.hazards.push_back(std::move(rec));
  }

  if (!summary_label) {
    if (out.report.hazards.empty()) {
      if (blocks.empty()) {
        throw ReportParseError(ParseIssueKind::kNoHazardBlocks,
                               "no summary and no hazard blocks found");
      }
      const ParseIssue& first = out.issues.front();
      throw ReportParseError(first.kind, "no summary and no usable hazard blocks: " + first.message);
    }
    issue(ParseIssueKind::kMissingSummary, 0, "no 'Summary:' label found");
  } else if (out.report.summary.empty()) {
    issue(ParseIssueKind::kMissingSummary, labels[*summary_label].start, "summary is empty");
  }
  if (blocks.empty()) {
    issue(ParseIssueKind::kNoHazardBlocks, summary_label ? labels[*summary_label].start : 0,
          "no hazard blocks found");
  }
  return out;
}

std::string canonicalize(const HazardReport& report) {
  auto field = [](std::string_view label, std::string_view value) {
    std::string line(label);
    line += ':';
    if (!value.empty()) {
      line += ' ';
      line += value;
    }
    return line;
  };
  std::string out = field("Summary", report.summary);
  for (std::size_t i = 0; i < report.hazards.size(); ++i) {
    const HazardRecord& h = report.hazards[i];
    out += '\n';
    out += field("Hazard No. " + std::to_string(i + 1), h.name);
    out += '\n';
    out += field("Severity", std::to_string(h.severity));
    out += '\n';
    out += field("Explanation", h.explanation);
    out += '\n';
    out += field("Suggestion", h.suggestion);
  }
  return out;
}

std::string hazard_slice(const HazardReport& report) {
  std::string out = "Summary: " + report.summary;
  for (std::size_t i = 0; i < report.hazards.size(); ++i) {
    out += i == 0 ? " ; " : "; ";
    out += report.hazards[i].name;
  }
  return out;
}

json report_to_json(const HazardReport& report) {
  json hazards = json::array();
  for (const HazardRecord& h : report.hazards) {
    hazards.push_back({{"index", h.index},
                       {"name", h.name},
                       {"severity", h.severity},
                       {"explanation", h.explanation},
                       {"suggestion", h.suggestion}});
  }
  return json{{"summary", report.summary}, {"hazards", std::move(hazards)}, {"raw_text", report.raw_text}};
}

HazardReport report_from_json(const json& j, SeverityScale scale) {
  if (!j.is_object()) throw ReportError("report must be a JSON object");
  auto str = [](const json& obj, const char* key, bool required) -> std::string {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (required) throw ReportError(std::string("report field '") + key + "' is missing");
      return {};
    }
    if (!it->is_string()) throw ReportError(std::string("report field '") + key + "' must be a string");
    return it->get<std::string>();
  };
  HazardReport r;
  r.summary = str(j, "summary", true);
  r.raw_text = str(j, "raw_text", false);
  const auto hz = j.find("hazards");
  if (hz != j.end() && !hz->is_null()) {
    if (!hz->is_array()) throw ReportError("report field 'hazards' must be an array");
    for (std::size_t i = 0; i < hz->size(); ++i) {
      const json& h = (*hz)[i];
      if (!h.is_object()) throw ReportError("hazard entry must be an object");
      HazardRecord rec;
      const auto idx = h.find("index");
      rec.index = (idx != h.end() && idx->is_number_integer()) ? idx->get<int>() : static_cast<int>(i) + 1;
      if (rec.index != static_cast<int>(i) + 1) {
        throw ReportError("hazard index " + std::to_string(rec.index) + " does not match position " +
                          std::to_string(i + 1));
      }
      rec.name = str(h, "name", true);
      if (is_blank(rec.name)) throw ReportError("hazard " + std::to_string(i + 1) + " has a blank name");
      const auto sev = h.find("severity");
      if (sev == h.end() || !sev->is_number_integer()) {
        throw ReportError("hazard " + std::to_string(i + 1) + " needs an integer severity");
      }
      rec.severity = sev->get<int>();
      if (!scale.contains(rec.severity)) {
        throw ReportError("hazard " + std::to_string(i + 1) + " severity " +
                          std::to_string(rec.severity) + " outside scale");
      }
      rec.explanation = str(h, "explanation", false);
      rec.suggestion = str(h, "suggestion", false);
      r.hazards.push_back(std::move(rec));
    }
  }
  return r;
}

json issue_to_json(const ParseIssue& issue) {
  return json{{"kind", std::string(to_string(issue.kind))},
              {"location", issue.location},
              {"message", issue.message}};
}

ParseIssue issue_from_json(const json& j) {
  return ParseIssue{parse_issue_kind(j.at("kind").get<std::string>()),
                    j.value("location", std::size_t{0}), j.value("message", std::string{})};
}

}  // namespace hazlens
