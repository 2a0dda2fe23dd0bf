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

#include "hazlens/prompting.hpp"

#include <nlohmann/json.hpp>

#include "hazlens/encoding.hpp"
#include "hazlens/prompt_assets.hpp"

namespace hazlens {

using json = nlohmann::json;

void ResponseTemplate::validate() const {
  for (const std::string* label :
       {&summary_label, &hazard_label, &severity_label, &explanation_label, &suggestion_label}) {
    if (is_blank(*label)) throw PromptError("response template labels must be non-empty");
  }
  if (severity_scale.low >= severity_scale.high) {
    throw PromptError("severity scale low must be below high");
  }
}

std::string ResponseTemplate::render() const {
  const std::string range =
      std::to_string(severity_scale.low) + " to " + std::to_string(severity_scale.high);
  std::string out;
  out += summary_label + ": <one sentence naming every hazard identified>\n";
  out += hazard_label + " 1: <hazard name>\n";
  out += severity_label + ": <integer from " + range + ">\n";
  out += explanation_label + ": <why this is a hazard in this scene>\n";
  out += suggestion_label + ": <one actionable mitigation>\n";
  out += "(Repeat the " + hazard_label + " block for each further hazard, numbering 2, 3, ...)\n";
  return out;
}

json ResponseTemplate::to_json() const {
  return json{{"summary_label", summary_label},
              {"hazard_label", hazard_label},
              {"severity_label", severity_label},
              {"explanation_label", explanation_label},
              {"suggestion_label", suggestion_label},
              {"severity_scale", {severity_scale.low, severity_scale.high}}};
}

std::string_view to_string(PromptProvenance p) {
  return p == PromptProvenance::kMetaPrompted ? "meta_prompted" : "deterministic";
}

std::string EngineeredPrompt::id() const { return sha256_hex(text).substr(0, 16); }

json EngineeredPrompt::to_json() const {
  return json{{"id", id()},
              {"text", text},
              {"guideline_fingerprint", guideline_fingerprint},
              {"template_fingerprint", template_fingerprint},
              {"provenance", std::string(hazlens::to_string(provenance))}};
}

EngineeredPrompt EngineeredPrompt::from_json(const json& j) {
  EngineeredPrompt p;
  p.text = j.at("text").get<std::string>();
  if (is_blank(p.text)) throw PromptError("engineered prompt text is empty");
  p.guideline_fingerprint = j.value("guideline_fingerprint", std::string{});
  p.template_fingerprint = j.value("template_fingerprint", std::string{});
  const std::string prov = j.value("provenance", std::string("deterministic"));
  if (prov == "meta_prompted") {
    p.provenance = PromptProvenance::kMetaPrompted;
  } else if (prov == "deterministic") {
    p.provenance = PromptProvenance::kDeterministic;
  } else {
    throw PromptError("unknown prompt provenance '" + prov + "'");
  }
  return p;
}

std::string guideline_fingerprint(const GuidelineSet& set) {
  return sha256_hex(guidelines_to_json(set).dump());
}

std::string template_fingerprint(const ResponseTemplate& tmpl) {
  return sha256_hex(tmpl.to_json().dump());
}

std::string render_template(std::string_view skeleton, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(skeleton.size());
  std::size_t pos = 0;
  while (pos < skeleton.size()) {
    const std::size_t open = skeleton.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(skeleton.substr(pos));
      break;
    }
    const std::size_t close = skeleton.find("}}", open + 2);
    if (close == std::string_view::npos) throw PromptError("unterminated placeholder in prompt skeleton");
    out.append(skeleton.substr(pos, open - pos));
    const std::string name(skeleton.substr(open + 2, close - open - 2));
    const auto it = vars.find(name);
    if (it == vars.end()) throw PromptError("prompt skeleton references unknown placeholder '" + name + "'");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

namespace {

std::map<std::string, std::string> prompt_vars(const GuidelineSet& set, const ResponseTemplate& tmpl) {
  tmpl.validate();
  return {{"guidelines", render_guidelines_text(set)},
          {"response_template", tmpl.render()},
          {"severity_low", std::to_string(tmpl.severity_scale.low)},
          {"severity_high", std::to_string(tmpl.severity_scale.high)}};
}

}  // namespace

std::string build_meta_prompt(const GuidelineSet& set, const ResponseTemplate& tmpl) {
  return render_template(assets::meta_prompt(), prompt_vars(set, tmpl));
}

EngineeredPrompt engineer_prompt(std::string_view meta, Provider& provider, const GenerationParams& params,
                                 std::string guideline_fp, std::string template_fp) {
  CompletionResult r = provider.complete(meta, nullptr, params);
  if (is_blank(r.text)) throw PromptError("empty engineered prompt");
  return EngineeredPrompt{std::move(r.text), std::move(guideline_fp), std::move(template_fp),
                          PromptProvenance::kMetaPrompted};
}

EngineeredPrompt engineer_prompt(const GuidelineSet& set, const ResponseTemplate& tmpl, Provider& provider,
                                 const GenerationParams& params) {
  return engineer_prompt(build_meta_prompt(set, tmpl), provider, params, guideline_fingerprint(set),
                         template_fingerprint(tmpl));
}

EngineeredPrompt deterministic_prompt(const GuidelineSet& set, const ResponseTemplate& tmpl) {
  return EngineeredPrompt{render_template(assets::inference_prompt(), prompt_vars(set, tmpl)),
                          guideline_fingerprint(set), template_fingerprint(tmpl),
                          PromptProvenance::kDeterministic};
}

}  // namespace hazlens
