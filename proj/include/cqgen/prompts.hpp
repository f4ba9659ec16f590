#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cqgen/errors.hpp"
#include "cqgen/schemes.hpp"

namespace cqgen {
namespace prompts {

// Stage templates. These strings are load-bearing: downstream golden tests
// compare assembled prompts byte-for-byte, so edits here are breaking.

inline constexpr std::string_view kExtraction =
    R"__(Extract arguments for each of the scheme in {scheme_name} from the input paragraph. These schemes are defined as follows:

{scheme_description}
If no argument can be extracted to fit the scheme, extract the main arguments with premise and conclusion.)__";

inline constexpr std::string_view kGeneration =
    R"__({cq_template}

With the help of the information above, generate a list of critical questions to ask regarding the extracted arguments.
You may rephrase the critical question to make it more fluent.
Return only a list questions as defined below:

[{"CQ1": "the content of the critical question"}, ...])__";

inline constexpr std::string_view kRankingTuned =
    R"__({intervention}

A helpful critical question can potentially challenge one of the arguments in the text.
Rank and select top three most helpful critical questions.
Return ONLY the question id in a Python list:
```python
[id_1, ...])__";

// Ablation variant used by the profiles that predate the tuned ranking
// instruction: identical except for the helpfulness framing sentence.
inline constexpr std::string_view kRankingPlain =
    R"__({intervention}

Rank and select top three most helpful critical questions.
Return ONLY the question id in a Python list:
```python
[id_1, ...])__";

inline constexpr std::string_view kTopUp =
    R"__({intervention}

A helpful critical question can potentially challenge one of the arguments in the text.
Provide me 3 more critical questions that should be asked given the arguments from the text above.
Return only the questions as following format:

[{"CQ1": "the content of the critical question"}...])__";

inline constexpr std::string_view kNoTemplateSentence =
    "No predefined critical question template is available for this scheme.";

inline constexpr std::string_view kDefaultSystemPrompt =
    "You are a helpful assistant specialized in argument analysis.";

}  // namespace prompts

// Single-pass "{key}" substitution. Only keys present in `values` are
// replaced; every other byte — including braces in literal JSON examples
// and in substituted values — passes through untouched, so there is no
// recursive expansion or template injection.
inline std::string render_prompt(
    std::string_view tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size());
  std::size_t i = 0;
  while (i < tpl.size()) {
    char c = tpl[i];
    if (c == '{') {
      std::size_t close = tpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        std::string key(tpl.substr(i + 1, close - i - 1));
        auto it = values.find(key);
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += c;
    ++i;
  }
  return out;
}

// One definition block as shown to the model inside the extraction prompt.
inline std::string render_scheme_description(const SchemeTemplate& scheme) {
  std::string out = "Scheme " + scheme.name + ": " + scheme.description;
  for (const std::string& premise : scheme.premises)
    out += "\nPremise: " + premise;
  out += "\nConclusion: " + scheme.conclusion;
  if (!scheme.variables.empty()) {
    out += "\nVariables: ";
    for (std::size_t i = 0; i < scheme.variables.size(); ++i) {
      if (i > 0) out += "; ";
      out += scheme.variables[i].slot + ": " + scheme.variables[i].gloss;
    }
  }
  return out;
}

// Fills the extraction template for one batch of scheme groups.
// groups/resolutions must be aligned; repeat occurrences render as
// "Name (xN)". Template-free resolutions contribute no description block.
inline std::string build_extraction_prompt(
    const std::vector<SchemeGroup>& groups,
    const std::vector<SchemeResolution>& resolutions) {
  if (groups.empty())
    throw UsageError("build_extraction_prompt: groups must be non-empty");
  if (groups.size() != resolutions.size())
    throw UsageError("build_extraction_prompt: groups/resolutions mismatch");

  std::string names;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (i > 0) names += ", ";
    names += groups[i].name;
    if (groups[i].count >= 2)
      names += " (x" + std::to_string(groups[i].count) + ")";
  }

  std::string descriptions;
  std::vector<const SchemeTemplate*> rendered;
  for (const SchemeResolution& r : resolutions) {
    if (!r.templated()) continue;
    // Two names can map onto one base scheme; show its definition once.
    bool dup = false;
    for (const SchemeTemplate* seen : rendered) dup = dup || seen == r.scheme;
    if (dup) continue;
    rendered.push_back(r.scheme);
    if (!descriptions.empty()) descriptions += "\n\n";
    descriptions += render_scheme_description(*r.scheme);
  }

  return render_prompt(prompts::kExtraction, {{"scheme_name", names},
                                              {"scheme_description",
                                               descriptions}});
}

// Fills the generation template for one turn. Templated schemes get their
// numbered question-template block; everything else gets the no-template
// sentence (the rest of the instruction is identical either way).
inline std::string build_cq_prompt(const SchemeResolution& resolution) {
  std::string block;
  if (resolution.templated() && resolution.scheme->has_cqs()) {
    const auto& cqs = resolution.scheme->cq_templates;
    for (std::size_t i = 0; i < cqs.size(); ++i) {
      if (i > 0) block += "\n";
      block += std::to_string(i + 1) + ". " + cqs[i];
    }
  } else {
    block = std::string(prompts::kNoTemplateSentence);
  }
  return render_prompt(prompts::kGeneration, {{"cq_template", block}});
}

inline std::string build_topup_prompt(const std::string& intervention_text) {
  return render_prompt(prompts::kTopUp, {{"intervention", intervention_text}});
}

}  // namespace cqgen
