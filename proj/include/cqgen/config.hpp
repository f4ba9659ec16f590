#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqgen/backend.hpp"
#include "cqgen/errors.hpp"
#include "cqgen/prompts.hpp"
#include "cqgen/schemes.hpp"

namespace cqgen {

enum class PromptMode { conversational, direct };

inline std::string_view to_string(PromptMode mode) {
  return mode == PromptMode::conversational ? "conversational" : "direct";
}

// All ablation knobs for one run. The shipped profiles are presets over
// exactly these fields; nothing else varies between them.
struct RunConfig {
  PromptMode prompt_mode = PromptMode::conversational;
  bool sort_schemes = true;
  ErMode er_mode = ErMode::omit;
  int rank_k = 3;
  // Pre-sort ablation: slide a fixed window over the raw (unsorted,
  // duplicate-preserving) scheme-name list. Only valid with
  // sort_schemes = false.
  std::optional<int> legacy_window;
  bool tuned_ranking = true;
  // Single-prompt mode: one instruction per intervention, no staging.
  bool baseline_mode = false;
  std::string baseline_prompt;

  std::string system_prompt = std::string(prompts::kDefaultSystemPrompt);
  BackendConfig backend;
  int parallelism = 1;
  std::string run_label = "run";

  void validate() const {
    if (rank_k < 1) throw ConfigError("rank_k must be >= 1");
    if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
    if (legacy_window) {
      if (sort_schemes)
        throw ConfigError("legacy_window requires sort_schemes = false");
      if (*legacy_window < 1) throw ConfigError("legacy_window must be >= 1");
    }
    if (baseline_mode && baseline_prompt.empty())
      throw ConfigError("baseline profile requires a baseline prompt text");
    if (!baseline_mode && !baseline_prompt.empty())
      throw ConfigError("baseline prompt given but profile is not baseline");
    if (run_label.empty()) throw ConfigError("run_label must be non-empty");
    backend.validate();
  }
};

inline std::vector<std::string> profile_names() {
  return {"baseline", "direct", "con", "con+ss", "con+ss+rank",
          "con+ss+rank-er"};
}

// Named presets for the study's comparison rows. Each profile differs from
// its predecessor by one knob:
//   baseline        single combined prompt, no staging
//   direct          staged, each stage a standalone request
//   con             staged, one conversational session
//   con+ss          + sorted/grouped scheme names (drops the legacy window)
//   con+ss+rank     + tuned ranking instruction
//   con+ss+rank-er  + "ER" names handled template-free (the default)
inline RunConfig profile_config(std::string_view name) {
  RunConfig cfg;
  cfg.run_label = std::string(name);
  if (name == "baseline") {
    cfg.baseline_mode = true;
    return cfg;
  }
  if (name == "direct" || name == "con") {
    cfg.prompt_mode =
        name == "direct" ? PromptMode::direct : PromptMode::conversational;
    cfg.sort_schemes = false;
    cfg.legacy_window = 2;
    cfg.er_mode = ErMode::map;
    cfg.tuned_ranking = false;
    return cfg;
  }
  if (name == "con+ss") {
    cfg.er_mode = ErMode::map;
    cfg.tuned_ranking = false;
    return cfg;
  }
  if (name == "con+ss+rank") {
    cfg.er_mode = ErMode::map;
    return cfg;
  }
  if (name == "con+ss+rank-er") return cfg;

  std::string valid;
  for (const std::string& p : profile_names()) {
    if (!valid.empty()) valid += ", ";
    valid += p;
  }
  throw ConfigError("unknown profile '" + std::string(name) +
                    "' (valid: " + valid + ")");
}

}  // namespace cqgen
