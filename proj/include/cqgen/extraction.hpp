#pragma once

#include <string>
#include <vector>

#include "cqgen/backend.hpp"
#include "cqgen/chat.hpp"
#include "cqgen/config.hpp"
#include "cqgen/errors.hpp"
#include "cqgen/prompts.hpp"
#include "cqgen/runlog.hpp"
#include "cqgen/schemes.hpp"
#include "cqgen/turns.hpp"

namespace cqgen {

struct ExtractionTurn {
  std::vector<std::string> group_names;  // scheme names covered by this turn
  std::string prompt_text;               // user message as sent
  std::string reply_text;                // assistant reply, verbatim
};

// Packs groups into turns. The capacity unit is template occurrences (the
// historical window held two raw scheme names), and a group is atomic: all
// occurrences of one scheme stay in one turn even when that overflows the
// capacity. Hence (A,2) fills a turn alone while (A,1),(B,1) share one.
inline std::vector<std::vector<SchemeGroup>> batch_groups(
    const std::vector<SchemeGroup>& groups, int capacity = 2) {
  if (capacity < 1) throw UsageError("batch_groups: capacity must be >= 1");
  std::vector<std::vector<SchemeGroup>> batches;
  int used = 0;
  for (const SchemeGroup& g : groups) {
    if (batches.empty() || used + g.count > capacity) {
      batches.emplace_back();
      used = 0;
    }
    batches.back().push_back(g);
    used += g.count;
  }
  return batches;
}

// Disjoint fixed-size windows over the raw name list, duplicates intact.
inline std::vector<std::vector<std::string>> legacy_windows(
    const std::vector<std::string>& names, int window) {
  if (window < 1) throw UsageError("legacy_windows: window must be >= 1");
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < names.size();
       i += static_cast<std::size_t>(window)) {
    std::size_t end = std::min(names.size(), i + static_cast<std::size_t>(window));
    out.emplace_back(names.begin() + static_cast<std::ptrdiff_t>(i),
                     names.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

struct ExtractionBatch {
  std::vector<SchemeGroup> groups;
  std::vector<SchemeResolution> resolutions;  // aligned with groups
};

struct ExtractionPlan {
  std::vector<ExtractionBatch> batches;
  // Flattened resolutions in batch order; generation derives its turn plan
  // from this.
  std::vector<SchemeResolution> resolutions;
};

namespace detail {

// Groups one window's names by first appearance (the raw order matters in
// the unsorted ablation, so no lexicographic sort here).
inline std::vector<SchemeGroup> group_window(
    const std::vector<std::string>& names) {
  std::vector<SchemeGroup> groups;
  for (const std::string& n : names) {
    bool found = false;
    for (SchemeGroup& g : groups) {
      if (g.name == n) {
        ++g.count;
        found = true;
        break;
      }
    }
    if (!found) groups.push_back({n, 1});
  }
  return groups;
}

}  // namespace detail

inline ExtractionPlan plan_extraction(
    const std::vector<std::string>& scheme_names, const Catalog& catalog,
    const RunConfig& config) {
  ExtractionPlan plan;
  if (scheme_names.empty()) return plan;

  auto resolve_all = [&](const std::vector<SchemeGroup>& groups) {
    std::vector<SchemeResolution> rs;
    rs.reserve(groups.size());
    for (const SchemeGroup& g : groups)
      rs.push_back(resolve_scheme(g.name, catalog, config.er_mode));
    return rs;
  };

  if (config.sort_schemes) {
    std::vector<SchemeGroup> groups = group_scheme_names(scheme_names);
    for (auto& batch : batch_groups(groups))
      plan.batches.push_back({batch, resolve_all(batch)});
  } else {
    int window = config.legacy_window.value_or(
        static_cast<int>(scheme_names.size()));
    for (const auto& names : legacy_windows(scheme_names, window)) {
      std::vector<SchemeGroup> groups = detail::group_window(names);
      plan.batches.push_back({groups, resolve_all(groups)});
    }
  }
  for (const ExtractionBatch& b : plan.batches)
    for (const SchemeResolution& r : b.resolutions)
      plan.resolutions.push_back(r);
  return plan;
}

// Conversational extraction: one send per batch on the shared session. The
// intervention text opens the session's first user turn; later turns rely
// on history.
inline std::vector<ExtractionTurn> run_extraction(
    ChatSession& session, const std::string& intervention_text,
    const ExtractionPlan& plan, ChatBackend& backend, RunLog& log,
    std::string_view intervention_id) {
  if (intervention_text.empty())
    throw UsageError("run_extraction: intervention_text must be non-empty");
  std::vector<ExtractionTurn> turns;
  for (std::size_t i = 0; i < plan.batches.size(); ++i) {
    const ExtractionBatch& batch = plan.batches[i];
    std::string prompt = build_extraction_prompt(batch.groups,
                                                 batch.resolutions);
    std::string user_text = session.turns() == 0
                                ? intervention_text + "\n\n" + prompt
                                : prompt;
    std::string reply;
    try {
      reply = logged_send(session, user_text, backend, log, intervention_id,
                          "extraction", static_cast<int>(i));
    } catch (const BackendError& e) {
      throw BackendError("extraction turn " + std::to_string(i) + ": " +
                             e.what(),
                         e.attempts());
    }
    ExtractionTurn turn;
    for (const SchemeGroup& g : batch.groups) turn.group_names.push_back(g.name);
    turn.prompt_text = std::move(user_text);
    turn.reply_text = std::move(reply);
    turns.push_back(std::move(turn));
  }
  return turns;
}

}  // namespace cqgen
