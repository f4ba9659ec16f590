#pragma once

#include <atomic>
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "cqgen/backend.hpp"
#include "cqgen/chat.hpp"
#include "cqgen/config.hpp"
#include "cqgen/dataset.hpp"
#include "cqgen/errors.hpp"
#include "cqgen/extraction.hpp"
#include "cqgen/generation.hpp"
#include "cqgen/prompts.hpp"
#include "cqgen/ranking.hpp"
#include "cqgen/runlog.hpp"
#include "cqgen/schemes.hpp"
#include "cqgen/turns.hpp"

namespace cqgen {

struct InterventionOutcome {
  SubmissionEntry entry;  // meaningful only when !failed
  bool failed = false;
  std::string error;
  int warnings = 0;
};

namespace detail {

// Direct-mode list turn: every attempt is a standalone fresh session, so a
// parse retry re-issues the identical single-shot request.
inline std::vector<std::string> direct_list_turn(
    const std::string& user_text, const RunConfig& config,
    ChatBackend& backend, RunLog& log, std::string_view intervention_id,
    std::string_view stage, int turn_index, int& warnings) {
  for (int attempt = 1;; ++attempt) {
    ChatSession session("pipeline", config.system_prompt);
    std::string reply = logged_send(session, user_text, backend, log,
                                    intervention_id, stage, turn_index);
    std::optional<std::vector<std::string>> texts = parse_cq_list(reply);
    if (texts) return *texts;
    log.event(intervention_id, stage, "parse_warning",
              nlohmann::ordered_json{{"turn", turn_index},
                                     {"attempt", attempt},
                                     {"raw", reply}});
    ++warnings;
    if (attempt == 2) return {};
  }
}

// Baseline: one self-contained prompt per attempt in a fresh session. The
// configured prompt may reference {intervention}; otherwise the intervention
// text is prefixed.
inline std::vector<CriticalQuestion> run_baseline(
    const Intervention& intervention, const RunConfig& config,
    ChatBackend& backend, RunLog& log, int& warnings) {
  std::string user_text;
  if (config.baseline_prompt.find("{intervention}") != std::string::npos) {
    user_text = render_prompt(config.baseline_prompt,
                              {{"intervention", intervention.text}});
  } else {
    user_text = intervention.text + "\n\n" + config.baseline_prompt;
  }
  std::vector<std::string> texts;
  for (int attempt = 1;; ++attempt) {
    ChatSession session("baseline", config.system_prompt);
    std::string reply = logged_send(session, user_text, backend, log,
                                    intervention.id, "baseline", 0);
    std::optional<std::vector<std::string>> parsed = parse_cq_list(reply);
    if (parsed) {
      texts = *parsed;
      break;
    }
    log.event(intervention.id, "baseline", "parse_warning",
              nlohmann::ordered_json{{"turn", 0},
                                     {"attempt", attempt},
                                     {"raw", reply}});
    ++warnings;
    if (attempt == 2) break;
  }
  std::vector<CriticalQuestion> questions;
  append_questions(questions, texts, "baseline", 0);
  return questions;
}

// Staged run, conversational mode: one shared session carries extraction,
// generation, and the optional top-up turn.
inline std::vector<CriticalQuestion> run_staged_conversational(
    const Intervention& intervention, const ExtractionPlan& eplan,
    const GenerationPlan& gplan, const RunConfig& config, ChatBackend& backend,
    RunLog& log, int& warnings) {
  ChatSession session("pipeline", config.system_prompt);
  run_extraction(session, intervention.text, eplan, backend, log,
                 intervention.id);
  std::vector<CriticalQuestion> questions = run_generation(
      session, intervention.text, gplan, backend, log, intervention.id,
      warnings);
  questions = ensure_minimum(session, std::move(questions), intervention.text,
                             config.rank_k, gplan.turn_count(), backend, log,
                             intervention.id, warnings);
  log.event(intervention.id, "pipeline", "session_complete",
            nlohmann::ordered_json{{"messages", session.size()},
                                   {"turns", session.turns()}});
  return questions;
}

// Staged run, direct mode: every request is a standalone session, with the
// intervention text and prior stage outputs inlined into each prompt.
inline std::vector<CriticalQuestion> run_staged_direct(
    const Intervention& intervention, const ExtractionPlan& eplan,
    const GenerationPlan& gplan, const RunConfig& config, ChatBackend& backend,
    RunLog& log, int& warnings) {
  std::vector<std::string> extraction_replies;
  for (std::size_t i = 0; i < eplan.batches.size(); ++i) {
    const ExtractionBatch& batch = eplan.batches[i];
    std::string prompt =
        build_extraction_prompt(batch.groups, batch.resolutions);
    ChatSession session("pipeline", config.system_prompt);
    try {
      extraction_replies.push_back(
          logged_send(session, intervention.text + "\n\n" + prompt, backend,
                      log, intervention.id, "extraction",
                      static_cast<int>(i)));
    } catch (const BackendError& e) {
      throw BackendError(
          "extraction turn " + std::to_string(i) + ": " + e.what(),
          e.attempts());
    }
  }

  std::string context;
  if (!extraction_replies.empty()) {
    context = "Extracted arguments:\n";
    for (std::size_t i = 0; i < extraction_replies.size(); ++i) {
      if (i > 0) context += "\n\n";
      context += extraction_replies[i];
    }
  }

  std::vector<CriticalQuestion> questions;
  int turn = 0;
  auto issue = [&](const SchemeResolution& resolution,
                   const std::string& source) {
    std::string prompt = build_cq_prompt(resolution);
    std::string user_text = context.empty()
                                ? intervention.text + "\n\n" + prompt
                                : context + "\n\n" + prompt;
    std::vector<std::string> texts =
        direct_list_turn(user_text, config, backend, log, intervention.id,
                         "generation", turn, warnings);
    append_questions(questions, texts, source, turn);
    ++turn;
  };
  for (const SchemeTemplate* scheme : gplan.templated)
    issue({scheme, ResolutionOrigin::catalog}, scheme->name);
  if (gplan.template_free)
    issue({nullptr, ResolutionOrigin::unknown_name}, kTemplateFreeSource);

  if (static_cast<int>(questions.size()) < config.rank_k) {
    std::string listing = "Generated critical questions:\n";
    for (const CriticalQuestion& q : questions)
      listing += std::to_string(q.id) + ". " + q.text + "\n";
    std::string user_text =
        listing + "\n" + build_topup_prompt(intervention.text);
    std::vector<std::string> texts =
        direct_list_turn(user_text, config, backend, log, intervention.id,
                         "topup", turn, warnings);
    append_questions(questions, texts, kTemplateFreeSource, turn);
    if (static_cast<int>(questions.size()) < config.rank_k) {
      log.event(intervention.id, "topup", "entry_shortfall",
                nlohmann::ordered_json{{"have", questions.size()},
                                       {"want", config.rank_k}});
      ++warnings;
    }
  }
  return questions;
}

}  // namespace detail

// Runs one intervention end to end. Failures never escape: any error is
// captured on the outcome (and logged) so sibling interventions proceed.
inline InterventionOutcome process_intervention(const Intervention& intervention,
                                                const Catalog& catalog,
                                                const RunConfig& config,
                                                ChatBackend& backend,
                                                RunLog& log) {
  InterventionOutcome out;
  out.entry.intervention_id = intervention.id;
  try {
    std::vector<CriticalQuestion> questions;
    if (config.baseline_mode) {
      questions = detail::run_baseline(intervention, config, backend, log,
                                       out.warnings);
    } else {
      ExtractionPlan eplan =
          plan_extraction(intervention.scheme_names, catalog, config);
      GenerationPlan gplan = plan_generation(eplan.resolutions);
      if (config.prompt_mode == PromptMode::conversational) {
        questions = detail::run_staged_conversational(
            intervention, eplan, gplan, config, backend, log, out.warnings);
      } else {
        questions = detail::run_staged_direct(intervention, eplan, gplan,
                                              config, backend, log,
                                              out.warnings);
      }
    }

    if (config.baseline_mode) {
      // Baseline emits its first rank_k questions directly; there is no
      // ranking stage to reorder them.
      const std::size_t take = std::min(
          questions.size(), static_cast<std::size_t>(config.rank_k));
      for (std::size_t i = 0; i < take; ++i)
        out.entry.cqs.push_back(
            {static_cast<int>(i), questions[i].text});
      if (static_cast<int>(questions.size()) < config.rank_k) {
        log.event(intervention.id, "baseline", "entry_shortfall",
                  nlohmann::ordered_json{{"have", questions.size()},
                                         {"want", config.rank_k}});
        ++out.warnings;
      }
    } else if (questions.empty()) {
      log.event(intervention.id, "ranking", "skipped",
                nlohmann::ordered_json{{"reason", "no candidate questions"}});
    } else {
      RankingResult ranked =
          run_ranking(intervention.text, questions, config, backend, log,
                      intervention.id, out.warnings);
      for (std::size_t i = 0; i < ranked.selected.size(); ++i)
        out.entry.cqs.push_back(
            {static_cast<int>(i), ranked.selected[i].text});
    }
  } catch (const std::exception& e) {
    log.event(intervention.id, "pipeline", "failed",
              nlohmann::ordered_json{{"error", e.what()}});
    out.failed = true;
    out.error = e.what();
    out.entry.cqs.clear();
  }
  return out;
}

struct RunSummary {
  int succeeded = 0;
  int failed = 0;
  int warnings = 0;
  std::vector<std::pair<std::string, std::string>> failures;  // id, error
  long long wall_ms = 0;
};

// Processes the whole dataset with a fixed-size worker pool pulling from an
// atomic index. Entries for successes are returned in dataset order.
inline RunSummary run_dataset(const std::vector<Intervention>& interventions,
                              const Catalog& catalog, const RunConfig& config,
                              ChatBackend& backend, RunLog& log,
                              std::vector<SubmissionEntry>& entries_out) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  log.event("-", "run", "start",
            nlohmann::ordered_json{
                {"run_label", config.run_label},
                {"prompt_mode", std::string(to_string(config.prompt_mode))},
                {"sort_schemes", config.sort_schemes},
                {"er_mode",
                 config.er_mode == ErMode::map ? "map" : "omit"},
                {"rank_k", config.rank_k},
                {"tuned_ranking", config.tuned_ranking},
                {"baseline_mode", config.baseline_mode},
                {"parallelism", config.parallelism},
                {"backend", backend.kind()},
                {"interventions", interventions.size()}});

  const std::size_t n = interventions.size();
  std::vector<InterventionOutcome> outcomes(n);
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      outcomes[i] =
          process_intervention(interventions[i], catalog, config, backend, log);
    }
  };
  const int workers =
      std::max(1, std::min<int>(config.parallelism, static_cast<int>(n)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  RunSummary summary;
  for (std::size_t i = 0; i < n; ++i) {
    const InterventionOutcome& o = outcomes[i];
    summary.warnings += o.warnings;
    if (o.failed) {
      ++summary.failed;
      summary.failures.emplace_back(interventions[i].id, o.error);
    } else {
      ++summary.succeeded;
      entries_out.push_back(o.entry);
    }
  }
  summary.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  log.event("-", "run", "summary",
            nlohmann::ordered_json{{"succeeded", summary.succeeded},
                                   {"failed", summary.failed},
                                   {"warnings", summary.warnings},
                                   {"wall_ms", summary.wall_ms}});
  return summary;
}

inline RunSummary run_dataset_file(const std::string& dataset_path,
                                   const std::string& out_path,
                                   const Catalog& catalog,
                                   const RunConfig& config,
                                   ChatBackend& backend, RunLog& log) {
  std::vector<Intervention> interventions = load_interventions(dataset_path);
  std::vector<SubmissionEntry> entries;
  RunSummary summary =
      run_dataset(interventions, catalog, config, backend, log, entries);
  write_submission(entries, out_path);
  return summary;
}

}  // namespace cqgen
