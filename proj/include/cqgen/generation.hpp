#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cqgen/backend.hpp"
#include "cqgen/chat.hpp"
#include "cqgen/errors.hpp"
#include "cqgen/prompts.hpp"
#include "cqgen/runlog.hpp"
#include "cqgen/schemes.hpp"
#include "cqgen/turns.hpp"

namespace cqgen {

constexpr const char* kTemplateFreeSource = "template_free";

struct CriticalQuestion {
  int id = 0;                 // contiguous from 0 within one intervention
  std::string text;
  std::string source_scheme;  // scheme name or "template_free"
  int origin_turn = 0;        // generation/top-up turn that produced it
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' ||
           c == '\v';
  };
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

// End index (exclusive) of the bracket run opening at text[start] == '[',
// or npos when unterminated. Brackets inside JSON string literals are
// ignored, as is anything escaped.
inline std::size_t balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
      if (depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

// Drops commas that (modulo whitespace) directly precede ']' or '}',
// outside string literals — the single most common LLM output defect.
inline std::string strip_trailing_commas(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      out += c;
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      continue;
    }
    if (c == ',') {
      std::size_t j = i + 1;
      while (j < text.size() &&
             std::isspace(static_cast<unsigned char>(text[j])))
        ++j;
      if (j < text.size() && (text[j] == ']' || text[j] == '}')) continue;
    }
    out += c;
  }
  return out;
}

// Walks every balanced [...] candidate left to right, parsing each as JSON
// (retrying once with trailing commas stripped) and classifying via
// `conform`, which returns nullopt for a non-conforming array. The first
// non-empty conforming list wins; a conforming-but-empty list is remembered
// and returned only if nothing better appears.
template <typename T, typename Conform>
std::optional<std::vector<T>> scan_for_list(std::string_view reply,
                                            Conform conform) {
  bool saw_empty = false;
  for (std::size_t i = 0; i < reply.size(); ++i) {
    if (reply[i] != '[') continue;
    std::size_t end = balanced_end(reply, i);
    if (end == std::string_view::npos) continue;
    std::string_view candidate = reply.substr(i, end - i);
    nlohmann::json doc = nlohmann::json::parse(candidate, nullptr, false);
    if (doc.is_discarded())
      doc = nlohmann::json::parse(strip_trailing_commas(candidate), nullptr,
                                  false);
    if (doc.is_discarded() || !doc.is_array()) continue;
    std::optional<std::vector<T>> result = conform(doc);
    if (!result) continue;
    if (!result->empty()) return result;
    saw_empty = true;
  }
  if (saw_empty) return std::vector<T>{};
  return std::nullopt;
}

}  // namespace detail

// Extracts the model's question list from a raw reply. Accepted element
// shapes: single-entry objects with a string value (any key name) and bare
// strings; anything else makes that array non-conforming. Questions are
// whitespace-trimmed; empty ones are dropped. nullopt = no parseable list.
inline std::optional<std::vector<std::string>> parse_cq_list(
    std::string_view reply_text) {
  return detail::scan_for_list<std::string>(
      reply_text,
      [](const nlohmann::json& arr) -> std::optional<std::vector<std::string>> {
        std::vector<std::string> texts;
        for (const auto& el : arr) {
          std::string raw;
          if (el.is_string()) {
            raw = el.get<std::string>();
          } else if (el.is_object() && el.size() == 1 &&
                     el.begin().value().is_string()) {
            raw = el.begin().value().get<std::string>();
          } else {
            return std::nullopt;
          }
          std::string text = detail::trim(raw);
          if (!text.empty()) texts.push_back(std::move(text));
        }
        return texts;
      });
}

// Canonical rendering of a question list — the shape the generation prompt
// requests. parse_cq_list inverts this exactly for non-degenerate input.
inline std::string render_cq_list(const std::vector<std::string>& questions) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < questions.size(); ++i) {
    nlohmann::ordered_json obj;
    obj["CQ" + std::to_string(i + 1)] = questions[i];
    arr.push_back(std::move(obj));
  }
  return arr.dump();
}

// Case-folded, whitespace-collapsed key used for duplicate detection.
inline std::string normalize_question(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Appends texts as questions with fresh contiguous ids, dropping exact
// duplicates of anything already present. Returns how many were kept.
inline int append_questions(std::vector<CriticalQuestion>& questions,
                            const std::vector<std::string>& texts,
                            const std::string& source_scheme,
                            int origin_turn) {
  std::set<std::string> seen;
  for (const CriticalQuestion& q : questions)
    seen.insert(normalize_question(q.text));
  int kept = 0;
  for (const std::string& text : texts) {
    if (!seen.insert(normalize_question(text)).second) continue;
    CriticalQuestion q;
    q.id = static_cast<int>(questions.size());
    q.text = text;
    q.source_scheme = source_scheme;
    q.origin_turn = origin_turn;
    questions.push_back(std::move(q));
    ++kept;
  }
  return kept;
}

// Turn plan: one turn per distinct templated-with-questions scheme in
// first-appearance order, then a single combined turn covering everything
// that resolved template-free (also used when there are no schemes at all).
struct GenerationPlan {
  std::vector<const SchemeTemplate*> templated;
  bool template_free = false;

  int turn_count() const {
    return static_cast<int>(templated.size()) + (template_free ? 1 : 0);
  }
};

inline GenerationPlan plan_generation(
    const std::vector<SchemeResolution>& resolutions) {
  GenerationPlan plan;
  if (resolutions.empty()) {
    plan.template_free = true;
    return plan;
  }
  for (const SchemeResolution& r : resolutions) {
    if (r.templated() && r.scheme->has_cqs()) {
      if (std::find(plan.templated.begin(), plan.templated.end(), r.scheme) ==
          plan.templated.end())
        plan.templated.push_back(r.scheme);
    } else {
      plan.template_free = true;
    }
  }
  return plan;
}

namespace detail {

// Shared parse-with-one-retry for conversational turns: the retry re-sends
// the identical user text on the same session, so the failed exchange stays
// in history and the retry has a distinct transcript digest.
inline std::vector<std::string> conversational_list_turn(
    ChatSession& session, const std::string& user_text, ChatBackend& backend,
    RunLog& log, std::string_view intervention_id, std::string_view stage,
    int turn_index, int& warnings) {
  for (int attempt = 1;; ++attempt) {
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

}  // namespace detail

// Conversational question generation over an extraction-bearing session.
inline std::vector<CriticalQuestion> run_generation(
    ChatSession& session, const std::string& intervention_text,
    const GenerationPlan& plan, ChatBackend& backend, RunLog& log,
    std::string_view intervention_id, int& warnings) {
  std::vector<CriticalQuestion> questions;
  int turn = 0;
  auto issue = [&](const SchemeResolution& resolution,
                   const std::string& source) {
    std::string prompt = build_cq_prompt(resolution);
    // When the scheme list was empty there was no extraction stage, so the
    // intervention text opens the session here instead.
    std::string user_text = session.turns() == 0
                                ? intervention_text + "\n\n" + prompt
                                : prompt;
    std::vector<std::string> texts = detail::conversational_list_turn(
        session, user_text, backend, log, intervention_id, "generation", turn,
        warnings);
    append_questions(questions, texts, source, turn);
    ++turn;
  };

  for (const SchemeTemplate* scheme : plan.templated)
    issue({scheme, ResolutionOrigin::catalog}, scheme->name);
  if (plan.template_free)
    issue({nullptr, ResolutionOrigin::unknown_name}, kTemplateFreeSource);
  return questions;
}

// Issues the single extra generation turn when fewer than k questions
// exist. turn_index continues the generation turn numbering.
inline std::vector<CriticalQuestion> ensure_minimum(
    ChatSession& session, std::vector<CriticalQuestion> questions,
    const std::string& intervention_text, int k, int turn_index,
    ChatBackend& backend, RunLog& log, std::string_view intervention_id,
    int& warnings) {
  if (k < 1) throw UsageError("ensure_minimum: k must be >= 1");
  if (static_cast<int>(questions.size()) >= k) return questions;

  // The top-up template itself carries the intervention text, so no
  // first-turn prefixing applies here.
  std::string prompt = build_topup_prompt(intervention_text);
  std::vector<std::string> texts = detail::conversational_list_turn(
      session, prompt, backend, log, intervention_id, "topup", turn_index,
      warnings);
  append_questions(questions, texts, kTemplateFreeSource, turn_index);

  if (static_cast<int>(questions.size()) < k) {
    log.event(intervention_id, "topup", "entry_shortfall",
              nlohmann::ordered_json{
                  {"have", questions.size()}, {"want", k}});
    ++warnings;
  }
  return questions;
}

}  // namespace cqgen
