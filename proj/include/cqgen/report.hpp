#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cqgen/errors.hpp"

namespace cqgen {

enum class EvalLabel { useful, unhelpful, invalid, not_able_to_evaluate };

inline constexpr std::array<std::string_view, 4> kLabelColumns = {
    "Useful", "Unhelpful", "Invalid", "N/A"};

inline EvalLabel parse_label(std::string_view s) {
  if (s == "Useful") return EvalLabel::useful;
  if (s == "Unhelpful") return EvalLabel::unhelpful;
  if (s == "Invalid") return EvalLabel::invalid;
  if (s == "not_able_to_evaluate" || s == "N/A")
    return EvalLabel::not_able_to_evaluate;
  throw SchemaError("unknown evaluation label \"" + std::string(s) + "\"");
}

inline std::string_view to_string(EvalLabel label) {
  switch (label) {
    case EvalLabel::useful: return "Useful";
    case EvalLabel::unhelpful: return "Unhelpful";
    case EvalLabel::invalid: return "Invalid";
    case EvalLabel::not_able_to_evaluate: return "not_able_to_evaluate";
  }
  return "";
}

struct LabeledQuestion {
  std::string intervention_id;
  std::string question;
  EvalLabel label = EvalLabel::useful;
  std::string run;
};

// Percentages are held as integer hundredths (58.82% -> 5882) computed with
// exact half-up rounding, so formatting is reproducible across platforms.
struct LabelDistribution {
  std::array<int, 4> counts{};
  int total = 0;
  std::array<std::int64_t, 4> hundredths{};

  static LabelDistribution from_counts(const std::array<int, 4>& counts) {
    LabelDistribution d;
    d.counts = counts;
    for (int c : counts) {
      if (c < 0) throw UsageError("label counts must be non-negative");
      d.total += c;
    }
    if (d.total == 0)
      throw UsageError("cannot compute a distribution over zero labels");
    for (std::size_t i = 0; i < counts.size(); ++i) {
      // round(100 * 100 * c / total) with ties away from zero, in integers
      d.hundredths[i] = (20000LL * counts[i] + d.total) / (2LL * d.total);
    }
    return d;
  }

  // For rows whose percentages are externally given rather than recomputable
  // from raw counts; counts/total stay zero.
  static LabelDistribution from_hundredths(
      const std::array<std::int64_t, 4>& hundredths) {
    LabelDistribution d;
    d.hundredths = hundredths;
    return d;
  }
};

struct RunDistributions {
  std::vector<std::string> order;  // first-appearance order of run labels
  std::map<std::string, LabelDistribution> by_run;
};

// JSONL, one {"intervention_id", "cq", "label", "run"} object per line.
// Errors cite the 1-based line number.
inline std::vector<LabeledQuestion> parse_labels(std::string_view text) {
  std::vector<LabeledQuestion> out;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = (eol == std::string_view::npos)
                                ? text.substr(pos)
                                : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    ++line_no;
    bool blank = true;
    for (char c : line)
      if (c != ' ' && c != '\t' && c != '\r') blank = false;
    if (blank) continue;
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded())
      throw SchemaError("labels line " + std::to_string(line_no) +
                        ": invalid JSON");
    if (!rec.is_object())
      throw SchemaError("labels line " + std::to_string(line_no) +
                        ": expected an object");
    for (const char* field : {"intervention_id", "cq", "label", "run"}) {
      if (!rec.contains(field) || !rec[field].is_string())
        throw SchemaError("labels line " + std::to_string(line_no) +
                          ": missing or non-string \"" + field + "\"");
    }
    LabeledQuestion q;
    q.intervention_id = rec["intervention_id"].get<std::string>();
    q.question = rec["cq"].get<std::string>();
    q.run = rec["run"].get<std::string>();
    try {
      q.label = parse_label(rec["label"].get<std::string>());
    } catch (const SchemaError& e) {
      throw SchemaError("labels line " + std::to_string(line_no) + ": " +
                        e.what());
    }
    out.push_back(std::move(q));
  }
  return out;
}

inline std::vector<LabeledQuestion> load_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open labels file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return parse_labels(text);
}

inline RunDistributions aggregate_labels(
    const std::vector<LabeledQuestion>& items) {
  RunDistributions out;
  std::map<std::string, std::array<int, 4>> counts;
  for (const LabeledQuestion& q : items) {
    auto [it, inserted] = counts.try_emplace(q.run);
    if (inserted) out.order.push_back(q.run);
    ++it->second[static_cast<std::size_t>(q.label)];
  }
  for (const std::string& run : out.order)
    out.by_run.emplace(run, LabelDistribution::from_counts(counts[run]));
  return out;
}

inline std::string format_hundredths(std::int64_t hundredths) {
  if (hundredths < 0) throw UsageError("negative percentage");
  std::string s = std::to_string(hundredths / 100);
  std::int64_t frac = hundredths % 100;
  s += '.';
  s += static_cast<char>('0' + frac / 10);
  s += static_cast<char>('0' + frac % 10);
  return s;
}

namespace detail {

inline const LabelDistribution& run_row(const RunDistributions& dists,
                                        const std::string& run) {
  auto it = dists.by_run.find(run);
  if (it == dists.by_run.end())
    throw SchemaError("run label not found: \"" + run + "\"");
  return it->second;
}

}  // namespace detail

// Fixed-width text table; percentage columns are right-aligned with two
// decimals. `order` selects and orders the rows (empty -> dists.order).
inline std::string render_table(const RunDistributions& dists,
                                const std::vector<std::string>& order = {}) {
  const std::vector<std::string>& runs = order.empty() ? dists.order : order;
  std::size_t run_w = 3;  // "Run"
  for (const std::string& r : runs) run_w = std::max(run_w, r.size());
  std::array<std::size_t, 4> col_w{};
  for (std::size_t i = 0; i < 4; ++i) col_w[i] = kLabelColumns[i].size();
  std::vector<std::array<std::string, 4>> cells;
  for (const std::string& r : runs) {
    const LabelDistribution& d = detail::run_row(dists, r);
    std::array<std::string, 4> row;
    for (std::size_t i = 0; i < 4; ++i) {
      row[i] = format_hundredths(d.hundredths[i]);
      col_w[i] = std::max(col_w[i], row[i].size());
    }
    cells.push_back(std::move(row));
  }
  std::ostringstream out;
  out << "Run" << std::string(run_w - 3, ' ');
  for (std::size_t i = 0; i < 4; ++i)
    out << "  " << std::string(col_w[i] - kLabelColumns[i].size(), ' ')
        << kLabelColumns[i];
  out << '\n';
  for (std::size_t r = 0; r < runs.size(); ++r) {
    out << runs[r] << std::string(run_w - runs[r].size(), ' ');
    for (std::size_t i = 0; i < 4; ++i)
      out << "  " << std::string(col_w[i] - cells[r][i].size(), ' ')
          << cells[r][i];
    out << '\n';
  }
  return out.str();
}

inline std::string render_csv(const RunDistributions& dists,
                              const std::vector<std::string>& order = {}) {
  const std::vector<std::string>& runs = order.empty() ? dists.order : order;
  std::ostringstream out;
  out << "run";
  for (std::string_view col : kLabelColumns) out << ',' << col;
  out << '\n';
  for (const std::string& r : runs) {
    const LabelDistribution& d = detail::run_row(dists, r);
    out << r;
    for (std::size_t i = 0; i < 4; ++i)
      out << ',' << format_hundredths(d.hundredths[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace cqgen
