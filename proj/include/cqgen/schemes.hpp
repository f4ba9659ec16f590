#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cqgen/errors.hpp"

namespace cqgen {

struct SchemeVariable {
  std::string slot;   // single capital letter, e.g. "E"
  std::string gloss;  // one-line meaning, e.g. "expert"
};

struct SchemeTemplate {
  std::string name;
  std::string description;
  std::vector<SchemeVariable> variables;
  std::vector<std::string> premises;
  std::string conclusion;
  std::vector<std::string> cq_templates;
  bool no_cqs = false;  // source provides no critical questions

  bool has_cqs() const { return !no_cqs && !cq_templates.empty(); }
};

namespace detail {

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace detail

// Standalone single capital letters ("E", not "Expert" or "DNA") in their
// order of appearance, duplicates included.
inline std::vector<std::string> find_slot_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c < 'A' || c > 'Z') continue;
    bool left_ok = (i == 0) || !detail::is_word_char(text[i - 1]);
    bool right_ok = (i + 1 == text.size()) || !detail::is_word_char(text[i + 1]);
    if (left_ok && right_ok) out.emplace_back(1, c);
  }
  return out;
}

// Replaces every standalone capital-letter slot that has an assignment;
// unassigned slots are left untouched.
inline std::string render_slots(
    std::string_view tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tpl.size());
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    char c = tpl[i];
    bool left_ok = (i == 0) || !detail::is_word_char(tpl[i - 1]);
    bool right_ok = (i + 1 == tpl.size()) || !detail::is_word_char(tpl[i + 1]);
    if (c >= 'A' && c <= 'Z' && left_ok && right_ok) {
      auto it = values.find(std::string(1, c));
      if (it != values.end()) {
        out += it->second;
        continue;
      }
    }
    out += c;
  }
  return out;
}

class Catalog {
 public:
  // Validates catalog-wide invariants; throws CatalogError on violation.
  static Catalog from_schemes(std::vector<SchemeTemplate> schemes) {
    std::set<std::string> seen;
    for (const SchemeTemplate& s : schemes) {
      if (s.name.empty()) throw CatalogError("scheme with empty name");
      if (!seen.insert(s.name).second)
        throw CatalogError("duplicate scheme name: " + s.name);
      validate_scheme(s);
    }
    Catalog c;
    c.schemes_ = std::move(schemes);
    for (std::size_t i = 0; i < c.schemes_.size(); ++i)
      c.index_[c.schemes_[i].name] = i;
    return c;
  }

  const SchemeTemplate* find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &schemes_[it->second];
  }

  const std::vector<SchemeTemplate>& schemes() const { return schemes_; }
  std::size_t size() const { return schemes_.size(); }

 private:
  static void validate_scheme(const SchemeTemplate& s) {
    std::set<std::string> declared;
    for (const SchemeVariable& v : s.variables) {
      if (v.slot.size() != 1 || v.slot[0] < 'A' || v.slot[0] > 'Z')
        throw CatalogError("scheme " + s.name + ": slot '" + v.slot +
                           "' must be a single capital letter");
      if (!declared.insert(v.slot).second)
        throw CatalogError("scheme " + s.name + ": duplicate slot " + v.slot);
    }
    if (s.premises.empty())
      throw CatalogError("scheme " + s.name + ": premises must be non-empty");
    if (s.conclusion.empty())
      throw CatalogError("scheme " + s.name + ": conclusion must be non-empty");
    auto check_slots = [&](std::string_view text, const char* where) {
      for (const std::string& slot : find_slot_tokens(text)) {
        if (declared.count(slot) == 0)
          throw CatalogError("scheme " + s.name + ": undeclared slot " + slot +
                             " in " + where);
      }
    };
    for (const std::string& p : s.premises) check_slots(p, "premise");
    check_slots(s.conclusion, "conclusion");
    for (const std::string& cq : s.cq_templates) check_slots(cq, "cq_template");
    if (s.no_cqs && !s.cq_templates.empty())
      throw CatalogError("scheme " + s.name +
                         ": no_cqs schemes must have empty cq_templates");
    if (!s.no_cqs && s.cq_templates.empty())
      throw CatalogError("scheme " + s.name +
                         ": cq_templates empty but scheme is not flagged no_cqs");
  }

  std::vector<SchemeTemplate> schemes_;
  std::map<std::string, std::size_t> index_;
};

namespace detail {

inline int line_of_byte(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
}

inline std::string require_string(const nlohmann::ordered_json& rec,
                                  const char* field, const std::string& who) {
  if (!rec.contains(field) || !rec[field].is_string())
    throw CatalogError(who + ": missing or non-string \"" + field + "\"");
  return rec[field].get<std::string>();
}

inline std::vector<std::string> require_string_array(
    const nlohmann::ordered_json& rec, const char* field,
    const std::string& who) {
  if (!rec.contains(field) || !rec[field].is_array())
    throw CatalogError(who + ": missing or non-array \"" + field + "\"");
  std::vector<std::string> out;
  for (const auto& v : rec[field]) {
    if (!v.is_string())
      throw CatalogError(who + ": \"" + field + "\" must contain only strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace detail

// Parses one UTF-8 JSON document: a list of scheme records. Field typos are
// rejected rather than ignored so the validate-catalog command catches them.
inline Catalog load_catalog_text(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CatalogError(std::string("catalog parse error: ") + e.what(),
                       detail::line_of_byte(text, e.byte));
  }
  if (!doc.is_array()) throw CatalogError("catalog must be a JSON array");

  static const std::set<std::string> kKnown = {
      "name", "description", "variables", "premises",
      "conclusion", "cq_templates", "no_cqs"};

  std::vector<SchemeTemplate> schemes;
  for (const auto& rec : doc) {
    if (!rec.is_object())
      throw CatalogError("catalog records must be JSON objects");
    std::string who = rec.contains("name") && rec["name"].is_string()
                          ? "scheme " + rec["name"].get<std::string>()
                          : "unnamed scheme";
    for (const auto& [key, value] : rec.items()) {
      (void)value;
      if (kKnown.count(key) == 0)
        throw CatalogError(who + ": unknown field \"" + key + "\"");
    }
    SchemeTemplate s;
    s.name = detail::require_string(rec, "name", who);
    s.description = detail::require_string(rec, "description", who);
    if (!rec.contains("variables") || !rec["variables"].is_array())
      throw CatalogError(who + ": missing or non-array \"variables\"");
    for (const auto& v : rec["variables"]) {
      if (!v.is_object())
        throw CatalogError(who + ": variables must be {slot, gloss} objects");
      SchemeVariable var;
      var.slot = detail::require_string(v, "slot", who);
      var.gloss = detail::require_string(v, "gloss", who);
      s.variables.push_back(std::move(var));
    }
    s.premises = detail::require_string_array(rec, "premises", who);
    s.conclusion = detail::require_string(rec, "conclusion", who);
    s.cq_templates = detail::require_string_array(rec, "cq_templates", who);
    if (rec.contains("no_cqs")) {
      if (!rec["no_cqs"].is_boolean())
        throw CatalogError(who + ": \"no_cqs\" must be a boolean");
      s.no_cqs = rec["no_cqs"].get<bool>();
    }
    schemes.push_back(std::move(s));
  }
  return Catalog::from_schemes(std::move(schemes));
}

inline Catalog load_catalog_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot open catalog file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_catalog_text(buf.str());
}

// --- scheme-name grouping and resolution -----------------------------------

struct SchemeGroup {
  std::string name;
  int count = 1;

  bool operator==(const SchemeGroup& other) const {
    return name == other.name && count == other.count;
  }
};

// Collapses duplicates and orders groups lexicographically, so the result
// is invariant under permutation of the input list.
inline std::vector<SchemeGroup> group_scheme_names(
    const std::vector<std::string>& names) {
  std::map<std::string, int> counts;
  for (const std::string& n : names) ++counts[n];
  std::vector<SchemeGroup> out;
  out.reserve(counts.size());
  for (const auto& [name, count] : counts) out.push_back({name, count});
  return out;
}

enum class ErMode { map, omit };

enum class ResolutionOrigin {
  catalog,      // found in the catalog under its own name
  er_mapped,    // "ER"-prefixed name mapped onto its base scheme
  er_omitted,   // "ER"-prefixed name deliberately left template-free
  unknown_name  // not in the catalog at all
};

// Templated when scheme != nullptr (the extraction prompt can render a
// definition); generation additionally requires scheme->has_cqs().
struct SchemeResolution {
  const SchemeTemplate* scheme = nullptr;
  ResolutionOrigin origin = ResolutionOrigin::unknown_name;

  bool templated() const { return scheme != nullptr; }
};

inline SchemeResolution resolve_scheme(std::string_view name,
                                       const Catalog& catalog, ErMode er_mode) {
  if (const SchemeTemplate* s = catalog.find(name))
    return {s, ResolutionOrigin::catalog};
  if (name.size() > 2 && name.substr(0, 2) == "ER") {
    if (er_mode == ErMode::omit) return {nullptr, ResolutionOrigin::er_omitted};
    if (const SchemeTemplate* base = catalog.find(name.substr(2)))
      return {base, ResolutionOrigin::er_mapped};
    return {nullptr, ResolutionOrigin::unknown_name};
  }
  return {nullptr, ResolutionOrigin::unknown_name};
}

}  // namespace cqgen
