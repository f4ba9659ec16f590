#pragma once

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cqgen/errors.hpp"

namespace cqgen {

struct Intervention {
  std::string id;
  std::string text;
  std::vector<std::string> scheme_names;  // ordered, duplicates preserved
};

struct SubmissionCq {
  int id = 0;
  std::string cq;

  bool operator==(const SubmissionCq& other) const {
    return id == other.id && cq == other.cq;
  }
};

struct SubmissionEntry {
  std::string intervention_id;
  std::vector<SubmissionCq> cqs;

  bool operator==(const SubmissionEntry& other) const {
    return intervention_id == other.intervention_id && cqs == other.cqs;
  }
};

namespace detail {

// JSON objects silently merge duplicate keys on DOM parsing, so duplicate
// intervention ids are hunted with a SAX pass before the real parse.
class TopLevelKeyScan : public nlohmann::json::json_sax_t {
 public:
  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t) override { return true; }
  bool number_unsigned(number_unsigned_t) override { return true; }
  bool number_float(number_float_t, const string_t&) override { return true; }
  bool string(string_t&) override { return true; }
  bool binary(binary_t&) override { return true; }
  bool start_object(std::size_t) override {
    ++depth_;
    return true;
  }
  bool end_object() override {
    --depth_;
    return true;
  }
  bool start_array(std::size_t) override {
    ++depth_;
    return true;
  }
  bool end_array() override {
    --depth_;
    return true;
  }
  bool key(string_t& val) override {
    if (depth_ == 1 && !keys_.insert(val).second && duplicate_.empty())
      duplicate_ = val;
    return true;
  }
  bool parse_error(std::size_t /*position*/, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    error_ = ex.what();
    return false;
  }

  const std::string& duplicate() const { return duplicate_; }
  const std::string& error() const { return error_; }

 private:
  int depth_ = 0;
  std::set<std::string> keys_;
  std::string duplicate_;
  std::string error_;
};

inline std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(std::string("cannot open ") + what + ": " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace detail

// Parses {id -> {"intervention": text, "schemes": [names]}}, preserving
// document order. Unknown extra fields in records are tolerated; missing or
// mistyped required fields name the offending id.
inline std::vector<Intervention> parse_interventions(std::string_view text) {
  detail::TopLevelKeyScan scan;
  nlohmann::json::sax_parse(text, &scan);
  if (!scan.error().empty())
    throw SchemaError("dataset parse error: " + scan.error());
  if (!scan.duplicate().empty())
    throw SchemaError("duplicate intervention id \"" + scan.duplicate() +
                      "\"");

  nlohmann::ordered_json doc = nlohmann::ordered_json::parse(text);
  if (!doc.is_object())
    throw SchemaError("dataset must be a JSON object keyed by intervention id");

  std::vector<Intervention> out;
  for (const auto& [id, rec] : doc.items()) {
    if (!rec.is_object())
      throw SchemaError("intervention \"" + id + "\": record must be an object");
    if (!rec.contains("intervention") || !rec["intervention"].is_string())
      throw SchemaError("intervention \"" + id +
                        "\": missing or non-string \"intervention\"");
    Intervention iv;
    iv.id = id;
    iv.text = rec["intervention"].get<std::string>();
    if (iv.text.empty())
      throw SchemaError("intervention \"" + id + "\": text must be non-empty");
    if (!rec.contains("schemes") || !rec["schemes"].is_array())
      throw SchemaError("intervention \"" + id +
                        "\": missing or non-array \"schemes\"");
    for (const auto& s : rec["schemes"]) {
      if (!s.is_string())
        throw SchemaError("intervention \"" + id +
                          "\": \"schemes\" must contain only strings");
      iv.scheme_names.push_back(s.get<std::string>());
    }
    out.push_back(std::move(iv));
  }
  return out;
}

inline std::vector<Intervention> load_interventions(const std::string& path) {
  return parse_interventions(detail::read_file(path, "dataset"));
}

// Deterministic submission bytes: entries keyed by intervention id in
// ascending byte order, fields in fixed order, two-space indent, trailing
// newline. Two calls with equal input are byte-identical.
inline std::string render_submission(
    const std::vector<SubmissionEntry>& entries) {
  std::vector<const SubmissionEntry*> sorted;
  sorted.reserve(entries.size());
  for (const SubmissionEntry& e : entries) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const SubmissionEntry* a, const SubmissionEntry* b) {
              return a->intervention_id < b->intervention_id;
            });
  std::set<std::string> seen;
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (const SubmissionEntry* e : sorted) {
    if (!seen.insert(e->intervention_id).second)
      throw SchemaError("duplicate submission entry for \"" +
                        e->intervention_id + "\"");
    nlohmann::ordered_json cqs = nlohmann::ordered_json::array();
    for (const SubmissionCq& q : e->cqs) {
      nlohmann::ordered_json rec;
      rec["id"] = q.id;
      rec["cq"] = q.cq;
      cqs.push_back(std::move(rec));
    }
    nlohmann::ordered_json body;
    body["cqs"] = std::move(cqs);
    root[e->intervention_id] = std::move(body);
  }
  return root.dump(2) + "\n";
}

inline void write_submission(const std::vector<SubmissionEntry>& entries,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open submission for write: " + path);
  out << render_submission(entries);
  if (!out) throw SchemaError("failed writing submission: " + path);
}

inline std::vector<SubmissionEntry> read_submission(const std::string& path) {
  std::string text = detail::read_file(path, "submission");
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("submission parse error: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw SchemaError("submission must be a JSON object");
  std::vector<SubmissionEntry> out;
  for (const auto& [id, rec] : doc.items()) {
    if (!rec.is_object() || !rec.contains("cqs") || !rec["cqs"].is_array())
      throw SchemaError("submission entry \"" + id +
                        "\": missing or non-array \"cqs\"");
    SubmissionEntry entry;
    entry.intervention_id = id;
    for (const auto& q : rec["cqs"]) {
      if (!q.is_object() || !q.contains("id") ||
          !q["id"].is_number_integer() || !q.contains("cq") ||
          !q["cq"].is_string())
        throw SchemaError("submission entry \"" + id +
                          "\": cqs must be {id, cq} records");
      entry.cqs.push_back({q["id"].get<int>(), q["cq"].get<std::string>()});
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace cqgen
