#include "cqgen/generation.hpp"

#include <gtest/gtest.h>

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqgen/chat.hpp"
#include "cqgen/errors.hpp"
#include "cqgen/ranking.hpp"
#include "cqgen/runlog.hpp"
#include "cqgen/schemes.hpp"
#include "cqgen/scripted_backend.hpp"
#include "test_util.hpp"

namespace {

using cqgen::append_questions;
using cqgen::Catalog;
using cqgen::ChatSession;
using cqgen::CriticalQuestion;
using cqgen::ensure_minimum;
using cqgen::GenerationPlan;
using cqgen::kTemplateFreeSource;
using cqgen::load_catalog_file;
using cqgen::normalize_question;
using cqgen::parse_cq_list;
using cqgen::parse_ranking;
using cqgen::plan_generation;
using cqgen::render_cq_list;
using cqgen::ResolutionOrigin;
using cqgen::run_generation;
using cqgen::RunLog;
using cqgen::SchemeResolution;
using cqgen::ScriptedBackend;
using cqgen::UsageError;

Catalog& shipped_catalog() {
  static Catalog c =
      load_catalog_file(testutil::source_path("data/walton_schemes.json"));
  return c;
}

// The corpus pins parser behavior over fenced, prose-wrapped, and broken
// model replies for both list shapes (question objects and id lists).
TEST(ParserCorpus, AllRecordsBehaveAsPinned) {
  nlohmann::json corpus = nlohmann::json::parse(
      testutil::read_file(
          testutil::source_path("tests/fixtures/parser_corpus.json")));
  ASSERT_TRUE(corpus.is_array());
  ASSERT_GE(corpus.size(), 20u);
  int checked = 0;
  for (const auto& rec : corpus) {
    const std::string name = rec["name"].get<std::string>();
    const std::string kind = rec["kind"].get<std::string>();
    const std::string reply = rec["reply"].get<std::string>();
    if (kind == "cq") {
      std::optional<std::vector<std::string>> got = parse_cq_list(reply);
      if (rec["expect"].is_null()) {
        EXPECT_FALSE(got.has_value()) << name;
      } else {
        ASSERT_TRUE(got.has_value()) << name;
        EXPECT_EQ(*got, rec["expect"].get<std::vector<std::string>>()) << name;
      }
    } else {
      ASSERT_EQ(kind, "rank") << name;
      std::optional<std::vector<int>> got = parse_ranking(reply);
      if (rec["expect"].is_null()) {
        EXPECT_FALSE(got.has_value()) << name;
      } else {
        ASSERT_TRUE(got.has_value()) << name;
        EXPECT_EQ(*got, rec["expect"].get<std::vector<int>>()) << name;
      }
    }
    ++checked;
  }
  EXPECT_EQ(checked, static_cast<int>(corpus.size()));
}

TEST(RenderCqList, RoundTripsThroughTheParser) {
  std::vector<std::string> questions = {"First?", "Second, with comma?",
                                        "Third \"quoted\"?"};
  std::string rendered = render_cq_list(questions);
  auto parsed = parse_cq_list(rendered);
  ASSERT_TRUE(parsed.has_value());
  EXPECT_EQ(*parsed, questions);
  EXPECT_EQ(rendered.rfind("[{\"CQ1\":", 0), 0u);
}

TEST(NormalizeQuestion, CaseAndWhitespaceInsensitive) {
  EXPECT_EQ(normalize_question("  Hello   WORLD? "),
            normalize_question("hello world?"));
  EXPECT_NE(normalize_question("hello world?"),
            normalize_question("hello there?"));
}

TEST(AppendQuestions, DropsDuplicatesAndKeepsIdsContiguous) {
  std::vector<CriticalQuestion> qs;
  EXPECT_EQ(append_questions(qs, {"One?", "Two?"}, "Sign", 0), 2);
  EXPECT_EQ(append_questions(qs, {"one?", "Three?", "Three?"}, "Bias", 1), 1);
  ASSERT_EQ(qs.size(), 3u);
  EXPECT_EQ(qs[0].id, 0);
  EXPECT_EQ(qs[1].id, 1);
  EXPECT_EQ(qs[2].id, 2);
  EXPECT_EQ(qs[2].text, "Three?");
  EXPECT_EQ(qs[2].source_scheme, "Bias");
  EXPECT_EQ(qs[2].origin_turn, 1);
}

TEST(PlanGeneration, EmptyResolutionsMeansTemplateFreeOnly) {
  GenerationPlan plan = plan_generation({});
  EXPECT_TRUE(plan.templated.empty());
  EXPECT_TRUE(plan.template_free);
  EXPECT_EQ(plan.turn_count(), 1);
}

TEST(PlanGeneration, DedupsTemplatedAndCollapsesTemplateFree) {
  const Catalog& c = shipped_catalog();
  SchemeResolution sign{c.find("Sign"), ResolutionOrigin::catalog};
  SchemeResolution bias{c.find("Bias"), ResolutionOrigin::catalog};
  SchemeResolution omitted{nullptr, ResolutionOrigin::er_omitted};
  SchemeResolution unknown{nullptr, ResolutionOrigin::unknown_name};
  GenerationPlan plan = plan_generation({sign, omitted, bias, sign, unknown});
  ASSERT_EQ(plan.templated.size(), 2u);
  EXPECT_EQ(plan.templated[0]->name, "Sign");
  EXPECT_EQ(plan.templated[1]->name, "Bias");
  EXPECT_TRUE(plan.template_free);
  EXPECT_EQ(plan.turn_count(), 3);
}

TEST(PlanGeneration, NoCqsSchemeFallsBackToTemplateFree) {
  Catalog c = load_catalog_file(
      testutil::source_path("tests/fixtures/catalog_with_no_cqs.json"));
  SchemeResolution bare{c.find("BareAssertion"), ResolutionOrigin::catalog};
  GenerationPlan plan = plan_generation({bare});
  EXPECT_TRUE(plan.templated.empty());
  EXPECT_TRUE(plan.template_free);
}

TEST(RunGeneration, ParsesQuestionsPerTurn) {
  const Catalog& c = shipped_catalog();
  GenerationPlan plan;
  plan.templated = {c.find("Sign")};
  ScriptedBackend backend = ScriptedBackend::from_ordered(
      {{"pipeline", "[{\"CQ1\": \"Q one?\"}, {\"CQ2\": \"Q two?\"}]"}});
  ChatSession session("pipeline", "sys");
  session.append_user("extraction request");
  session.append_assistant("extraction reply");
  RunLog log;
  int warnings = 0;
  auto qs = run_generation(session, "text", plan, backend, log, "X", warnings);
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_EQ(qs[0].text, "Q one?");
  EXPECT_EQ(qs[0].source_scheme, "Sign");
  EXPECT_EQ(warnings, 0);
  // Generation after extraction never re-sends the intervention text.
  EXPECT_EQ(session.messages()[3].content.rfind("1. ", 0), 0u);
}

TEST(RunGeneration, FirstTurnWithoutExtractionPrefixesIntervention) {
  GenerationPlan plan = plan_generation({});
  ScriptedBackend backend = ScriptedBackend::from_ordered(
      {{"pipeline", "[{\"CQ1\": \"Only question?\"}]"}});
  ChatSession session("pipeline", "sys");
  RunLog log;
  int warnings = 0;
  auto qs =
      run_generation(session, "The text.", plan, backend, log, "X", warnings);
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].source_scheme, kTemplateFreeSource);
  EXPECT_EQ(session.messages()[1].content.rfind("The text.\n\n", 0), 0u);
}

TEST(RunGeneration, ParseRetryResendsSameTextOnSameSession) {
  const Catalog& c = shipped_catalog();
  GenerationPlan plan;
  plan.templated = {c.find("Sign")};
  ScriptedBackend backend = ScriptedBackend::from_ordered(
      {{"pipeline", "no list here"},
       {"pipeline", "[{\"CQ1\": \"Recovered?\"}]"}});
  ChatSession session("pipeline", "sys");
  std::ostringstream sink;
  RunLog log(&sink);
  int warnings = 0;
  auto qs = run_generation(session, "text", plan, backend, log, "X", warnings);
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].text, "Recovered?");
  EXPECT_EQ(warnings, 1);
  ASSERT_EQ(session.size(), 5u);  // sys + two user/assistant exchanges
  EXPECT_EQ(session.messages()[1].content, session.messages()[3].content);
  EXPECT_NE(sink.str().find("parse_warning"), std::string::npos);
}

TEST(RunGeneration, SecondParseFailureYieldsNoQuestions) {
  const Catalog& c = shipped_catalog();
  GenerationPlan plan;
  plan.templated = {c.find("Sign")};
  ScriptedBackend backend = ScriptedBackend::from_ordered(
      {{"pipeline", "garbage"}, {"pipeline", "still garbage"}});
  ChatSession session("pipeline", "sys");
  RunLog log;
  int warnings = 0;
  auto qs = run_generation(session, "text", plan, backend, log, "X", warnings);
  EXPECT_TRUE(qs.empty());
  EXPECT_EQ(warnings, 2);
}

TEST(EnsureMinimum, NoOpWhenAlreadyEnough) {
  std::vector<CriticalQuestion> qs;
  append_questions(qs, {"a?", "b?", "c?"}, "Sign", 0);
  ScriptedBackend backend = ScriptedBackend::from_ordered({});
  ChatSession session("pipeline");
  RunLog log;
  int warnings = 0;
  auto out = ensure_minimum(session, qs, "text", 3, 1, backend, log, "X",
                            warnings);
  EXPECT_EQ(out.size(), 3u);
  EXPECT_EQ(session.size(), 0u);  // no turn was issued
  EXPECT_EQ(warnings, 0);
}

TEST(EnsureMinimum, TopUpAppendsAtGivenTurn) {
  std::vector<CriticalQuestion> qs;
  append_questions(qs, {"a?"}, "Sign", 0);
  ScriptedBackend backend = ScriptedBackend::from_ordered(
      {{"pipeline", "[{\"CQ1\": \"b?\"}, {\"CQ2\": \"c?\"}]"}});
  ChatSession session("pipeline", "sys");
  session.append_user("gen");
  session.append_assistant("done");
  std::ostringstream sink;
  RunLog log(&sink);
  int warnings = 0;
  auto out = ensure_minimum(session, qs, "The text.", 3, 1, backend, log, "X",
                            warnings);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[1].text, "b?");
  EXPECT_EQ(out[1].source_scheme, kTemplateFreeSource);
  EXPECT_EQ(out[1].origin_turn, 1);
  EXPECT_EQ(warnings, 0);
  // The top-up template itself opens with the intervention text.
  EXPECT_EQ(session.messages()[3].content.rfind("The text.\n\n", 0), 0u);
  EXPECT_NE(sink.str().find("\"stage\":\"topup\""), std::string::npos);
}

TEST(EnsureMinimum, ShortfallLoggedWhenStillUnderK) {
  std::vector<CriticalQuestion> qs;
  ScriptedBackend backend =
      ScriptedBackend::from_ordered({{"pipeline", "[]"}});
  ChatSession session("pipeline");
  std::ostringstream sink;
  RunLog log(&sink);
  int warnings = 0;
  auto out =
      ensure_minimum(session, qs, "text", 3, 0, backend, log, "X", warnings);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(warnings, 1);
  EXPECT_NE(sink.str().find("entry_shortfall"), std::string::npos);
}

TEST(EnsureMinimum, BadKRejected) {
  std::vector<CriticalQuestion> qs;
  ScriptedBackend backend = ScriptedBackend::from_ordered({});
  ChatSession session("pipeline");
  RunLog log;
  int warnings = 0;
  EXPECT_THROW(
      ensure_minimum(session, qs, "text", 0, 0, backend, log, "X", warnings),
      UsageError);
}

}  // namespace
