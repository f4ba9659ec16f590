#include "cqgen/prompts.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "cqgen/errors.hpp"
#include "cqgen/generation.hpp"
#include "cqgen/ranking.hpp"
#include "cqgen/schemes.hpp"
#include "test_util.hpp"

namespace {

using cqgen::build_cq_prompt;
using cqgen::build_extraction_prompt;
using cqgen::build_ranking_prompt;
using cqgen::build_topup_prompt;
using cqgen::Catalog;
using cqgen::CriticalQuestion;
using cqgen::load_catalog_file;
using cqgen::ResolutionOrigin;
using cqgen::SchemeGroup;
using cqgen::SchemeResolution;
using cqgen::UsageError;
using cqgen::render_prompt;

const char* kIntervention =
    "Dr Smith, a leading climatologist, says global temperatures will rise "
    "by two degrees; therefore we must act now.";

Catalog& shipped_catalog() {
  static Catalog c =
      load_catalog_file(testutil::source_path("data/walton_schemes.json"));
  return c;
}

std::vector<CriticalQuestion> ranking_candidates() {
  return {
      {0, "Is Dr Smith a credible expert in climatology?", "ExpertOpinion", 0},
      {1, "Is the predicted rise consistent with what other experts assert?",
       "ExpertOpinion", 0},
      {2, "Does acting now actually prevent the predicted rise?",
       "CauseToEffect", 1},
  };
}

TEST(RenderPrompt, SubstitutesOnlyMappedKeys) {
  EXPECT_EQ(render_prompt("a {x} b {y} c", {{"x", "1"}}), "a 1 b {y} c");
}

TEST(RenderPrompt, NoRecursiveExpansion) {
  EXPECT_EQ(render_prompt("X {a} Y", {{"a", "{b}"}, {"b", "no"}}), "X {b} Y");
}

TEST(RenderPrompt, LiteralBracesSurvive) {
  EXPECT_EQ(render_prompt("{} {unclosed", {{"unclosed", "nope"}}),
            "{} {unclosed");
}

TEST(SystemPrompt, PinnedText) {
  EXPECT_EQ(cqgen::prompts::kDefaultSystemPrompt,
            std::string("You are a helpful assistant specialized in argument "
                        "analysis."));
}

TEST(ExtractionPrompt, PairOfSingleSchemes) {
  const Catalog& c = shipped_catalog();
  std::vector<SchemeGroup> groups = {{"CauseToEffect", 1}, {"Sign", 1}};
  std::vector<SchemeResolution> res = {
      {c.find("CauseToEffect"), ResolutionOrigin::catalog},
      {c.find("Sign"), ResolutionOrigin::catalog}};
  EXPECT_EQ(build_extraction_prompt(groups, res),
            testutil::read_golden("extraction_pair.txt"));
}

TEST(ExtractionPrompt, RepeatAnnotationAndInterventionPrefix) {
  const Catalog& c = shipped_catalog();
  std::vector<SchemeGroup> groups = {{"ExpertOpinion", 2}};
  std::vector<SchemeResolution> res = {
      {c.find("ExpertOpinion"), ResolutionOrigin::catalog}};
  std::string first_turn = std::string(kIntervention) + "\n\n" +
                           build_extraction_prompt(groups, res);
  EXPECT_EQ(first_turn, testutil::read_golden("extraction_first_turn.txt"));
}

TEST(ExtractionPrompt, TemplateFreeGroupRendersNoDefinition) {
  std::vector<SchemeGroup> groups = {{"ERWeirdScheme", 1}};
  std::vector<SchemeResolution> res = {
      {nullptr, ResolutionOrigin::er_omitted}};
  EXPECT_EQ(build_extraction_prompt(groups, res),
            testutil::read_golden("extraction_template_free.txt"));
}

TEST(ExtractionPrompt, SharedDefinitionRenderedOnce) {
  const Catalog& c = shipped_catalog();
  // Two groups resolving to the same underlying scheme (ER-mapped).
  std::vector<SchemeGroup> groups = {{"ERSign", 1}, {"Sign", 1}};
  std::vector<SchemeResolution> res = {
      {c.find("Sign"), ResolutionOrigin::er_mapped},
      {c.find("Sign"), ResolutionOrigin::catalog}};
  std::string prompt = build_extraction_prompt(groups, res);
  std::size_t first = prompt.find("Scheme Sign:");
  ASSERT_NE(first, std::string::npos);
  EXPECT_EQ(prompt.find("Scheme Sign:", first + 1), std::string::npos);
  EXPECT_NE(prompt.find("ERSign, Sign"), std::string::npos);
}

TEST(ExtractionPrompt, InputValidation) {
  EXPECT_THROW(build_extraction_prompt({}, {}), UsageError);
  EXPECT_THROW(build_extraction_prompt({{"A", 1}}, {}), UsageError);
}

TEST(GenerationPrompt, NumberedTemplatesForExpertOpinion) {
  const Catalog& c = shipped_catalog();
  SchemeResolution r{c.find("ExpertOpinion"), ResolutionOrigin::catalog};
  EXPECT_EQ(build_cq_prompt(r),
            testutil::read_golden("generation_expert_opinion.txt"));
}

TEST(GenerationPrompt, TemplateFreeSentence) {
  SchemeResolution r{nullptr, ResolutionOrigin::er_omitted};
  EXPECT_EQ(build_cq_prompt(r),
            testutil::read_golden("generation_template_free.txt"));
}

TEST(RankingPrompt, TunedGolden) {
  EXPECT_EQ(build_ranking_prompt(kIntervention, ranking_candidates(), true),
            testutil::read_golden("ranking_tuned.txt"));
}

TEST(RankingPrompt, PlainGolden) {
  EXPECT_EQ(build_ranking_prompt(kIntervention, ranking_candidates(), false),
            testutil::read_golden("ranking_plain.txt"));
}

TEST(RankingPrompt, EmptyInputsRejected) {
  EXPECT_THROW(build_ranking_prompt("", ranking_candidates(), true),
               UsageError);
  EXPECT_THROW(build_ranking_prompt(kIntervention, {}, true), UsageError);
}

TEST(TopUpPrompt, Golden) {
  EXPECT_EQ(build_topup_prompt(kIntervention),
            testutil::read_golden("topup.txt"));
}

}  // namespace
