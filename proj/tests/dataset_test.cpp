#include "cqgen/dataset.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "cqgen/errors.hpp"
#include "test_util.hpp"

namespace {

using cqgen::Intervention;
using cqgen::load_interventions;
using cqgen::parse_interventions;
using cqgen::read_submission;
using cqgen::render_submission;
using cqgen::SchemaError;
using cqgen::SubmissionEntry;
using cqgen::write_submission;

TEST(ParseInterventions, ReadsFixtureInDocumentOrder) {
  auto ivs = load_interventions(testutil::source_path("tests/fixtures/dataset5.json"));
  ASSERT_EQ(ivs.size(), 5u);
  EXPECT_EQ(ivs[0].id, "D1");
  EXPECT_EQ(ivs[1].id, "D2");
  EXPECT_EQ(ivs[2].id, "D3");
  EXPECT_EQ(ivs[3].id, "D4");
  EXPECT_EQ(ivs[4].id, "D5");
  EXPECT_EQ(ivs[0].scheme_names,
            (std::vector<std::string>{"ExpertOpinion", "CauseToEffect",
                                      "ExpertOpinion"}));
  EXPECT_TRUE(ivs[4].scheme_names.empty());
  EXPECT_EQ(ivs[1].text,
            "The streets are wet this morning, which shows it rained "
            "overnight.");
}

TEST(ParseInterventions, DuplicateTopLevelIdIsRejected) {
  const char* doc = R"({
    "X1": {"intervention": "a", "schemes": []},
    "X1": {"intervention": "b", "schemes": []}
  })";
  try {
    parse_interventions(doc);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate intervention id \"X1\""),
              std::string::npos);
  }
}

TEST(ParseInterventions, ErrorsNameTheOffendingId) {
  EXPECT_THROW(parse_interventions(R"({"B2": {"schemes": []}})"), SchemaError);
  try {
    parse_interventions(R"({"B2": {"schemes": []}})");
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("\"B2\""), std::string::npos);
  }
  EXPECT_THROW(
      parse_interventions(R"({"B3": {"intervention": 5, "schemes": []}})"),
      SchemaError);
  EXPECT_THROW(
      parse_interventions(R"({"B4": {"intervention": "", "schemes": []}})"),
      SchemaError);
  EXPECT_THROW(parse_interventions(R"({"B5": {"intervention": "t"}})"),
               SchemaError);
  EXPECT_THROW(
      parse_interventions(
          R"({"B6": {"intervention": "t", "schemes": "Sign"}})"),
      SchemaError);
  EXPECT_THROW(
      parse_interventions(R"({"B7": {"intervention": "t", "schemes": [1]}})"),
      SchemaError);
  EXPECT_THROW(parse_interventions(R"({"B8": "nope"})"), SchemaError);
}

TEST(ParseInterventions, UnknownExtraFieldsAreTolerated) {
  auto ivs = parse_interventions(
      R"({"E1": {"intervention": "t", "schemes": ["Sign"], "topic": "x"}})");
  ASSERT_EQ(ivs.size(), 1u);
  EXPECT_EQ(ivs[0].scheme_names, std::vector<std::string>{"Sign"});
}

TEST(ParseInterventions, RootMustBeAnObject) {
  EXPECT_THROW(parse_interventions("[1, 2]"), SchemaError);
  EXPECT_THROW(parse_interventions("not json"), SchemaError);
  try {
    parse_interventions("{\"A\": ");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("dataset parse error"),
              std::string::npos);
  }
}

TEST(RenderSubmission, SortsEntriesAndPinsExactBytes) {
  std::vector<SubmissionEntry> entries;
  entries.push_back({"B", {{0, "q-b"}}});
  entries.push_back({"A", {}});
  const std::string expected =
      "{\n"
      "  \"A\": {\n"
      "    \"cqs\": []\n"
      "  },\n"
      "  \"B\": {\n"
      "    \"cqs\": [\n"
      "      {\n"
      "        \"id\": 0,\n"
      "        \"cq\": \"q-b\"\n"
      "      }\n"
      "    ]\n"
      "  }\n"
      "}\n";
  EXPECT_EQ(render_submission(entries), expected);
  // Byte-stable across repeated calls.
  EXPECT_EQ(render_submission(entries), expected);
}

TEST(RenderSubmission, EmptyInputRendersEmptyObject) {
  EXPECT_EQ(render_submission({}), "{}\n");
}

TEST(RenderSubmission, DuplicateEntryIdIsRejected) {
  std::vector<SubmissionEntry> entries;
  entries.push_back({"A", {}});
  entries.push_back({"A", {}});
  EXPECT_THROW(render_submission(entries), SchemaError);
}

TEST(SubmissionIo, WriteThenReadRoundTrips) {
  testutil::TempDir tmp;
  const std::string path = tmp.path("submission.json");
  std::vector<SubmissionEntry> entries;
  entries.push_back({"D1", {{0, "first?"}, {1, "second?"}}});
  entries.push_back({"D2", {}});
  write_submission(entries, path);
  auto back = read_submission(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], entries[0]);
  EXPECT_EQ(back[1], entries[1]);
}

TEST(SubmissionIo, ReadRejectsMalformedShapes) {
  testutil::TempDir tmp;
  const std::string path = tmp.path("bad.json");
  testutil::write_file(path, "[]");
  EXPECT_THROW(read_submission(path), SchemaError);
  testutil::write_file(path, R"({"A": {"cqs": [{"id": "x", "cq": "y"}]}})");
  EXPECT_THROW(read_submission(path), SchemaError);
  testutil::write_file(path, R"({"A": {"cqs": [{"id": 0}]}})");
  EXPECT_THROW(read_submission(path), SchemaError);
  testutil::write_file(path, R"({"A": {}})");
  EXPECT_THROW(read_submission(path), SchemaError);
  testutil::write_file(path, "{broken");
  EXPECT_THROW(read_submission(path), SchemaError);
  EXPECT_THROW(read_submission(tmp.path("missing.json")), SchemaError);
}

}  // namespace
