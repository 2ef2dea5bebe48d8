#include <gtest/gtest.h>

#include <set>

#include "ragebench/dataset.hpp"
#include "ragebench/errors.hpp"
#include "test_support.hpp"

using namespace ragebench;
using nlohmann::json;

namespace {

Corpus numbered(std::size_t n) {
  Corpus c{"numbered", {}};
  for (std::size_t i = 0; i < n; ++i) {
    c.records.push_back({"context " + std::to_string(i), "question " + std::to_string(i),
                         "answer " + std::to_string(i), "numbered:" + std::to_string(i)});
  }
  return c;
}

std::set<std::string> ids(const Corpus& c) {
  std::set<std::string> out;
  for (const auto& r : c.records) out.insert(r.source_id);
  return out;
}

}  // namespace

TEST(Dataset, ThreeRowsLoadInFileOrder) {
  testkit::TempDir dir;
  testkit::write_text(dir / "three.json", R"([
    {"context": "c0", "question": "q0", "answer": "a0"},
    {"context": "c1", "question": "q1", "answer": "a1", "source_id": "doc-7"},
    {"context": " c2 ", "question": "q2", "answer": "a2"}])");
  const auto c = load_corpus(dir / "three.json", DatasetFormat::json, "three");
  ASSERT_EQ(c.records.size(), 3u);
  EXPECT_EQ(c.records[0].source_id, "three:0");
  EXPECT_EQ(c.records[1].source_id, "doc-7");
  EXPECT_EQ(c.records[2].context, "c2");
  EXPECT_EQ(c.records[2].question, "q2");
}

TEST(Dataset, EmptyAnswerNamesTheRow) {
  const std::string text = R"([
    {"context": "c0", "question": "q0", "answer": "a0"},
    {"context": "c1", "question": "q1", "answer": "   "},
    {"context": "c2", "question": "q2"}])";
  try {
    parse_json_corpus(text, "broken");
    FAIL() << "expected an ingestion error";
  } catch (const IngestionError& e) {
    EXPECT_EQ(e.rows(), (std::vector<std::size_t>{1, 2}));
  }
}

TEST(Dataset, ZeroValidRowsIsAnError) {
  EXPECT_THROW(parse_json_corpus("[]", "empty"), IngestionError);
  EXPECT_THROW(parse_csv_corpus("context,question,answer\n", "empty"), IngestionError);
}

TEST(Dataset, UnknownFormatIsRejected) {
  EXPECT_THROW(load_corpus(testkit::fixture("desk_qa.json"), std::string_view("parquet")), ArgumentError);
}

TEST(Dataset, CsvMatchesIndependentParser) {
  const auto golden = testkit::read_json(testkit::fixture("golden/commas_rows.json")).at("rows");
  const auto rows = parse_csv(testkit::read_text(testkit::fixture("commas.csv")));
  ASSERT_EQ(rows.size(), golden.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i], golden[i].get<std::vector<std::string>>()) << "row " << i;
  }
  const auto corpus = load_corpus(testkit::fixture("commas.csv"), DatasetFormat::csv, "commas");
  ASSERT_EQ(corpus.records.size(), golden.size() - 1);
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    EXPECT_EQ(corpus.records[i].context, golden[i + 1][0].get<std::string>());
    EXPECT_EQ(corpus.records[i].answer, golden[i + 1][2].get<std::string>());
  }
}

TEST(Dataset, CsvWriterRoundTrips) {
  const auto corpus = load_corpus(testkit::fixture("commas.csv"), DatasetFormat::csv, "commas");
  const auto back = parse_csv_corpus(corpus_to_csv(corpus), "commas");
  ASSERT_EQ(back.records.size(), corpus.records.size());
  for (std::size_t i = 0; i < corpus.records.size(); ++i) EXPECT_EQ(back.records[i], corpus.records[i]);

  testkit::TempDir dir;
  write_corpus(corpus, dir / "c.json", DatasetFormat::json);
  const auto json_back = load_corpus(dir / "c.json", DatasetFormat::json, "commas");
  for (std::size_t i = 0; i < corpus.records.size(); ++i) EXPECT_EQ(json_back.records[i], corpus.records[i]);
}

TEST(Dataset, SamplingIsSeededAndWithoutReplacement) {
  const auto corpus = numbered(100);
  EXPECT_EQ(sample_corpus(corpus, 100, 3).records, corpus.records);
  EXPECT_EQ(sample_corpus(corpus, 500, 3).records, corpus.records);
  const auto a = sample_corpus(corpus, 10, 7);
  const auto b = sample_corpus(corpus, 10, 7);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(ids(a).size(), 10u);
  EXPECT_NE(ids(a), ids(sample_corpus(corpus, 10, 8)));
  EXPECT_THROW(sample_corpus(corpus, 0, 7), ArgumentError);
}

TEST(Dataset, MultiQuestionDocumentsExpandPerQuestion) {
  const auto doc = testkit::read_json(testkit::fixture("multi_question.json"));
  std::vector<MultiQuestionDocument> docs;
  std::size_t questions = 0;
  for (const auto& d : doc) {
    MultiQuestionDocument m{d.at("context"), {}, d.at("source_id")};
    for (const auto& q : d.at("questions")) m.qa_pairs.emplace_back(q.at("question"), q.at("answer"));
    questions += m.qa_pairs.size();
    docs.push_back(std::move(m));
  }
  const auto corpus = expand_multi_question(docs, "stories");
  ASSERT_EQ(corpus.records.size(), questions);
  EXPECT_EQ(corpus.records[0].context, corpus.records[2].context);
  EXPECT_EQ(corpus.records[0].source_id, "story-1#0");
  EXPECT_EQ(corpus.records[1].source_id, "story-1#1");
  EXPECT_EQ(corpus.records[3].source_id, "story-2#0");
  EXPECT_EQ(corpus.records[4].answer, "The owner's grandmother.");
}

TEST(Dataset, RegistryCarriesTableSizes) {
  ASSERT_EQ(dataset_registry().size(), 3u);
  EXPECT_EQ(registry_lookup("NaturalQuestions").train_size, 307373);
  EXPECT_EQ(registry_lookup("NewsQA").train_size, 380000);
  EXPECT_EQ(registry_lookup("TriviaQA").train_size, 650000);
  EXPECT_THROW(registry_lookup("SQuAD"), NotFoundError);
}

TEST(Dataset, DeskFixtureHasFiftyRows) {
  EXPECT_EQ(load_corpus(testkit::fixture("desk_qa.json"), DatasetFormat::json, "desk").records.size(), 50u);
}
