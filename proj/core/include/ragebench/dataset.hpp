#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ragebench/config.hpp"

namespace ragebench {

struct QARecord {
  std::string context;
  std::string question;
  std::string answer;
  std::string source_id;
  bool operator==(const QARecord&) const = default;
};

struct Corpus {
  std::string name;
  std::vector<QARecord> records;
};

struct DatasetRegistryEntry {
  std::string name;
  std::string source;
  std::string approx_size;
  std::int64_t train_size = 0;
  std::string question_type;
  std::string access_url;
};

/// Records are trimmed; source ids default to "<corpus>:<row>".
Corpus load_corpus(const std::filesystem::path& path, DatasetFormat format,
                   std::string name = {});
Corpus load_corpus(const std::filesystem::path& path, std::string_view format,
                   std::string name = {});

Corpus parse_json_corpus(std::string_view text, std::string name);
Corpus parse_csv_corpus(std::string_view text, std::string name);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, DatasetFormat format);
std::string corpus_to_csv(const Corpus& corpus);

/// RFC 4180 rows (quoted fields, doubled quotes, CRLF or LF line ends).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Partial Fisher-Yates over SplitMix64(seed); n >= |corpus| returns the input.
Corpus sample_corpus(const Corpus& corpus, std::size_t n, std::uint64_t seed);

/// A document that carries several question/answer pairs.
struct MultiQuestionDocument {
  std::string context;
  std::vector<std::pair<std::string, std::string>> qa_pairs;
  std::string source_id;
};

/// One record per question with the context copied into each. Source ids get
/// "#<question index>" appended so every record stays distinct.
Corpus expand_multi_question(const std::vector<MultiQuestionDocument>& documents,
                             std::string name);

const std::vector<DatasetRegistryEntry>& dataset_registry();
const DatasetRegistryEntry& registry_lookup(std::string_view name);

}  // namespace ragebench
