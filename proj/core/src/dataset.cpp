#include "ragebench/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Shared by both formats: trims, rejects rows with an empty field.
Corpus finish(std::string name, std::vector<QARecord> rows, std::vector<std::size_t> bad_rows) {
  if (!bad_rows.empty()) {
    std::string list;
    for (std::size_t i = 0; i < bad_rows.size() && i < 20; ++i) {
      list += (i ? ", " : "") + std::to_string(bad_rows[i]);
    }
    if (bad_rows.size() > 20) list += ", ...";
    throw IngestionError("rows missing context, question or answer: " + list, std::move(bad_rows));
  }
  if (rows.empty()) throw IngestionError("dataset '" + name + "' has no valid rows", {});
  return Corpus{std::move(name), std::move(rows)};
}

bool fill(QARecord& r, std::string_view context, std::string_view question,
          std::string_view answer) {
  r.context = std::string(trim(context));
  r.question = std::string(trim(question));
  r.answer = std::string(trim(answer));
  return !r.context.empty() && !r.question.empty() && !r.answer.empty();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    rows.push_back(std::move(row));
    row.clear();
  };

  for (; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // CRLF handled on the '\n'
    } else if (c == '\n' || c == '\r') {
      end_row();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field in CSV", text.size());
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

Corpus parse_json_corpus(std::string_view text, std::string name) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed dataset: ") + e.what(), e.byte);
  }
  if (!doc.is_array()) throw IngestionError("dataset must be a top-level array of objects", {});
  std::vector<QARecord> rows;
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& obj = doc[i];
    auto field = [&](const char* key) -> std::string {
      if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_string()) return {};
      return obj.at(key).get<std::string>();
    };
    QARecord r;
    if (!fill(r, field("context"), field("question"), field("answer"))) {
      bad.push_back(i);
      continue;
    }
    std::string sid = field("source_id");
    r.source_id = sid.empty() ? name + ":" + std::to_string(i) : sid;
    rows.push_back(std::move(r));
  }
  return finish(std::move(name), std::move(rows), std::move(bad));
}

Corpus parse_csv_corpus(std::string_view text, std::string name) {
  auto table = parse_csv(text);
  if (table.empty()) throw IngestionError("CSV dataset has no header row", {});
  const auto& header = table.front();
  auto column = [&](std::string_view key) -> long {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (trim(header[c]) == key) return static_cast<long>(c);
    }
    return -1;
  };
  const long ctx = column("context"), q = column("question"), a = column("answer");
  const long sid = column("source_id");
  if (ctx < 0 || q < 0 || a < 0) {
    throw IngestionError("CSV header must name context, question and answer columns", {});
  }
  std::vector<QARecord> rows;
  std::vector<std::size_t> bad;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const auto& row = table[i];
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    auto cell = [&](long c) -> std::string_view {
      return c >= 0 && static_cast<std::size_t>(c) < row.size() ? std::string_view(row[c])
                                                                 : std::string_view{};
    };
    QARecord r;
    if (!fill(r, cell(ctx), cell(q), cell(a))) {
      bad.push_back(i - 1);
      continue;
    }
    std::string id(trim(cell(sid)));
    r.source_id = id.empty() ? name + ":" + std::to_string(i - 1) : id;
    rows.push_back(std::move(r));
  }
  return finish(std::move(name), std::move(rows), std::move(bad));
}

Corpus load_corpus(const std::filesystem::path& path, DatasetFormat format, std::string name) {
  if (name.empty()) name = path.stem().string();
  const std::string text = read_file(path);
  return format == DatasetFormat::json ? parse_json_corpus(text, std::move(name))
                                       : parse_csv_corpus(text, std::move(name));
}

Corpus load_corpus(const std::filesystem::path& path, std::string_view format, std::string name) {
  auto fmt = parse_dataset_format(format);
  if (!fmt) throw ArgumentError("unknown dataset format '" + std::string(format) + "'");
  return load_corpus(path, *fmt, std::move(name));
}

std::string corpus_to_csv(const Corpus& corpus) {
  std::string out = "context,question,answer,source_id\r\n";
  for (const auto& r : corpus.records) {
    out += csv_field(r.context) + "," + csv_field(r.question) + "," + csv_field(r.answer) + "," +
           csv_field(r.source_id) + "\r\n";
  }
  return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NotFoundError("cannot write dataset " + path.string());
  if (format == DatasetFormat::csv) {
    out << corpus_to_csv(corpus);
    return;
  }
  json arr = json::array();
  for (const auto& r : corpus.records) {
    arr.push_back({{"context", r.context},
                   {"question", r.question},
                   {"answer", r.answer},
                   {"source_id", r.source_id}});
  }
  out << arr.dump(2) << "\n";
}

Corpus sample_corpus(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("sample size must be at least 1");
  if (n >= corpus.records.size()) return corpus;
  std::vector<std::size_t> order(corpus.records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }
  Corpus out{corpus.name, {}};
  out.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.records.push_back(corpus.records[order[i]]);
  return out;
}

Corpus expand_multi_question(const std::vector<MultiQuestionDocument>& documents,
                             std::string name) {
  std::vector<QARecord> rows;
  std::vector<std::size_t> bad;
  std::size_t row = 0;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    const auto& doc = documents[d];
    for (std::size_t q = 0; q < doc.qa_pairs.size(); ++q, ++row) {
      QARecord r;
      if (!fill(r, doc.context, doc.qa_pairs[q].first, doc.qa_pairs[q].second)) {
        bad.push_back(row);
        continue;
      }
      const std::string base = doc.source_id.empty() ? name + ":" + std::to_string(d) : doc.source_id;
      r.source_id = base + "#" + std::to_string(q);
      rows.push_back(std::move(r));
    }
  }
  return finish(std::move(name), std::move(rows), std::move(bad));
}

const std::vector<DatasetRegistryEntry>& dataset_registry() {
  static const std::vector<DatasetRegistryEntry> entries{
      {"NaturalQuestions", "Wikipedia (Google Search)", "~328 MB", 307'373, "Real user queries",
       "https://ai.google.com/research/NaturalQuestions/dataset"},
      {"NewsQA", "CNN News Articles", "~358 MB", 380'000, "Human-written",
       "https://cs.nyu.edu/~kcho/DMQA/"},
      {"TriviaQA", "Trivia / Web / Wikipedia", "~604 MB", 650'000, "General knowledge",
       "https://nlp.cs.washington.edu/triviaqa/#data"},
  };
  return entries;
}

const DatasetRegistryEntry& registry_lookup(std::string_view name) {
  for (const auto& e : dataset_registry()) {
    if (e.name == name) return e;
  }
  throw NotFoundError("unknown dataset '" + std::string(name) + "'");
}

}  // namespace ragebench
