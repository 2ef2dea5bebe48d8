#include "ragebench/chunker.hpp"

#include <deque>
#include <span>

#include "ragebench/errors.hpp"
#include "ragebench/text.hpp"

namespace ragebench {

namespace {

struct Piece {
  std::size_t begin;
  std::size_t end;
};

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

class Splitter {
 public:
  Splitter(const std::u32string& text, std::size_t size) : text_(text), size_(size) {}

  void descend(Piece piece, std::span<const std::u32string> separators, std::vector<Piece>& out) const {
    const std::u32string_view view(text_.data() + piece.begin, piece.end - piece.begin);
    std::size_t chosen = separators.size() - 1;
    for (std::size_t i = 0; i < separators.size(); ++i) {
      if (separators[i].empty() || view.find(separators[i]) != std::u32string_view::npos) {
        chosen = i;
        break;
      }
    }
    const std::u32string& sep = separators[chosen];
    const auto rest = separators.subspan(chosen + 1);

    auto emit = [&](std::size_t b, std::size_t e) {
      if (e <= b) return;
      if (e - b <= size_ || rest.empty()) {
        out.push_back({piece.begin + b, piece.begin + e});
      } else {
        descend({piece.begin + b, piece.begin + e}, rest, out);
      }
    };

    if (sep.empty()) {
      for (std::size_t i = 0; i < view.size(); ++i) out.push_back({piece.begin + i, piece.begin + i + 1});
      return;
    }
    std::size_t start = 0;
    for (std::size_t pos = view.find(sep); pos != std::u32string_view::npos;
         pos = view.find(sep, start)) {
      emit(start, pos + sep.size());
      start = pos + sep.size();
    }
    emit(start, view.size());
  }

  // Span of [b, e) without surrounding whitespace.
  Piece trimmed(std::size_t b, std::size_t e) const {
    while (b < e && is_space(text_[b])) ++b;
    while (e > b && is_space(text_[e - 1])) --e;
    return {b, e};
  }

  std::size_t trimmed_length(std::size_t b, std::size_t e) const {
    Piece t = trimmed(b, e);
    return t.end - t.begin;
  }

 private:
  const std::u32string& text_;
  std::size_t size_;
};

}  // namespace

void check_params(const ChunkingParams& params) {
  if (params.chunk_size < 1) throw ArgumentError("chunk_size must be positive");
  if (params.chunk_overlap < 0) throw ArgumentError("chunk_overlap must be non-negative");
  if (params.chunk_overlap >= params.chunk_size) {
    throw ArgumentError("overlap must be < chunk size");
  }
  if (params.separators.empty() || !params.separators.back().empty()) {
    throw ArgumentError("the last separator must be the empty string");
  }
}

std::vector<Chunk> split_document(std::string_view text, const ChunkingParams& params,
                                  std::string_view source_id) {
  check_params(params);
  if (text.empty()) throw ArgumentError("cannot split an empty document");

  const std::u32string chars = utf8_decode(text);
  const auto size = static_cast<std::size_t>(params.chunk_size);
  const auto overlap = static_cast<std::size_t>(params.chunk_overlap);
  std::vector<std::u32string> separators;
  separators.reserve(params.separators.size());
  for (const auto& s : params.separators) separators.push_back(utf8_decode(s));

  Splitter splitter(chars, size);
  std::vector<Piece> pieces;
  splitter.descend({0, chars.size()}, separators, pieces);

  std::vector<Chunk> chunks;
  Piece last_emitted{0, 0};
  auto emit = [&](std::size_t b, std::size_t e) {
    Piece t = splitter.trimmed(b, e);
    if (t.end == t.begin) return;
    if (!chunks.empty() && t.begin >= last_emitted.begin && t.end <= last_emitted.end) return;
    Chunk c;
    c.text = utf8_encode(std::u32string_view(chars).substr(t.begin, t.end - t.begin));
    c.source_id = std::string(source_id);
    c.ordinal = static_cast<int>(chunks.size());
    c.char_start = t.begin;
    c.char_end = t.end;
    chunks.push_back(std::move(c));
    last_emitted = t;
  };

  std::deque<Piece> window;
  auto raw_length = [&] { return window.empty() ? 0 : window.back().end - window.front().begin; };
  for (const Piece& p : pieces) {
    if (!window.empty() && splitter.trimmed_length(window.front().begin, p.end) > size) {
      emit(window.front().begin, window.back().end);
      while (!window.empty() &&
             (raw_length() > overlap || splitter.trimmed_length(window.front().begin, p.end) > size)) {
        window.pop_front();
      }
    }
    window.push_back(p);
  }
  if (!window.empty()) emit(window.front().begin, window.back().end);
  return chunks;
}

}  // namespace ragebench
