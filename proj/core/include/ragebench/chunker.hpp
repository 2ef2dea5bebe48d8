#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ragebench {

struct ChunkingParams {
  int chunk_size = 512;
  int chunk_overlap = 64;
  std::vector<std::string> separators{"\n\n", "\n", " ", ""};
};

/// Offsets count Unicode code points, not bytes.
struct Chunk {
  std::string text;
  std::string source_id;
  int ordinal = 0;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  bool operator==(const Chunk&) const = default;
};

/// Throws ArgumentError unless 0 <= overlap < size and the last separator is "".
void check_params(const ChunkingParams& params);

/// Recursive separator descent:
///  1. pick the first separator that occurs in the text;
///  2. split on it, the separator staying with the piece before it;
///  3. pieces longer than chunk_size are split again with the remaining separators;
///  4. consecutive pieces are merged while the whitespace-trimmed span fits chunk_size;
///  5. each following chunk starts with the trailing whole pieces of its
///     predecessor whose combined length is at most chunk_overlap.
/// Emitted chunks are trimmed; whitespace-only chunks are dropped.
std::vector<Chunk> split_document(std::string_view text, const ChunkingParams& params,
                                  std::string_view source_id = {});

}  // namespace ragebench
