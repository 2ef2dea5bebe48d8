#include <gtest/gtest.h>

#include "ragebench/text.hpp"
#include "test_support.hpp"

using namespace ragebench;

TEST(Text, TokenizeLowercasesAlnumRuns) {
  EXPECT_EQ(tokenize("Hello, World! x86_64 42"),
            (std::vector<std::string>{"hello", "world", "x86", "64", "42"}));
  EXPECT_TRUE(tokenize("  ,;-- ").empty());
  // Non-ASCII bytes are boundaries.
  EXPECT_EQ(tokenize("caf\xC3\xA9 ok"), (std::vector<std::string>{"caf", "ok"}));
}

TEST(Text, Fnv1aMatchesIndependentOracle) {
  const auto golden = testkit::read_json(testkit::fixture("golden/reference_embed.json"));
  for (const auto& [text, hex] : golden.at("fnv1a64").items()) {
    EXPECT_EQ(hex64(fnv1a64(text)), hex.get<std::string>()) << text;
  }
  static_assert(fnv1a64("") == 0xcbf29ce484222325ULL);
}

TEST(Text, SplitMix64ReferenceSequence) {
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
}

TEST(Text, SplitMixBelowStaysInRange) {
  SplitMix64 rng(99);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.below(7), 7u);
}

TEST(Text, Utf8RoundTripIncludingInvalidBytes) {
  const std::string valid = "na\xC3\xAFve \xE2\x82\xAC \xF0\x9F\x98\x80";
  EXPECT_EQ(utf8_decode(valid).size(), 9u);
  EXPECT_EQ(utf8_encode(utf8_decode(valid)), valid);
  const std::string broken = "a\xFF" "b";
  EXPECT_EQ(utf8_decode(broken).size(), 3u);
}

TEST(Text, TrimAndBlank) {
  EXPECT_EQ(trim("  a b \n"), "a b");
  EXPECT_TRUE(is_blank(" \t\n"));
  EXPECT_FALSE(is_blank(" x "));
}
