#include <doctest.h>

#include <stdexcept>

#include "oodgen/text.hpp"

using namespace oodgen;

TEST_CASE("tokenize lowercases and splits on whitespace") {
  CHECK(tokenize("Show my reminders") == std::vector<std::string>{"show", "my", "reminders"});
  CHECK(tokenize("a") == std::vector<std::string>{"a"});
  CHECK(tokenize("  padded   out  ") == std::vector<std::string>{"padded", "out"});
}

TEST_CASE("tokenize separates punctuation into standalone tokens") {
  // golden output of the punctuation rule
  CHECK(tokenize("what's 8:30?") ==
        std::vector<std::string>{"what", "'", "s", "8", ":", "30", "?"});
  CHECK(tokenize("hello, world!") == std::vector<std::string>{"hello", ",", "world", "!"});
  CHECK(tokenize("a.b") == std::vector<std::string>{"a", ".", "b"});
}

TEST_CASE("tokenize rejects empty input") {
  CHECK_THROWS_AS(tokenize(""), std::invalid_argument);
  CHECK_THROWS_AS(tokenize("   \t  "), std::invalid_argument);
}

TEST_CASE("tokenize is deterministic") {
  const std::string text = "Set An Alarm For 8:30, please!";
  CHECK(tokenize(text) == tokenize(text));
}

TEST_CASE("join_tokens joins with single spaces") {
  CHECK(join_tokens({"a", "b", "c"}) == "a b c");
  CHECK(join_tokens({}) == "");
}
