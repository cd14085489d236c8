#include <doctest.h>

#include <filesystem>

#include "oodgen/rng.hpp"
#include "oodgen/text.hpp"
#include "oodgen/vocab.hpp"
#include "testutil.hpp"

using namespace oodgen;

TEST_CASE("build keeps tokens at or above min_count") {
  const Vocabulary v = Vocabulary::build({{"a", "b"}, {"a"}}, 2);
  CHECK(v.contains("a"));
  CHECK(!v.contains("b"));
  CHECK(v.id("b") == kUnkId);
}

TEST_CASE("singleton corpus gives specials plus one token") {
  const Vocabulary v = Vocabulary::build({{"a"}}, 1);
  CHECK(v.size() == 5);
  CHECK(v.id("a") == 4);
}

TEST_CASE("specials are distinct and fixed") {
  const Vocabulary v = Vocabulary::build({{"x"}}, 1);
  CHECK(kPadId == 0);
  CHECK(v.token(kPadId) == "<pad>");
  CHECK(v.token(kBosId) == "<bos>");
  CHECK(v.token(kEosId) == "<eos>");
  CHECK(v.token(kUnkId) == "<unk>");
}

TEST_CASE("token ids and tokens are exact inverses") {
  const Vocabulary v = Vocabulary::build({{"red", "green", "blue", "red"}}, 1);
  for (TokenId id = 0; id < v.size(); ++id) CHECK(v.id(v.token(id)) == id);
}

TEST_CASE("construction is deterministic with lexicographic tie-breaking") {
  // b and c tie at count 2; a dominates with 3
  const Vocabulary v1 = Vocabulary::build({{"c", "b", "a"}, {"b", "c", "a"}, {"a"}}, 1);
  const Vocabulary v2 = Vocabulary::build({{"a", "a", "a"}, {"c", "c"}, {"b", "b"}}, 1);
  CHECK(v1.id("a") == 4);
  CHECK(v1.id("b") == 5);
  CHECK(v1.id("c") == 6);
  CHECK(v1.hash() == v2.hash());
}

TEST_CASE("encode frames with BOS/EOS and pads to max_len") {
  const Vocabulary v = Vocabulary::build({{"a", "b", "c"}}, 1);
  const TokenSequence s = v.encode({"a", "b"}, 6);
  CHECK(s.ids.size() == 6);
  CHECK(s.length == 4);
  CHECK(s.ids[0] == kBosId);
  CHECK(s.ids[3] == kEosId);
  CHECK(s.ids[4] == kPadId);
  CHECK(s.valid());
}

TEST_CASE("encode truncates content to keep EOS inside max_len") {
  const Vocabulary v = Vocabulary::build({{"a", "b", "c"}}, 1);
  const TokenSequence s = v.encode({"a", "b", "c"}, 4);
  // golden truncation: BOS a b EOS
  CHECK(s.length == 4);
  CHECK(s.ids == std::vector<TokenId>{kBosId, v.id("a"), v.id("b"), kEosId});
}

TEST_CASE("unknown tokens encode to UNK") {
  const Vocabulary v = Vocabulary::build({{"a"}}, 1);
  const TokenSequence s = v.encode({"zzz"}, 5);
  CHECK(s.ids[1] == kUnkId);
}

TEST_CASE("decode(encode(x)) round-trips normalized in-vocab text") {
  const auto sentences = testutil::toy_grammar_sentences();
  auto corpus = testutil::encode_corpus(sentences, 12);
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& text = sentences[rng.uniform_int(sentences.size())];
    const auto tokens = tokenize(text);
    CHECK(corpus.vocab.decode(corpus.vocab.encode(tokens, 12)) == join_tokens(tokens));
  }
}

TEST_CASE("vocabulary save/load preserves ids and hash") {
  const auto dir = testutil::fresh_dir("vocab_io");
  const Vocabulary v = Vocabulary::build({{"alpha", "beta", "beta"}}, 1);
  const auto path = (dir / "vocab.txt").string();
  v.save(path);
  const Vocabulary loaded = Vocabulary::load(path);
  CHECK(loaded.size() == v.size());
  CHECK(loaded.hash() == v.hash());
  CHECK(loaded.id("beta") == v.id("beta"));
}
