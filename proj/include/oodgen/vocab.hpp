#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "oodgen/types.hpp"

namespace oodgen {

// Token <-> id mapping with the four reserved specials at the front.
// Construction is deterministic: tokens are ordered by descending frequency
// with lexicographic tie-breaking, so vocabularies built from the same corpus
// are identical regardless of map iteration order.
class Vocabulary {
 public:
  Vocabulary();

  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus, int min_count);

  TokenId id(const std::string& token) const;  // kUnkId when unknown
  bool contains(const std::string& token) const;
  const std::string& token(TokenId id) const;
  int size() const { return static_cast<int>(id_to_token_.size()); }

  // FNV-1a over the ordered token list; stored in checkpoints so a model is
  // never resumed against a different vocabulary.
  std::uint64_t hash() const;

  void save(const std::string& path) const;  // one token per line, line = id
  static Vocabulary load(const std::string& path);

  TokenSequence encode(const std::vector<std::string>& tokens, int max_len) const;
  std::string decode(const TokenSequence& seq) const;

 private:
  void add(const std::string& token);

  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

}  // namespace oodgen
