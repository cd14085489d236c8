#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oodgen {

using TokenId = std::int32_t;

// Reserved vocabulary slots. PAD must be 0 so zero-filled buffers are valid padding.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kBosId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr int kNumSpecialTokens = 4;

inline bool is_special_token(TokenId id) {
  return id == kPadId || id == kBosId || id == kEosId || id == kUnkId;
}

// Integer-encoded utterance. `ids` may carry trailing PAD entries; `length`
// counts the non-PAD prefix. Encoded dataset examples are stored as
// BOS, tokens..., EOS, PAD...; sequences coming out of the generator are
// stored as the emitted tokens only (the implicit BOS start state is not a
// generator action and carries no log-probability).
struct TokenSequence {
  std::vector<TokenId> ids;
  int length = 0;

  static TokenSequence of(std::vector<TokenId> tokens) {
    TokenSequence s;
    s.length = static_cast<int>(tokens.size());
    s.ids = std::move(tokens);
    return s;
  }

  // Non-special tokens, i.e. the utterance itself. UNK counts as content.
  std::vector<TokenId> content() const {
    std::vector<TokenId> out;
    out.reserve(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
      if (!is_special_token(ids[i]) || ids[i] == kUnkId) out.push_back(ids[i]);
    }
    return out;
  }

  bool valid() const {
    if (length < 0 || static_cast<std::size_t>(length) > ids.size()) return false;
    for (int i = 0; i < length; ++i)
      if (ids[i] == kPadId) return false;
    for (std::size_t i = static_cast<std::size_t>(length); i < ids.size(); ++i)
      if (ids[i] != kPadId) return false;
    return true;
  }

  bool operator==(const TokenSequence& other) const {
    if (length != other.length) return false;
    for (int i = 0; i < length; ++i)
      if (ids[i] != other.ids[i]) return false;
    return true;
  }
};

struct LabeledExample {
  TokenSequence sequence;
  int label = 0;
};

// IND splits plus the unlabeled OOD portion of the test set.
struct DatasetSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> valid;
  std::vector<LabeledExample> test;
  std::vector<TokenSequence> test_ood;
  std::vector<std::string> label_names;  // index = label id

  int num_classes() const { return static_cast<int>(label_names.size()); }
};

}  // namespace oodgen
