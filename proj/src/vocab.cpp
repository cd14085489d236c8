#include "oodgen/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

namespace oodgen {

namespace {
const char* kSpecialNames[kNumSpecialTokens] = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocabulary::Vocabulary() {
  for (const char* name : kSpecialNames) add(name);
}

void Vocabulary::add(const std::string& token) {
  if (token_to_id_.count(token)) throw std::runtime_error("vocabulary: duplicate token " + token);
  token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
  id_to_token_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus, int min_count) {
  if (corpus.empty()) throw std::invalid_argument("build_vocabulary: corpus is empty");
  if (min_count < 1) throw std::invalid_argument("build_vocabulary: min_count must be >= 1");

  // std::map keeps the keys sorted, which fixes the lexicographic tie order.
  std::map<std::string, std::int64_t> counts;
  for (const auto& tokens : corpus)
    for (const auto& t : tokens) ++counts[t];

  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [tok, n] : counts) {
    if (n >= min_count) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  for (const auto& [tok, n] : kept) v.add(tok);
  return v;
}

TokenId Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return token_to_id_.count(token) > 0; }

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocabulary: token id out of range");
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& tok : id_to_token_) {
    for (unsigned char c : tok) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    h ^= '\n';
    h *= 0x100000001B3ULL;
  }
  return h;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("vocabulary: cannot write " + path);
  for (const auto& tok : id_to_token_) out << tok << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("vocabulary: cannot read " + path);
  Vocabulary v;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    if (line_no < kNumSpecialTokens) {
      if (line != kSpecialNames[line_no])
        throw std::runtime_error("vocabulary: line " + std::to_string(line_no + 1) +
                                 " is not the expected special token");
    } else {
      v.add(line);
    }
    ++line_no;
  }
  if (line_no < kNumSpecialTokens) throw std::runtime_error("vocabulary: file too short " + path);
  return v;
}

TokenSequence Vocabulary::encode(const std::vector<std::string>& tokens, int max_len) const {
  if (max_len < 2) throw std::invalid_argument("encode: max_len must be >= 2");
  const int budget = max_len - 2;  // room for BOS and EOS
  TokenSequence seq;
  seq.ids.reserve(static_cast<std::size_t>(max_len));
  seq.ids.push_back(kBosId);
  for (const auto& tok : tokens) {
    if (static_cast<int>(seq.ids.size()) - 1 >= budget) break;
    seq.ids.push_back(id(tok));
  }
  seq.ids.push_back(kEosId);
  seq.length = static_cast<int>(seq.ids.size());
  seq.ids.resize(static_cast<std::size_t>(max_len), kPadId);
  return seq;
}

std::string Vocabulary::decode(const TokenSequence& seq) const {
  std::string out;
  for (TokenId id : seq.content()) {
    if (!out.empty()) out.push_back(' ');
    out += token(id);
  }
  return out;
}

}  // namespace oodgen
