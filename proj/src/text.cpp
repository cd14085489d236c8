#include "oodgen/text.hpp"

#include <cctype>
#include <stdexcept>

namespace oodgen {

std::vector<std::string> tokenize(const std::string& text) {
  std::string prepared;
  prepared.reserve(text.size() * 2);
  for (unsigned char c : text) {
    if (std::isupper(c)) {
      prepared.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::ispunct(c)) {
      prepared.push_back(' ');
      prepared.push_back(static_cast<char>(c));
      prepared.push_back(' ');
    } else {
      prepared.push_back(static_cast<char>(c));
    }
  }

  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : prepared) {
    if (std::isspace(c)) {
      if (!current.empty()) {
        tokens.push_back(current);
        current.clear();
      }
    } else {
      current.push_back(static_cast<char>(c));
    }
  }
  if (!current.empty()) tokens.push_back(current);

  if (tokens.empty()) throw std::invalid_argument("tokenize: input is empty after trimming");
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace oodgen
