#pragma once

#include <string>
#include <vector>

namespace oodgen {

// Lowercases ASCII letters, splits punctuation characters into standalone
// tokens, then splits on whitespace. Throws std::invalid_argument when the
// input is empty after trimming.
std::vector<std::string> tokenize(const std::string& text);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace oodgen
