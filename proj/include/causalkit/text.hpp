#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace causalkit {

// Token over normalized text; begin/end are Unicode code-point offsets,
// end exclusive.
struct Token {
  uint32_t begin = 0;
  uint32_t end = 0;
  std::string surface;

  bool operator==(const Token&) const = default;
};

// Whitespace normalization applied to every ingested text: runs of spaces and
// tabs collapse to a single space, spaces adjacent to newlines are dropped,
// newlines are kept, and leading/trailing whitespace is stripped.
std::string normalize_whitespace(std::string_view raw);

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual const std::string& id() const = 0;
  virtual std::vector<Token> tokenize(const std::string& text) const = 0;
};

// Registry lookup; "ws" (whitespace splitting with ASCII punctuation as
// single-character tokens) is the default. Unknown ids raise a config error.
const Tokenizer& tokenizer_by_id(const std::string& id);

std::vector<std::string> token_surfaces(const std::vector<Token>& tokens);

}  // namespace causalkit
