#include "causalkit/text.hpp"

#include "causalkit/errors.hpp"
#include "causalkit/utf8.hpp"

namespace causalkit {

std::string normalize_whitespace(std::string_view raw) {
  // Split on '\n' (treating '\r' as plain space-class whitespace), collapse
  // and trim each line, then re-join and strip outer blank lines.
  std::vector<std::string> lines;
  std::string cur;
  auto flush = [&]() {
    while (!cur.empty() && cur.back() == ' ') cur.pop_back();
    lines.push_back(cur);
    cur.clear();
  };
  bool pending_space = false;
  for (const char ch : raw) {
    if (ch == '\n') {
      flush();
      pending_space = false;
    } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\f' || ch == '\v') {
      if (!cur.empty()) pending_space = true;
    } else {
      if (pending_space) {
        cur.push_back(' ');
        pending_space = false;
      }
      cur.push_back(ch);
    }
  }
  flush();
  size_t first = 0, last = lines.size();
  while (first < last && lines[first].empty()) ++first;
  while (last > first && lines[last - 1].empty()) --last;
  std::string out;
  for (size_t i = first; i < last; ++i) {
    if (i > first) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

namespace {

bool is_word_cp(uint32_t cp) {
  if (cp >= 128) return true;  // treat non-ASCII as word characters
  return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
}

bool is_space_cp(uint32_t cp) { return cp == ' ' || cp == '\n' || cp == '\t' || cp == '\r'; }

class WsTokenizer final : public Tokenizer {
 public:
  const std::string& id() const override {
    static const std::string kId = "ws";
    return kId;
  }

  std::vector<Token> tokenize(const std::string& text) const override {
    const Utf8Map map = utf8_index(text);
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = map.length();
    while (i < n) {
      const uint32_t cp = map.cps[i];
      if (is_space_cp(cp)) {
        ++i;
        continue;
      }
      size_t j = i + 1;
      if (is_word_cp(cp)) {
        while (j < n && is_word_cp(map.cps[j])) ++j;
      }
      // punctuation falls through as a single-cp token
      out.push_back(Token{static_cast<uint32_t>(i), static_cast<uint32_t>(j),
                          utf8_slice(text, map, i, j)});
      i = j;
    }
    return out;
  }
};

}  // namespace

const Tokenizer& tokenizer_by_id(const std::string& id) {
  static const WsTokenizer ws;
  if (id == "ws") return ws;
  fail(ErrorKind::Config, "unknown tokenizer id: '" + id + "' (available: ws)");
}

std::vector<std::string> token_surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.surface);
  return out;
}

}  // namespace causalkit
