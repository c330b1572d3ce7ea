#include "causalkit/utf8.hpp"

#include "causalkit/errors.hpp"

namespace causalkit {

Utf8Map utf8_index(std::string_view s) {
  Utf8Map m;
  m.cps.reserve(s.size());
  m.byte_of.reserve(s.size() + 1);
  size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    uint32_t cp = b0;
    size_t len = 1;
    if (b0 >= 0xF0)
      len = 4;
    else if (b0 >= 0xE0)
      len = 3;
    else if (b0 >= 0xC0)
      len = 2;
    if (len > 1) {
      if (i + len > s.size()) {
        len = 1;  // truncated sequence: fall back to single byte
      } else {
        static const uint32_t kPrefixMask[5] = {0, 0x7F, 0x1F, 0x0F, 0x07};
        cp = b0 & kPrefixMask[len];
        bool ok = true;
        for (size_t k = 1; k < len; ++k) {
          const auto bk = static_cast<unsigned char>(s[i + k]);
          if ((bk & 0xC0) != 0x80) {
            ok = false;
            break;
          }
          cp = (cp << 6) | (bk & 0x3F);
        }
        if (!ok) {
          len = 1;
          cp = b0;
        }
      }
    }
    m.cps.push_back(cp);
    m.byte_of.push_back(static_cast<uint32_t>(i));
    i += len;
  }
  m.byte_of.push_back(static_cast<uint32_t>(s.size()));
  return m;
}

std::string utf8_slice(std::string_view s, const Utf8Map& m, size_t begin, size_t end) {
  require(begin <= end && end <= m.length(), ErrorKind::Range,
          "utf8_slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
              ") out of bounds for text of length " + std::to_string(m.length()));
  const size_t b0 = m.byte_of[begin];
  const size_t b1 = m.byte_of[end];
  return std::string(s.substr(b0, b1 - b0));
}

size_t utf8_length(std::string_view s) { return utf8_index(s).length(); }

}  // namespace causalkit
