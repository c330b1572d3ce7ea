#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace causalkit {

// Code-point index over a UTF-8 string. All annotation offsets are in Unicode
// code points, so slicing and length checks go through this map. Invalid bytes
// are treated as single-byte code points to keep offsets monotone.
struct Utf8Map {
  std::vector<uint32_t> cps;      // decoded code points
  std::vector<uint32_t> byte_of;  // size cps.size()+1, byte offset of each cp plus end

  size_t length() const { return cps.size(); }
};

Utf8Map utf8_index(std::string_view s);

// Substring for the code-point range [begin, end).
std::string utf8_slice(std::string_view s, const Utf8Map& m, size_t begin, size_t end);

size_t utf8_length(std::string_view s);

}  // namespace causalkit
