#pragma once

#include <cstdint>
#include <vector>

#include "causalkit/iaa.hpp"

namespace causalkit {

struct SynthConfig {
  int count = 700;
  uint64_t seed = 42;
};

// Deterministic synthetic corpus of short failure-analysis style sentences.
// Cause/effect phrases are drawn from one shared pool, so role identity comes
// from sentence structure rather than phrase memorization. Roughly a quarter of
// the texts carry no causal annotation (neutral or merely associative wording).
// Units alternate between table-style and slide-style sources; annotations are
// attached under annotator id "gold".
std::vector<AnnotatedText> generate_synthetic(const SynthConfig& config);

}  // namespace causalkit
