#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "causalkit/annotation.hpp"
#include "causalkit/corpus.hpp"
#include "causalkit/io.hpp"
#include "causalkit/text.hpp"

namespace causalkit {

// Per-token binary indicators for each label, projected from one annotator's
// entities: a token carries a label iff any fragment of an entity with that
// label overlaps the token span by at least one character.
struct TokenLabelVector {
  std::string text_id;
  std::string tokenizer_id;
  std::array<std::vector<uint8_t>, kNumLabels> bits;  // indexed by Label

  size_t size() const { return bits[0].size(); }
};

struct ProjectStats {
  int uncovered_entities = 0;  // entities whose fragments overlap no token
};

TokenLabelVector project_to_tokens(const AnnotationSet& set, const std::vector<Token>& tokens,
                                   ProjectStats* stats = nullptr);

// Cohen's kappa over two equal-length binary vectors:
// (p_o - p_e) / (1 - p_e) with p_e from the marginals. Perfect observed
// agreement is defined as 1.0 even when chance agreement is 1.
double cohen_kappa(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);

// 2|a AND b| / (|a| + |b|); defined as 1.0 when both vectors are all-zero.
double pairwise_f1(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);

struct IaaCell {
  double kappa = 0.0;
  double f1 = 0.0;
  long n_tokens = 0;
};

// Agreement table: label rows (Trigger, Cause, Effect, Macro Avg) by source
// columns (FMEA, Slides, Micro Avg, Macro Avg). Micro pools token vectors
// across sources; macro averages the per-source values.
struct IaaReport {
  IaaCell cell[4][4];
  int skipped_texts = 0;  // texts lacking one of the two annotators
};

inline constexpr const char* kIaaRowNames[4] = {"Trigger", "Cause", "Effect", "Macro Avg"};
inline constexpr const char* kIaaColNames[4] = {"FMEA", "Slides", "Micro Avg", "Macro Avg"};

// A text unit with the standoff annotations available for it, keyed by
// annotator id.
struct AnnotatedText {
  TextUnit unit;
  std::map<std::string, AnnotationSet> by_annotator;
};

IaaReport iaa_report(const std::vector<AnnotatedText>& texts, const std::string& annotator_a,
                     const std::string& annotator_b, const std::string& tokenizer_id);

// Fixed-width text rendering with integer percentages.
std::string render_iaa(const IaaReport& report);

// Machine-readable records for every cell of the table.
Json iaa_records(const IaaReport& report);

// Read a corpus directory plus the standoff files of the named annotators.
// Missing annotation files simply leave that annotator absent for the text.
std::vector<AnnotatedText> load_annotated_corpus(const std::filesystem::path& dir,
                                                 const std::vector<std::string>& annotators);

}  // namespace causalkit
