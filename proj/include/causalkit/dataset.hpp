#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "causalkit/annotation.hpp"
#include "causalkit/iaa.hpp"

namespace causalkit {

// Token-level instance for the single-stage tagger: three independent binary
// labels per token. Unannotated texts become all-zero (negative) instances.
struct SstInstance {
  std::string text_id;
  SourceKind source = SourceKind::Fmea;
  std::string text;
  std::vector<Token> tokens;
  std::vector<std::array<uint8_t, kNumLabels>> labels;  // per token, indexed by Label
};

// One trigger entity projected to tokens, with per-token argument roles
// (Cause/Effect) for exactly the tokens of entities linked to this trigger.
struct MstGroup {
  std::vector<int> trigger_tokens;  // sorted, unique
  std::map<int, Label> args;        // token -> Cause or Effect
};

struct MstInstance {
  std::string text_id;
  SourceKind source = SourceKind::Fmea;
  std::string text;
  std::vector<Token> tokens;
  std::vector<uint8_t> trigger_bits;  // union over groups
  std::vector<MstGroup> groups;
};

// Deterministic cross-validation plan: a held-out test partition (stratified
// by source kind) plus K equal folds (sizes differ by at most one) over the
// remaining ids.
struct FoldPlan {
  uint64_t seed = 0;
  double test_fraction = 0.2;
  std::vector<std::string> test_ids;
  std::vector<std::vector<std::string>> folds;
};

inline constexpr int kNumFolds = 5;

// Union of two annotators' sets over the same text: entities deduplicated by
// (label, fragments), relations by (type, resolved argument fragments), ids
// renumbered by (first fragment start, label). Symmetric and idempotent.
AnnotationSet aggregate_annotators(const AnnotationSet& a, const AnnotationSet& b);

// Canonical renumbering used by aggregation: entities sorted by (first
// fragment start, label, fragments) and renamed T1..Tn, relations sorted and
// renamed R1..Rm.
AnnotationSet renumber(const AnnotationSet& set);

struct Dataset {
  std::string tokenizer_id;
  std::vector<SstInstance> sst;
  std::vector<MstInstance> mst;  // parallel to sst, same text order
};

// Aggregates the listed annotators per text (texts carrying only one of them
// pass through unchanged; texts with none become negative instances) and
// projects to token-level instances.
Dataset build_dataset(const std::vector<AnnotatedText>& texts, const std::string& tokenizer_id,
                      const std::vector<std::string>& annotators);

std::vector<SstInstance> build_sst_instances(const std::vector<AnnotatedText>& texts,
                                             const std::string& tokenizer_id,
                                             const std::vector<std::string>& annotators);
std::vector<MstInstance> build_mst_instances(const std::vector<AnnotatedText>& texts,
                                             const std::string& tokenizer_id,
                                             const std::vector<std::string>& annotators);

FoldPlan make_folds(const std::vector<std::pair<std::string, SourceKind>>& ids, uint64_t seed,
                    double test_fraction = 0.2, int k = kNumFolds);

void save_dataset(const std::filesystem::path& file, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& file);
void save_fold_plan(const std::filesystem::path& file, const FoldPlan& plan);
FoldPlan load_fold_plan(const std::filesystem::path& file);

}  // namespace causalkit
