#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "causalkit/encoder.hpp"
#include "causalkit/rng.hpp"
#include "causalkit/text.hpp"

namespace causalkit {

struct PmiConfig {
  int min_n = 2;
  int max_n = 5;
  int min_count = 10;
  int top_k = 800;
};

struct PmiEntry {
  std::vector<std::string> tokens;
  long count = 0;
  double score = 0.0;  // minimum over proper binary segmentations of log p(joint)/(p(left) p(right))
  bool operator==(const PmiEntry& o) const {
    return tokens == o.tokens && count == o.count && score == o.score;
  }
};

// Ranked collocation list used to pick multi-token mask spans.
class PmiVocabulary {
 public:
  PmiVocabulary() = default;
  PmiVocabulary(PmiConfig config, std::vector<PmiEntry> entries);

  const PmiConfig& config() const { return config_; }
  const std::vector<PmiEntry>& entries() const { return entries_; }
  bool contains(const std::vector<std::string>& gram) const { return grams_.count(gram) > 0; }
  // Length of the longest vocabulary n-gram starting at `begin`, or 0 if none matches.
  int longest_match(const std::vector<std::string>& surfaces, size_t begin) const;

  void save(const std::filesystem::path& file) const;
  static PmiVocabulary load(const std::filesystem::path& file);

 private:
  PmiConfig config_;
  std::vector<PmiEntry> entries_;
  std::set<std::vector<std::string>> grams_;
  int max_gram_len_ = 0;
};

// Score every n-gram (min_n..max_n, count >= min_count) and keep the top_k by score.
PmiVocabulary build_pmi_vocab(const std::vector<std::vector<std::string>>& docs,
                              const PmiConfig& config = {});

enum class MaskingStrategy { Uniform, Pmi };
const char* masking_strategy_name(MaskingStrategy s);
MaskingStrategy masking_strategy_from(const std::string& name);

enum class MaskAction : uint8_t { Mask, Random, Keep };

struct MaskSpan {
  int begin = 0, end = 0;  // token index range [begin, end)
  bool operator==(const MaskSpan& o) const { return begin == o.begin && end == o.end; }
};

struct MaskedToken {
  int index = 0;
  MaskAction action = MaskAction::Mask;
  int random_id = -1;  // replacement vocabulary id when action == Random
  bool operator==(const MaskedToken& o) const {
    return index == o.index && action == o.action && random_id == o.random_id;
  }
};

struct MaskPlan {
  std::vector<MaskSpan> spans;      // disjoint, sorted by begin
  std::vector<MaskedToken> tokens;  // sorted by index; one entry per masked token
  bool operator==(const MaskPlan& o) const { return spans == o.spans && tokens == o.tokens; }
};

// Choose llround(rate * n) tokens to mask. Uniform picks independent positions; Pmi
// first claims greedy longest-match collocation spans, then fills up with single tokens.
MaskPlan plan_masks(const std::vector<std::string>& surfaces, double rate, MaskingStrategy strategy,
                    const PmiVocabulary* pmi, int vocab_size, Rng& rng);

struct MlmConfig {
  MaskingStrategy strategy = MaskingStrategy::Uniform;
  double mask_rate = 0.15;
  int epochs = 10;
  int batch_size = 16;
  double lr = 5e-3;
  uint64_t seed = 42;
};

struct MlmEpochLog {
  int epoch = 0;
  double loss = 0.0;  // mean cross-entropy per masked token
  long masked_tokens = 0;
};

struct MlmResult {
  std::vector<MlmEpochLog> epochs;
  long total_tokens = 0;
  long masked_tokens = 0;
  double realized_mask_fraction = 0.0;
};

// Masked-token prediction with the 80/10/10 replacement scheme and tied output embeddings.
MlmResult pretrain_mlm(Encoder& encoder, const std::vector<std::vector<Token>>& docs,
                       const MlmConfig& config, const PmiVocabulary* pmi);

}  // namespace causalkit
