#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "causalkit/annotation.hpp"
#include "causalkit/dataset.hpp"
#include "causalkit/encoder.hpp"
#include "causalkit/metrics.hpp"

namespace causalkit {

struct MstTrainConfig {
  double lr = 5e-3;
  int batch_size = 16;
  int max_epochs = 50;
  int patience = 5;
  uint64_t seed = 42;
  double theta_t = 0.5;   // trigger decision threshold
  double theta_g = 0.5;   // grouping decision threshold
  double lambda1 = 1.0;   // trigger loss weight
  double lambda2 = 1.0;   // grouping loss weight
  double lambda3 = 1.0;   // argument loss weight
};

// One predicted trigger group with its argument tokens and stage confidences.
struct MstRelation {
  std::vector<int> trigger_tokens;
  std::vector<int> cause_tokens;
  std::vector<int> effect_tokens;
  double trigger_score = 0.0;   // mean member trigger probability
  double group_score = 0.0;     // min intra-group pair probability (1.0 for singletons)
  double argument_score = 0.0;  // mean winning-class probability over argument tokens
};

struct MstPrediction {
  std::vector<double> trigger_probs;      // per token
  std::vector<uint8_t> trigger_bits;      // raw trigger head decisions at theta_t
  std::vector<std::vector<int>> groups;   // decoded trigger groups, ordered by first token
  std::vector<MstRelation> relations;     // groups that yielded both cause and effect tokens
};

// Multi-stage tagger: trigger detection, trigger grouping, attention-pooled group
// embedding, and per-group argument classification.
class MstTagger {
 public:
  MstTagger(std::unique_ptr<Encoder> encoder, uint64_t seed);

  Encoder& encoder() { return *encoder_; }
  const Encoder& encoder() const { return *encoder_; }

  TrainLog train(const std::vector<MstInstance>& train_set, const std::vector<MstInstance>& dev_set,
                 const MstTrainConfig& config);

  // Mean combined loss over the batch, exactly as one training step computes
  // it; when accumulate_grads is set, gradients are added into the parameter
  // .grad buffers (callers zero them first).
  double batch_loss(const std::vector<MstInstance>& batch, const MstTrainConfig& config,
                    bool accumulate_grads = false);

  MstPrediction predict(const std::vector<Token>& tokens, double theta_t = 0.5,
                        double theta_g = 0.5);

  // Raw pairwise same-group probabilities for the given trigger tokens, one per
  // canonical pair (i<j) in lexicographic order.
  std::vector<double> grouping_probs(const std::vector<Token>& tokens,
                                     const std::vector<int>& trigger_tokens);

  std::vector<Parameter*> trainable_params();
  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<MstTagger> load(const std::filesystem::path& dir);

 private:
  std::unique_ptr<Encoder> encoder_;
  Parameter trig_w_, trig_b_;  // d x 1, 1 x 1
  Parameter grp_w_, grp_b_;    // 2d x 1, 1 x 1
  Parameter attn_w_, attn_v_;  // d x d, d x 1
  // Two-layer argument scorer. A single linear layer over the concatenation
  // cannot express token-group interactions: the group embedding would add the
  // same per-class offset to every token, which makes enchained sentences
  // (where the shared clause must flip from Effect to Cause between groups)
  // unrepresentable. The tanh hidden layer provides the interaction.
  Parameter arg_w1_, arg_b1_;  // 2d x d, 1 x d
  Parameter arg_w2_, arg_b2_;  // d x 3, 1 x 3

  std::vector<Parameter*> head_params();
  Var instance_loss(Tape& tape, const MstInstance& inst, const MstTrainConfig& config);
  Var group_embedding(Tape& tape, Var hidden, const std::vector<int>& members);  // 1 x d
  Var argument_logits(Tape& tape, Var hidden, Var combined, int n);              // n x 3
  double dev_macro_f1(const std::vector<MstInstance>& dev_set, const MstTrainConfig& config);
};

}  // namespace causalkit
