#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <vector>

#include "causalkit/annotation.hpp"
#include "causalkit/dataset.hpp"
#include "causalkit/encoder.hpp"
#include "causalkit/metrics.hpp"

namespace causalkit {

struct SstTrainConfig {
  double lr = 5e-3;
  int batch_size = 16;
  int max_epochs = 50;
  int patience = 5;
  double threshold = 0.5;
  uint64_t seed = 42;
};

// Single-stage tagger: one independent sigmoid head per label over the shared encoding.
class SstTagger {
 public:
  SstTagger(std::unique_ptr<Encoder> encoder, uint64_t seed);

  Encoder& encoder() { return *encoder_; }
  const Encoder& encoder() const { return *encoder_; }

  TrainLog train(const std::vector<SstInstance>& train_set, const std::vector<SstInstance>& dev_set,
                 const SstTrainConfig& config);

  // Mean loss over the batch, exactly as one training step computes it; when
  // accumulate_grads is set, gradients are added into the parameter .grad
  // buffers (callers zero them first).
  double batch_loss(const std::vector<SstInstance>& batch, bool accumulate_grads = false);

  // Per-label token probabilities; tokens beyond the encoder window score 0.
  std::array<std::vector<double>, kNumLabels> predict_probs(const std::vector<Token>& tokens);
  std::array<std::vector<uint8_t>, kNumLabels> predict(const std::vector<Token>& tokens,
                                                       double threshold = 0.5);

  std::vector<Parameter*> trainable_params();
  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<SstTagger> load(const std::filesystem::path& dir);

 private:
  SstTagger() = default;

  std::unique_ptr<Encoder> encoder_;
  std::array<Parameter, kNumLabels> head_w_;  // d x 1 each
  std::array<Parameter, kNumLabels> head_b_;  // 1 x 1 each

  std::vector<Parameter*> head_params();
  Var instance_loss(Tape& tape, const SstInstance& inst);
  double dev_macro_f1(const std::vector<SstInstance>& dev_set, double threshold);
};

}  // namespace causalkit
