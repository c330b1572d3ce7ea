#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "causalkit/io.hpp"
#include "causalkit/nn.hpp"
#include "causalkit/text.hpp"

namespace causalkit {

// Token vocabulary with fixed special entries.
struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kMask = 2;

  std::vector<std::string> tokens;  // id -> surface; first three are specials
  std::map<std::string, int> ids;   // surface -> id

  int size() const { return static_cast<int>(tokens.size()); }
  int id_of(const std::string& surface) const {
    const auto it = ids.find(surface);
    return it == ids.end() ? kUnk : it->second;
  }

  // Frequency-ranked vocabulary (ties broken by surface) over tokenized documents.
  static Vocab build(const std::vector<std::vector<std::string>>& docs, size_t max_size = 20000,
                     int min_count = 1);

  Json to_json() const;
  static Vocab from_json(const Json& j);

  bool operator==(const Vocab& o) const { return tokens == o.tokens; }
};

struct EncoderConfig {
  int dim = 32;
  int layers = 2;
  int ffn_dim = 64;
  int max_len = 256;
};

// Sequence encoder: token ids -> one d-dimensional contextual embedding per token.
class Encoder {
 public:
  virtual ~Encoder() = default;
  virtual int dim() const = 0;
  virtual int max_len() const = 0;
  virtual const Vocab& vocab() const = 0;
  virtual const std::string& tokenizer_id() const = 0;
  virtual bool frozen() const = 0;

  // n tokens in -> Var holding an n x dim matrix.
  virtual Var forward(Tape& tape, const std::vector<int>& ids) = 0;
  // Parameters updated during training; empty when the encoder is frozen.
  virtual std::vector<Parameter*> trainable_params() = 0;
  // Every parameter, in the canonical serialization order.
  virtual std::vector<Parameter*> all_params() = 0;
  virtual std::unique_ptr<Encoder> clone() const = 0;
  virtual void save(const std::filesystem::path& dir) const = 0;
};

// Pre-norm transformer with single-head attention and a tanh feed-forward block.
class TransformerEncoder final : public Encoder {
 public:
  TransformerEncoder(Vocab vocab, std::string tokenizer_id, const EncoderConfig& config,
                     uint64_t seed, bool frozen);

  int dim() const override { return config_.dim; }
  int max_len() const override { return config_.max_len; }
  const Vocab& vocab() const override { return vocab_; }
  const std::string& tokenizer_id() const override { return tokenizer_id_; }
  bool frozen() const override { return frozen_; }
  const EncoderConfig& config() const { return config_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  Var forward(Tape& tape, const std::vector<int>& ids) override;
  std::vector<Parameter*> trainable_params() override;
  std::vector<Parameter*> all_params() override;
  std::unique_ptr<Encoder> clone() const override;
  void save(const std::filesystem::path& dir) const override;

  Parameter& token_embedding() { return tok_emb_; }

  static std::unique_ptr<TransformerEncoder> load(const std::filesystem::path& dir, bool frozen);

 private:
  struct Layer {
    Parameter ln1_gain, ln1_bias;
    Parameter wq, wk, wv, wo;
    Parameter ln2_gain, ln2_bias;
    Parameter w1, b1, w2, b2;
  };

  Vocab vocab_;
  std::string tokenizer_id_;
  EncoderConfig config_;
  bool frozen_ = false;
  Parameter tok_emb_, pos_emb_;
  std::vector<Layer> layers_;
  Parameter lnf_gain_, lnf_bias_;
};

// Fresh randomly initialized trainable encoder over a corpus vocabulary.
std::unique_ptr<Encoder> make_tiny_encoder(const Vocab& vocab, const std::string& tokenizer_id,
                                           uint64_t seed, const EncoderConfig& config = {});

// Adapter for a saved checkpoint directory (config.json + weights.bin).
std::unique_ptr<Encoder> load_encoder(const std::filesystem::path& dir, bool frozen);

// "tiny" -> fresh encoder over `corpus_vocab`; anything else is a checkpoint directory.
std::unique_ptr<Encoder> make_encoder(const std::string& spec, const Vocab& corpus_vocab,
                                      const std::string& tokenizer_id, uint64_t seed, bool frozen,
                                      const EncoderConfig& config = {});

// Map token surfaces to vocabulary ids, truncating to max_len.
std::vector<int> encode_tokens(const Vocab& vocab, const std::vector<Token>& tokens, int max_len);

}  // namespace causalkit
