#include "causalkit/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "causalkit/errors.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

Vocab Vocab::build(const std::vector<std::vector<std::string>>& docs, size_t max_size, int min_count) {
  check_contract(max_size > 3, "vocab: max_size must exceed the special-token count");
  std::map<std::string, int> counts;
  for (const auto& doc : docs)
    for (const std::string& tok : doc) ++counts[tok];

  std::vector<std::pair<std::string, int>> ranked;
  for (const auto& [tok, n] : counts)
    if (n >= min_count) ranked.emplace_back(tok, n);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return std::pair(-a.second, a.first) < std::pair(-b.second, b.first);
  });

  Vocab v;
  v.tokens = {"[PAD]", "[UNK]", "[MASK]"};
  for (const auto& [tok, n] : ranked) {
    if (v.tokens.size() >= max_size) break;
    v.tokens.push_back(tok);
  }
  for (size_t i = 0; i < v.tokens.size(); ++i) v.ids[v.tokens[i]] = static_cast<int>(i);
  return v;
}

Json Vocab::to_json() const { return Json(tokens); }

Vocab Vocab::from_json(const Json& j) {
  Vocab v;
  v.tokens = j.get<std::vector<std::string>>();
  require(v.tokens.size() >= 3 && v.tokens[0] == "[PAD]" && v.tokens[1] == "[UNK]" &&
              v.tokens[2] == "[MASK]",
          ErrorKind::Parse, "vocab: missing special tokens");
  for (size_t i = 0; i < v.tokens.size(); ++i) {
    require(v.ids.emplace(v.tokens[i], static_cast<int>(i)).second, ErrorKind::Parse,
            "vocab: duplicate token '" + v.tokens[i] + "'");
  }
  return v;
}

std::vector<int> encode_tokens(const Vocab& vocab, const std::vector<Token>& tokens, int max_len) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const Token& t : tokens) {
    if (static_cast<int>(ids.size()) >= max_len) break;
    ids.push_back(vocab.id_of(t.surface));
  }
  return ids;
}

namespace {

Parameter make_param(const std::string& name, int rows, int cols, Rng& rng, double stddev) {
  Parameter p;
  p.name = name;
  p.value = Mat(rows, cols);
  p.grad = Mat(rows, cols);
  if (stddev > 0.0) init_gaussian(p.value, rng, stddev);
  return p;
}

Parameter make_const_param(const std::string& name, int rows, int cols, double fill) {
  Parameter p;
  p.name = name;
  p.value = Mat(rows, cols);
  p.grad = Mat(rows, cols);
  std::fill(p.value.a.begin(), p.value.a.end(), fill);
  return p;
}

}  // namespace

TransformerEncoder::TransformerEncoder(Vocab vocab, std::string tokenizer_id,
                                       const EncoderConfig& config, uint64_t seed, bool frozen)
    : vocab_(std::move(vocab)), tokenizer_id_(std::move(tokenizer_id)), config_(config), frozen_(frozen) {
  check_contract(config_.dim > 0 && config_.layers > 0 && config_.ffn_dim > 0 && config_.max_len > 0,
                 "encoder: config dimensions must be positive");
  Rng rng(seed);
  const int d = config_.dim;
  tok_emb_ = make_param("tok_emb", vocab_.size(), d, rng, 0.02);
  pos_emb_ = make_param("pos_emb", config_.max_len, d, rng, 0.02);
  for (int l = 0; l < config_.layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    Layer layer;
    layer.ln1_gain = make_const_param(pre + "ln1.gain", 1, d, 1.0);
    layer.ln1_bias = make_const_param(pre + "ln1.bias", 1, d, 0.0);
    layer.wq = make_param(pre + "attn.wq", d, d, rng, 0.05);
    layer.wk = make_param(pre + "attn.wk", d, d, rng, 0.05);
    layer.wv = make_param(pre + "attn.wv", d, d, rng, 0.05);
    layer.wo = make_param(pre + "attn.wo", d, d, rng, 0.05);
    layer.ln2_gain = make_const_param(pre + "ln2.gain", 1, d, 1.0);
    layer.ln2_bias = make_const_param(pre + "ln2.bias", 1, d, 0.0);
    layer.w1 = make_param(pre + "ffn.w1", d, config_.ffn_dim, rng, 0.05);
    layer.b1 = make_const_param(pre + "ffn.b1", 1, config_.ffn_dim, 0.0);
    layer.w2 = make_param(pre + "ffn.w2", config_.ffn_dim, d, rng, 0.05);
    layer.b2 = make_const_param(pre + "ffn.b2", 1, d, 0.0);
    layers_.push_back(std::move(layer));
  }
  lnf_gain_ = make_const_param("final_ln.gain", 1, d, 1.0);
  lnf_bias_ = make_const_param("final_ln.bias", 1, d, 0.0);
}

Var TransformerEncoder::forward(Tape& tape, const std::vector<int>& ids) {
  check_contract(!ids.empty(), "encoder: cannot encode an empty sequence");
  check_contract(static_cast<int>(ids.size()) <= config_.max_len,
                 "encoder: sequence longer than max_len; truncate before encoding");
  for (const int id : ids)
    check_contract(id >= 0 && id < vocab_.size(), "encoder: token id out of vocabulary range");

  std::vector<int> pos(ids.size());
  for (size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<int>(i);

  Var x = tape.add(tape.embedding_rows(tok_emb_, ids), tape.embedding_rows(pos_emb_, pos));
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(config_.dim));
  for (Layer& layer : layers_) {
    Var h = tape.layer_norm(x, tape.param(layer.ln1_gain), tape.param(layer.ln1_bias));
    Var q = tape.matmul(h, tape.param(layer.wq));
    Var k = tape.matmul(h, tape.param(layer.wk));
    Var v = tape.matmul(h, tape.param(layer.wv));
    Var alpha = tape.softmax_rows(tape.scale(tape.matmul_nt(q, k), inv_sqrt_d));
    Var ctx = tape.matmul(alpha, v);
    x = tape.add(x, tape.matmul(ctx, tape.param(layer.wo)));

    Var h2 = tape.layer_norm(x, tape.param(layer.ln2_gain), tape.param(layer.ln2_bias));
    Var f = tape.tanh_(tape.add_rowvec(tape.matmul(h2, tape.param(layer.w1)), tape.param(layer.b1)));
    x = tape.add(x, tape.add_rowvec(tape.matmul(f, tape.param(layer.w2)), tape.param(layer.b2)));
  }
  return tape.layer_norm(x, tape.param(lnf_gain_), tape.param(lnf_bias_));
}

std::vector<Parameter*> TransformerEncoder::trainable_params() {
  if (frozen_) return {};
  return all_params();
}

std::vector<Parameter*> TransformerEncoder::all_params() {
  std::vector<Parameter*> out{&tok_emb_, &pos_emb_};
  for (Layer& layer : layers_) {
    for (Parameter* p : {&layer.ln1_gain, &layer.ln1_bias, &layer.wq, &layer.wk, &layer.wv,
                         &layer.wo, &layer.ln2_gain, &layer.ln2_bias, &layer.w1, &layer.b1,
                         &layer.w2, &layer.b2})
      out.push_back(p);
  }
  out.push_back(&lnf_gain_);
  out.push_back(&lnf_bias_);
  return out;
}

std::unique_ptr<Encoder> TransformerEncoder::clone() const {
  return std::make_unique<TransformerEncoder>(*this);
}

void TransformerEncoder::save(const std::filesystem::path& dir) const {
  ensure_dir(dir);
  auto& self = const_cast<TransformerEncoder&>(*this);
  const std::vector<Parameter*> params = self.all_params();

  Json config;
  config["schema"] = "causalkit-encoder-v1";
  config["tokenizer"] = tokenizer_id_;
  config["dim"] = config_.dim;
  config["layers"] = config_.layers;
  config["ffn_dim"] = config_.ffn_dim;
  config["max_len"] = config_.max_len;
  config["vocab"] = vocab_.to_json();
  Json plist = Json::array();
  for (const Parameter* p : params)
    plist.push_back({{"name", p->name}, {"rows", p->value.rows}, {"cols", p->value.cols}});
  config["params"] = plist;
  write_json_file(dir / "config.json", config);

  std::ofstream out(dir / "weights.bin", std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::Io, "cannot write " + (dir / "weights.bin").string());
  for (const Parameter* p : params)
    out.write(reinterpret_cast<const char*>(p->value.a.data()),
              static_cast<std::streamsize>(p->value.a.size() * sizeof(double)));
  out.flush();
  require(out.good(), ErrorKind::Io, "short write to " + (dir / "weights.bin").string());
}

std::unique_ptr<TransformerEncoder> TransformerEncoder::load(const std::filesystem::path& dir,
                                                             bool frozen) {
  const Json config = read_json_file(dir / "config.json");
  require(config.value("schema", std::string()) == "causalkit-encoder-v1", ErrorKind::Parse,
          (dir / "config.json").string() + ": unsupported encoder schema");
  EncoderConfig cfg;
  cfg.dim = config.at("dim").get<int>();
  cfg.layers = config.at("layers").get<int>();
  cfg.ffn_dim = config.at("ffn_dim").get<int>();
  cfg.max_len = config.at("max_len").get<int>();
  Vocab vocab = Vocab::from_json(config.at("vocab"));
  auto enc = std::make_unique<TransformerEncoder>(std::move(vocab),
                                                  config.at("tokenizer").get<std::string>(), cfg,
                                                  /*seed=*/0, frozen);

  const std::vector<Parameter*> params = enc->all_params();
  const auto& plist = config.at("params");
  require(plist.size() == params.size(), ErrorKind::Parse,
          (dir / "config.json").string() + ": parameter list does not match the architecture");
  std::ifstream in(dir / "weights.bin", std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read " + (dir / "weights.bin").string());
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& meta = plist[i];
    require(meta.at("name").get<std::string>() == params[i]->name &&
                meta.at("rows").get<int>() == params[i]->value.rows &&
                meta.at("cols").get<int>() == params[i]->value.cols,
            ErrorKind::Parse, "encoder checkpoint: shape mismatch for " + params[i]->name);
    in.read(reinterpret_cast<char*>(params[i]->value.a.data()),
            static_cast<std::streamsize>(params[i]->value.a.size() * sizeof(double)));
    require(in.gcount() ==
                static_cast<std::streamsize>(params[i]->value.a.size() * sizeof(double)),
            ErrorKind::Io, "encoder checkpoint: weights.bin is truncated");
  }
  char extra;
  in.read(&extra, 1);
  require(in.eof(), ErrorKind::Parse, "encoder checkpoint: weights.bin has trailing data");
  return enc;
}

std::unique_ptr<Encoder> make_tiny_encoder(const Vocab& vocab, const std::string& tokenizer_id,
                                           uint64_t seed, const EncoderConfig& config) {
  return std::make_unique<TransformerEncoder>(vocab, tokenizer_id, config, seed, /*frozen=*/false);
}

std::unique_ptr<Encoder> load_encoder(const std::filesystem::path& dir, bool frozen) {
  return TransformerEncoder::load(dir, frozen);
}

std::unique_ptr<Encoder> make_encoder(const std::string& spec, const Vocab& corpus_vocab,
                                      const std::string& tokenizer_id, uint64_t seed, bool frozen,
                                      const EncoderConfig& config) {
  if (spec == "tiny") {
    auto enc = make_tiny_encoder(corpus_vocab, tokenizer_id, seed, config);
    static_cast<TransformerEncoder*>(enc.get())->set_frozen(frozen);
    return enc;
  }
  return load_encoder(spec, frozen);
}

}  // namespace causalkit
