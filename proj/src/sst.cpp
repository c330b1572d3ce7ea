#include "causalkit/sst.hpp"

#include <algorithm>
#include <fstream>

#include "causalkit/errors.hpp"
#include "causalkit/io.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

SstTagger::SstTagger(std::unique_ptr<Encoder> encoder, uint64_t seed)
    : encoder_(std::move(encoder)) {
  check_contract(encoder_ != nullptr, "sst: encoder is required");
  Rng rng(seed);
  const int d = encoder_->dim();
  for (int l = 0; l < kNumLabels; ++l) {
    auto& w = head_w_[static_cast<size_t>(l)];
    w.name = std::string("head.") + label_name(static_cast<Label>(l)) + ".w";
    w.value = Mat(d, 1);
    w.grad = Mat(d, 1);
    init_gaussian(w.value, rng, 0.05);
    auto& b = head_b_[static_cast<size_t>(l)];
    b.name = std::string("head.") + label_name(static_cast<Label>(l)) + ".b";
    b.value = Mat(1, 1);
    b.grad = Mat(1, 1);
  }
}

std::vector<Parameter*> SstTagger::head_params() {
  std::vector<Parameter*> out;
  for (int l = 0; l < kNumLabels; ++l) {
    out.push_back(&head_w_[static_cast<size_t>(l)]);
    out.push_back(&head_b_[static_cast<size_t>(l)]);
  }
  return out;
}

std::vector<Parameter*> SstTagger::trainable_params() {
  std::vector<Parameter*> out = encoder_->trainable_params();
  for (Parameter* p : head_params()) out.push_back(p);
  return out;
}

Var SstTagger::instance_loss(Tape& tape, const SstInstance& inst) {
  const std::vector<int> ids = encode_tokens(encoder_->vocab(), inst.tokens, encoder_->max_len());
  check_contract(!ids.empty(), "sst: cannot train on an empty token sequence");
  const Var hidden = encoder_->forward(tape, ids);
  Var total{};
  bool has = false;
  for (int l = 0; l < kNumLabels; ++l) {
    const Var logits = tape.add_rowvec(tape.matmul(hidden, tape.param(head_w_[static_cast<size_t>(l)])),
                                       tape.param(head_b_[static_cast<size_t>(l)]));
    std::vector<double> targets(ids.size());
    for (size_t t = 0; t < ids.size(); ++t)
      targets[t] = inst.labels[t][static_cast<size_t>(l)] ? 1.0 : 0.0;
    const Var bce = tape.bce_with_logits_sum(logits, targets);
    total = has ? tape.add(total, bce) : bce;
    has = true;
  }
  return total;
}

std::array<std::vector<double>, kNumLabels> SstTagger::predict_probs(const std::vector<Token>& tokens) {
  std::array<std::vector<double>, kNumLabels> probs;
  for (auto& v : probs) v.assign(tokens.size(), 0.0);
  const std::vector<int> ids = encode_tokens(encoder_->vocab(), tokens, encoder_->max_len());
  if (ids.empty()) return probs;

  Tape tape;
  const Var hidden = encoder_->forward(tape, ids);
  for (int l = 0; l < kNumLabels; ++l) {
    const Var p = tape.sigmoid_(
        tape.add_rowvec(tape.matmul(hidden, tape.param(head_w_[static_cast<size_t>(l)])),
                        tape.param(head_b_[static_cast<size_t>(l)])));
    const Mat& m = tape.value(p);
    for (size_t t = 0; t < ids.size(); ++t) probs[static_cast<size_t>(l)][t] = m.a[t];
  }
  return probs;
}

std::array<std::vector<uint8_t>, kNumLabels> SstTagger::predict(const std::vector<Token>& tokens,
                                                                double threshold) {
  const auto probs = predict_probs(tokens);
  std::array<std::vector<uint8_t>, kNumLabels> bits;
  for (int l = 0; l < kNumLabels; ++l) {
    bits[static_cast<size_t>(l)].assign(tokens.size(), 0);
    for (size_t t = 0; t < tokens.size(); ++t)
      bits[static_cast<size_t>(l)][t] = probs[static_cast<size_t>(l)][t] >= threshold ? 1 : 0;
  }
  return bits;
}

double SstTagger::batch_loss(const std::vector<SstInstance>& batch, bool accumulate_grads) {
  check_contract(!batch.empty(), "sst: batch_loss needs at least one instance");
  Tape tape;
  Var total{};
  bool has = false;
  for (const SstInstance& inst : batch) {
    const Var li = instance_loss(tape, inst);
    total = has ? tape.add(total, li) : li;
    has = true;
  }
  const Var mean = tape.scale(total, 1.0 / static_cast<double>(batch.size()));
  if (accumulate_grads) tape.backward(mean);
  return tape.value(mean).a[0];
}

double SstTagger::dev_macro_f1(const std::vector<SstInstance>& dev_set, double threshold) {
  std::array<F1Counts, kNumLabels> counts;
  for (const SstInstance& inst : dev_set) {
    const auto bits = predict(inst.tokens, threshold);
    for (int l = 0; l < kNumLabels; ++l)
      for (size_t t = 0; t < inst.tokens.size(); ++t)
        counts[static_cast<size_t>(l)].add(inst.labels[t][static_cast<size_t>(l)] != 0,
                                           bits[static_cast<size_t>(l)][t] != 0);
  }
  double sum = 0.0;
  for (const F1Counts& c : counts) sum += c.f1();
  return sum / kNumLabels;
}

TrainLog SstTagger::train(const std::vector<SstInstance>& train_set,
                          const std::vector<SstInstance>& dev_set, const SstTrainConfig& config) {
  check_contract(!train_set.empty(), "sst: empty training set");
  check_contract(config.max_epochs >= 1 && config.batch_size >= 1 && config.patience >= 1,
                 "sst: train config values must be positive");

  const std::vector<Parameter*> params = trainable_params();
  Adam adam(params, config.lr);
  Rng rng(config.seed);
  TrainLog log;
  std::vector<double> best_params;
  int since_best = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    double epoch_loss = 0.0;
    long batches = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      Tape tape;
      Var batch_loss{};
      bool has = false;
      for (size_t b = start; b < stop; ++b) {
        const Var li = instance_loss(tape, train_set[order[b]]);
        batch_loss = has ? tape.add(batch_loss, li) : li;
        has = true;
      }
      if (!has) continue;
      const Var mean = tape.scale(batch_loss, 1.0 / static_cast<double>(stop - start));
      epoch_loss += tape.value(mean).a[0];
      ++batches;
      adam.zero_grad();
      tape.backward(mean);
      adam.step();
    }

    EpochLog el;
    el.epoch = epoch;
    el.train_loss = batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0;
    el.dev_score = dev_set.empty() ? 0.0 : dev_macro_f1(dev_set, config.threshold);
    if (log.best_epoch < 0 || el.dev_score > log.best_dev_score + 1e-12) {
      log.best_epoch = epoch;
      log.best_dev_score = el.dev_score;
      best_params = flatten_values(params);
      since_best = 0;
      el.improved = true;
    } else {
      ++since_best;
    }
    log.epochs.push_back(el);
    if (!dev_set.empty() && since_best >= config.patience) break;
  }

  if (!best_params.empty() && !dev_set.empty()) unflatten_values(best_params, params);
  return log;
}

void SstTagger::save(const std::filesystem::path& dir) const {
  ensure_dir(dir);
  encoder_->save(dir / "encoder");
  auto& self = const_cast<SstTagger&>(*this);
  const std::vector<Parameter*> heads = self.head_params();

  Json config;
  config["schema"] = "causalkit-sst-v1";
  Json plist = Json::array();
  for (const Parameter* p : heads)
    plist.push_back({{"name", p->name}, {"rows", p->value.rows}, {"cols", p->value.cols}});
  config["params"] = plist;
  write_json_file(dir / "heads.json", config);

  std::ofstream out(dir / "heads.bin", std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::Io, "cannot write " + (dir / "heads.bin").string());
  for (const Parameter* p : heads)
    out.write(reinterpret_cast<const char*>(p->value.a.data()),
              static_cast<std::streamsize>(p->value.a.size() * sizeof(double)));
  out.flush();
  require(out.good(), ErrorKind::Io, "short write to " + (dir / "heads.bin").string());
}

std::unique_ptr<SstTagger> SstTagger::load(const std::filesystem::path& dir) {
  auto encoder = load_encoder(dir / "encoder", /*frozen=*/false);
  auto tagger = std::unique_ptr<SstTagger>(new SstTagger(std::move(encoder), /*seed=*/0));

  const Json config = read_json_file(dir / "heads.json");
  require(config.value("schema", std::string()) == "causalkit-sst-v1", ErrorKind::Parse,
          (dir / "heads.json").string() + ": unsupported tagger schema");
  const std::vector<Parameter*> heads = tagger->head_params();
  const auto& plist = config.at("params");
  require(plist.size() == heads.size(), ErrorKind::Parse,
          (dir / "heads.json").string() + ": head parameter list does not match");
  std::ifstream in(dir / "heads.bin", std::ios::binary);
  require(in.good(), ErrorKind::Io, "cannot read " + (dir / "heads.bin").string());
  for (size_t i = 0; i < heads.size(); ++i) {
    const auto& meta = plist[i];
    require(meta.at("name").get<std::string>() == heads[i]->name &&
                meta.at("rows").get<int>() == heads[i]->value.rows &&
                meta.at("cols").get<int>() == heads[i]->value.cols,
            ErrorKind::Parse, "sst heads: shape mismatch for " + heads[i]->name);
    in.read(reinterpret_cast<char*>(heads[i]->value.a.data()),
            static_cast<std::streamsize>(heads[i]->value.a.size() * sizeof(double)));
    require(in.gcount() == static_cast<std::streamsize>(heads[i]->value.a.size() * sizeof(double)),
            ErrorKind::Io, "sst heads: heads.bin is truncated");
  }
  return tagger;
}

}  // namespace causalkit
