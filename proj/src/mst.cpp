#include "causalkit/mst.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "causalkit/errors.hpp"
#include "causalkit/io.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

namespace {

constexpr int kArgNone = 0;
constexpr int kArgCause = 1;
constexpr int kArgEffect = 2;

int arg_class_of(Label l) {
  switch (l) {
    case Label::Cause:
      return kArgCause;
    case Label::Effect:
      return kArgEffect;
    default:
      fail(ErrorKind::Contract, "mst: trigger tokens cannot be argument targets");
  }
}

Parameter init_param(const std::string& name, int rows, int cols, Rng& rng, double stddev) {
  Parameter p;
  p.name = name;
  p.value = Mat(rows, cols);
  p.grad = Mat(rows, cols);
  if (stddev > 0.0) init_gaussian(p.value, rng, stddev);
  return p;
}

// Canonical pair order: (i, j) with i < j, lexicographic over the sorted token list.
std::vector<std::pair<int, int>> canonical_pairs(const std::vector<int>& tokens) {
  std::vector<int> sorted = tokens;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<int, int>> pairs;
  for (size_t a = 0; a < sorted.size(); ++a)
    for (size_t b = a + 1; b < sorted.size(); ++b) pairs.emplace_back(sorted[a], sorted[b]);
  return pairs;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

}  // namespace

MstTagger::MstTagger(std::unique_ptr<Encoder> encoder, uint64_t seed) : encoder_(std::move(encoder)) {
  check_contract(encoder_ != nullptr, "mst: encoder is required");
  Rng rng(seed);
  const int d = encoder_->dim();
  trig_w_ = init_param("trigger.w", d, 1, rng, 0.05);
  trig_b_ = init_param("trigger.b", 1, 1, rng, 0.0);
  grp_w_ = init_param("grouping.w", 2 * d, 1, rng, 0.05);
  grp_b_ = init_param("grouping.b", 1, 1, rng, 0.0);
  attn_w_ = init_param("attn.w", d, d, rng, 0.05);
  attn_v_ = init_param("attn.v", d, 1, rng, 0.05);
  arg_w1_ = init_param("argument.w1", 2 * d, d, rng, 0.05);
  arg_b1_ = init_param("argument.b1", 1, d, rng, 0.0);
  arg_w2_ = init_param("argument.w2", d, 3, rng, 0.05);
  arg_b2_ = init_param("argument.b2", 1, 3, rng, 0.0);
}

std::vector<Parameter*> MstTagger::head_params() {
  return {&trig_w_, &trig_b_, &grp_w_,  &grp_b_,  &attn_w_,
          &attn_v_, &arg_w1_, &arg_b1_, &arg_w2_, &arg_b2_};
}

std::vector<Parameter*> MstTagger::trainable_params() {
  std::vector<Parameter*> out = encoder_->trainable_params();
  for (Parameter* p : head_params()) out.push_back(p);
  return out;
}

Var MstTagger::group_embedding(Tape& tape, Var hidden, const std::vector<int>& members) {
  check_contract(!members.empty(), "mst: group embedding needs at least one member token");
  const Var m = tape.rows(hidden, members);
  const Var scores = tape.matmul(tape.tanh_(tape.matmul_nt(m, tape.param(attn_w_))),
                                 tape.param(attn_v_));
  const Var alpha = tape.softmax_rows(tape.transpose(scores));
  return tape.matmul(alpha, m);
}

Var MstTagger::argument_logits(Tape& tape, Var hidden, Var combined, int n) {
  const Var feat = tape.concat_cols(hidden, tape.tile_rows(combined, n));
  const Var hid = tape.tanh_(
      tape.add_rowvec(tape.matmul(feat, tape.param(arg_w1_)), tape.param(arg_b1_)));
  return tape.add_rowvec(tape.matmul(hid, tape.param(arg_w2_)), tape.param(arg_b2_));
}

Var MstTagger::instance_loss(Tape& tape, const MstInstance& inst, const MstTrainConfig& config) {
  const std::vector<int> ids = encode_tokens(encoder_->vocab(), inst.tokens, encoder_->max_len());
  check_contract(!ids.empty(), "mst: cannot train on an empty token sequence");
  const auto n = static_cast<int>(ids.size());
  const Var hidden = encoder_->forward(tape, ids);

  // Stage 1: trigger detection over every token.
  const Var trig_logits = tape.add_rowvec(tape.matmul(hidden, tape.param(trig_w_)), tape.param(trig_b_));
  std::vector<double> trig_targets(ids.size());
  for (size_t t = 0; t < ids.size(); ++t) trig_targets[t] = inst.trigger_bits[t] ? 1.0 : 0.0;
  Var total = tape.scale(tape.bce_with_logits_sum(trig_logits, trig_targets), config.lambda1);

  // Teacher forcing: later stages condition on the gold trigger tokens and groups.
  std::vector<int> gold_triggers;
  for (int t = 0; t < n; ++t)
    if (inst.trigger_bits[static_cast<size_t>(t)]) gold_triggers.push_back(t);

  std::vector<std::vector<int>> gold_groups;
  for (const MstGroup& g : inst.groups) {
    std::vector<int> members;
    for (const int t : g.trigger_tokens)
      if (t < n) members.push_back(t);
    if (!members.empty()) gold_groups.push_back(std::move(members));
  }

  // Stage 2: pairwise same-group classification over gold trigger tokens.
  const std::vector<std::pair<int, int>> pairs = canonical_pairs(gold_triggers);
  if (!pairs.empty() && config.lambda2 != 0.0) {
    std::vector<int> firsts, seconds;
    std::vector<double> targets;
    for (const auto& [i, j] : pairs) {
      firsts.push_back(i);
      seconds.push_back(j);
      bool same = false;
      for (const auto& g : gold_groups) {
        const bool has_i = std::find(g.begin(), g.end(), i) != g.end();
        const bool has_j = std::find(g.begin(), g.end(), j) != g.end();
        if (has_i && has_j) {
          same = true;
          break;
        }
      }
      targets.push_back(same ? 1.0 : 0.0);
    }
    const Var feat = tape.concat_cols(tape.rows(hidden, firsts), tape.rows(hidden, seconds));
    const Var logits = tape.add_rowvec(tape.matmul(feat, tape.param(grp_w_)), tape.param(grp_b_));
    total = tape.add(total, tape.scale(tape.bce_with_logits_sum(logits, targets), config.lambda2));
  }

  // Stages 3+4: attention-pooled group embedding and per-group argument classification.
  if (config.lambda3 != 0.0) {
    for (const MstGroup& g : inst.groups) {
      std::vector<int> members;
      for (const int t : g.trigger_tokens)
        if (t < n) members.push_back(t);
      if (members.empty()) continue;
      const Var combined = group_embedding(tape, hidden, members);
      const Var logits = argument_logits(tape, hidden, combined, n);
      std::vector<int> targets(ids.size(), kArgNone);
      for (const auto& [tok, label] : g.args)
        if (tok < n) targets[static_cast<size_t>(tok)] = arg_class_of(label);
      total = tape.add(total, tape.scale(tape.ce_with_logits_sum(logits, targets), config.lambda3));
    }
  }
  return total;
}

MstPrediction MstTagger::predict(const std::vector<Token>& tokens, double theta_t, double theta_g) {
  MstPrediction pred;
  pred.trigger_probs.assign(tokens.size(), 0.0);
  pred.trigger_bits.assign(tokens.size(), 0);
  const std::vector<int> ids = encode_tokens(encoder_->vocab(), tokens, encoder_->max_len());
  if (ids.empty()) return pred;
  const auto n = static_cast<int>(ids.size());

  Tape tape;
  const Var hidden = encoder_->forward(tape, ids);
  const Var trig_probs = tape.sigmoid_(
      tape.add_rowvec(tape.matmul(hidden, tape.param(trig_w_)), tape.param(trig_b_)));
  const Mat& tp = tape.value(trig_probs);
  std::vector<int> triggers;
  for (int t = 0; t < n; ++t) {
    pred.trigger_probs[static_cast<size_t>(t)] = tp.a[static_cast<size_t>(t)];
    if (tp.a[static_cast<size_t>(t)] >= theta_t) {
      pred.trigger_bits[static_cast<size_t>(t)] = 1;
      triggers.push_back(t);
    }
  }
  if (triggers.empty()) return pred;

  // Pairwise grouping decisions and connected-component decoding.
  const std::vector<std::pair<int, int>> pairs = canonical_pairs(triggers);
  std::map<std::pair<int, int>, double> pair_prob;
  if (!pairs.empty()) {
    std::vector<int> firsts, seconds;
    for (const auto& [i, j] : pairs) {
      firsts.push_back(i);
      seconds.push_back(j);
    }
    const Var feat = tape.concat_cols(tape.rows(hidden, firsts), tape.rows(hidden, seconds));
    const Var probs = tape.sigmoid_(
        tape.add_rowvec(tape.matmul(feat, tape.param(grp_w_)), tape.param(grp_b_)));
    const Mat& pm = tape.value(probs);
    for (size_t p = 0; p < pairs.size(); ++p) pair_prob[pairs[p]] = pm.a[p];
  }

  std::map<int, int> slot;  // token -> index in `triggers`
  for (size_t i = 0; i < triggers.size(); ++i) slot[triggers[i]] = static_cast<int>(i);
  UnionFind uf(static_cast<int>(triggers.size()));
  for (const auto& [pair, prob] : pair_prob)
    if (prob >= theta_g) uf.unite(slot[pair.first], slot[pair.second]);

  std::map<int, std::vector<int>> components;  // root slot -> member tokens
  for (const int t : triggers) components[uf.find(slot[t])].push_back(t);
  for (auto& [root, members] : components) {
    std::sort(members.begin(), members.end());
    pred.groups.push_back(members);
  }
  std::sort(pred.groups.begin(), pred.groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  for (const std::vector<int>& members : pred.groups) {
    const Var combined = group_embedding(tape, hidden, members);
    const Var probs = tape.softmax_rows(argument_logits(tape, hidden, combined, n));
    const Mat& am = tape.value(probs);

    MstRelation rel;
    rel.trigger_tokens = members;
    double arg_prob_sum = 0.0;
    int arg_count = 0;
    for (int t = 0; t < n; ++t) {
      const double p_none = am.at(t, kArgNone);
      const double p_cause = am.at(t, kArgCause);
      const double p_effect = am.at(t, kArgEffect);
      int cls = kArgNone;
      double best = p_none;
      if (p_cause > best) {
        cls = kArgCause;
        best = p_cause;
      }
      if (p_effect > best) {
        cls = kArgEffect;
        best = p_effect;
      }
      if (cls == kArgCause) rel.cause_tokens.push_back(t);
      if (cls == kArgEffect) rel.effect_tokens.push_back(t);
      if (cls != kArgNone) {
        arg_prob_sum += best;
        ++arg_count;
      }
    }
    if (rel.cause_tokens.empty() || rel.effect_tokens.empty()) continue;

    double trig_sum = 0.0;
    for (const int t : members) trig_sum += pred.trigger_probs[static_cast<size_t>(t)];
    rel.trigger_score = trig_sum / static_cast<double>(members.size());
    rel.group_score = 1.0;
    for (size_t a = 0; a < members.size(); ++a)
      for (size_t b = a + 1; b < members.size(); ++b)
        rel.group_score = std::min(rel.group_score, pair_prob.at({members[a], members[b]}));
    rel.argument_score = arg_count > 0 ? arg_prob_sum / static_cast<double>(arg_count) : 0.0;
    pred.relations.push_back(std::move(rel));
  }
  return pred;
}

std::vector<double> MstTagger::grouping_probs(const std::vector<Token>& tokens,
                                              const std::vector<int>& trigger_tokens) {
  const std::vector<std::pair<int, int>> pairs = canonical_pairs(trigger_tokens);
  std::vector<double> out(pairs.size(), 0.0);
  if (pairs.empty()) return out;
  const std::vector<int> ids = encode_tokens(encoder_->vocab(), tokens, encoder_->max_len());
  const auto n = static_cast<int>(ids.size());

  std::vector<size_t> usable;  // indices into `pairs` whose both tokens fit the window
  std::vector<int> firsts, seconds;
  for (size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].first < n && pairs[p].second < n) {
      usable.push_back(p);
      firsts.push_back(pairs[p].first);
      seconds.push_back(pairs[p].second);
    }
  }
  if (usable.empty()) return out;

  Tape tape;
  const Var hidden = encoder_->forward(tape, ids);
  const Var feat = tape.concat_cols(tape.rows(hidden, firsts), tape.rows(hidden, seconds));
  const Var probs = tape.sigmoid_(
      tape.add_rowvec(tape.matmul(feat, tape.param(grp_w_)), tape.param(grp_b_)));
  const Mat& pm = tape.value(probs);
  for (size_t u = 0; u < usable.size(); ++u) out[usable[u]] = pm.a[u];
  return out;
}

double MstTagger::batch_loss(const std::vector<MstInstance>& batch, const MstTrainConfig& config,
                             bool accumulate_grads) {
  check_contract(!batch.empty(), "mst: batch_loss needs at least one instance");
  Tape tape;
  Var total{};
  bool has = false;
  for (const MstInstance& inst : batch) {
    const Var li = instance_loss(tape, inst, config);
    total = has ? tape.add(total, li) : li;
    has = true;
  }
  const Var mean = tape.scale(total, 1.0 / static_cast<double>(batch.size()));
  if (accumulate_grads) tape.backward(mean);
  return tape.value(mean).a[0];
}

double MstTagger::dev_macro_f1(const std::vector<MstInstance>& dev_set, const MstTrainConfig& config) {
  F1Counts trig, cause, effect;
  for (const MstInstance& inst : dev_set) {
    const MstPrediction pred = predict(inst.tokens, config.theta_t, config.theta_g);
    std::vector<uint8_t> gold_cause(inst.tokens.size(), 0), gold_effect(inst.tokens.size(), 0);
    for (const MstGroup& g : inst.groups)
      for (const auto& [tok, label] : g.args)
        (label == Label::Cause ? gold_cause : gold_effect)[static_cast<size_t>(tok)] = 1;
    std::vector<uint8_t> pred_cause(inst.tokens.size(), 0), pred_effect(inst.tokens.size(), 0);
    for (const MstRelation& rel : pred.relations) {
      for (const int t : rel.cause_tokens) pred_cause[static_cast<size_t>(t)] = 1;
      for (const int t : rel.effect_tokens) pred_effect[static_cast<size_t>(t)] = 1;
    }
    for (size_t t = 0; t < inst.tokens.size(); ++t) {
      trig.add(inst.trigger_bits[t] != 0, pred.trigger_bits[t] != 0);
      cause.add(gold_cause[t] != 0, pred_cause[t] != 0);
      effect.add(gold_effect[t] != 0, pred_effect[t] != 0);
    }
  }
  return (trig.f1() + cause.f1() + effect.f1()) / 3.0;
}

TrainLog MstTagger::train(const std::vector<MstInstance>& train_set,
                          const std::vector<MstInstance>& dev_set, const MstTrainConfig& config) {
  check_contract(!train_set.empty(), "mst: empty training set");
  check_contract(config.max_epochs >= 1 && config.batch_size >= 1 && config.patience >= 1,
                 "mst: train config values must be positive");

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
        const Var li = instance_loss(tape, train_set[order[b]], config);
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
    el.dev_score = dev_set.empty() ? 0.0 : dev_macro_f1(dev_set, config);
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

void MstTagger::save(const std::filesystem::path& dir) const {
  ensure_dir(dir);
  encoder_->save(dir / "encoder");
  auto& self = const_cast<MstTagger&>(*this);
  const std::vector<Parameter*> heads = self.head_params();

  Json config;
  config["schema"] = "causalkit-mst-v1";
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

std::unique_ptr<MstTagger> MstTagger::load(const std::filesystem::path& dir) {
  auto encoder = load_encoder(dir / "encoder", /*frozen=*/false);
  auto tagger = std::make_unique<MstTagger>(std::move(encoder), /*seed=*/0);

  const Json config = read_json_file(dir / "heads.json");
  require(config.value("schema", std::string()) == "causalkit-mst-v1", ErrorKind::Parse,
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
            ErrorKind::Parse, "mst heads: shape mismatch for " + heads[i]->name);
    in.read(reinterpret_cast<char*>(heads[i]->value.a.data()),
            static_cast<std::streamsize>(heads[i]->value.a.size() * sizeof(double)));
    require(in.gcount() == static_cast<std::streamsize>(heads[i]->value.a.size() * sizeof(double)),
            ErrorKind::Io, "mst heads: heads.bin is truncated");
  }
  return tagger;
}

}  // namespace causalkit
