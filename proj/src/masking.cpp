#include "causalkit/masking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "causalkit/errors.hpp"
#include "causalkit/io.hpp"

namespace causalkit {

PmiVocabulary::PmiVocabulary(PmiConfig config, std::vector<PmiEntry> entries)
    : config_(config), entries_(std::move(entries)) {
  for (const PmiEntry& e : entries_) {
    check_contract(static_cast<int>(e.tokens.size()) >= 2, "pmi vocabulary: entries must span >= 2 tokens");
    grams_.insert(e.tokens);
    max_gram_len_ = std::max(max_gram_len_, static_cast<int>(e.tokens.size()));
  }
}

int PmiVocabulary::longest_match(const std::vector<std::string>& surfaces, size_t begin) const {
  const auto limit = std::min<size_t>(max_gram_len_, surfaces.size() - begin);
  for (size_t len = limit; len >= 2; --len) {
    std::vector<std::string> window(surfaces.begin() + static_cast<long>(begin),
                                    surfaces.begin() + static_cast<long>(begin + len));
    if (grams_.count(window)) return static_cast<int>(len);
  }
  return 0;
}

void PmiVocabulary::save(const std::filesystem::path& file) const {
  Json doc;
  doc["schema"] = "causalkit-pmi-v1";
  doc["config"] = {{"min_n", config_.min_n},
                   {"max_n", config_.max_n},
                   {"min_count", config_.min_count},
                   {"top_k", config_.top_k}};
  Json entries = Json::array();
  for (const PmiEntry& e : entries_)
    entries.push_back({{"tokens", e.tokens}, {"count", e.count}, {"score", e.score}});
  doc["entries"] = entries;
  write_json_file(file, doc);
}

PmiVocabulary PmiVocabulary::load(const std::filesystem::path& file) {
  const Json doc = read_json_file(file);
  require(doc.value("schema", std::string()) == "causalkit-pmi-v1", ErrorKind::Parse,
          file.string() + ": unsupported collocation vocabulary schema");
  PmiConfig config;
  config.min_n = doc.at("config").at("min_n").get<int>();
  config.max_n = doc.at("config").at("max_n").get<int>();
  config.min_count = doc.at("config").at("min_count").get<int>();
  config.top_k = doc.at("config").at("top_k").get<int>();
  std::vector<PmiEntry> entries;
  for (const auto& e : doc.at("entries")) {
    PmiEntry entry;
    entry.tokens = e.at("tokens").get<std::vector<std::string>>();
    entry.count = e.at("count").get<long>();
    entry.score = e.at("score").get<double>();
    entries.push_back(std::move(entry));
  }
  return PmiVocabulary(config, std::move(entries));
}

PmiVocabulary build_pmi_vocab(const std::vector<std::vector<std::string>>& docs,
                              const PmiConfig& config) {
  check_contract(config.min_n >= 2 && config.max_n >= config.min_n,
                 "pmi: need 2 <= min_n <= max_n");
  check_contract(config.min_count >= 1 && config.top_k >= 1, "pmi: min_count and top_k must be positive");

  // k-gram occurrence counts and totals for every k up to max_n.
  std::vector<std::map<std::vector<std::string>, long>> counts(static_cast<size_t>(config.max_n) + 1);
  std::vector<long> totals(static_cast<size_t>(config.max_n) + 1, 0);
  for (const auto& doc : docs) {
    for (int k = 1; k <= config.max_n; ++k) {
      if (doc.size() < static_cast<size_t>(k)) continue;
      totals[static_cast<size_t>(k)] += static_cast<long>(doc.size()) - k + 1;
      for (size_t i = 0; i + static_cast<size_t>(k) <= doc.size(); ++i) {
        std::vector<std::string> gram(doc.begin() + static_cast<long>(i),
                                      doc.begin() + static_cast<long>(i + static_cast<size_t>(k)));
        ++counts[static_cast<size_t>(k)][std::move(gram)];
      }
    }
  }

  const auto prob = [&](const std::vector<std::string>& gram) {
    const size_t k = gram.size();
    const auto it = counts[k].find(gram);
    check_contract(it != counts[k].end() && totals[k] > 0, "pmi: sub-gram missing from counts");
    return static_cast<double>(it->second) / static_cast<double>(totals[k]);
  };

  std::vector<PmiEntry> candidates;
  for (int k = config.min_n; k <= config.max_n; ++k) {
    for (const auto& [gram, count] : counts[static_cast<size_t>(k)]) {
      if (count < config.min_count) continue;
      double score = std::numeric_limits<double>::infinity();
      for (int split = 1; split < k; ++split) {
        const std::vector<std::string> left(gram.begin(), gram.begin() + split);
        const std::vector<std::string> right(gram.begin() + split, gram.end());
        score = std::min(score, std::log(prob(gram) / (prob(left) * prob(right))));
      }
      candidates.push_back(PmiEntry{gram, count, score});
    }
  }

  std::sort(candidates.begin(), candidates.end(), [](const PmiEntry& a, const PmiEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  });
  if (candidates.size() > static_cast<size_t>(config.top_k))
    candidates.resize(static_cast<size_t>(config.top_k));
  return PmiVocabulary(config, std::move(candidates));
}

const char* masking_strategy_name(MaskingStrategy s) {
  return s == MaskingStrategy::Uniform ? "um" : "pmi";
}

MaskingStrategy masking_strategy_from(const std::string& name) {
  if (name == "um") return MaskingStrategy::Uniform;
  if (name == "pmi") return MaskingStrategy::Pmi;
  fail(ErrorKind::Config, "unknown masking strategy '" + name + "' (expected um or pmi)");
}

MaskPlan plan_masks(const std::vector<std::string>& surfaces, double rate, MaskingStrategy strategy,
                    const PmiVocabulary* pmi, int vocab_size, Rng& rng) {
  check_contract(rate > 0.0 && rate < 1.0, "plan_masks: rate must be in (0,1)");
  check_contract(vocab_size > 3, "plan_masks: vocabulary must contain non-special tokens");

  MaskPlan plan;
  const auto n = static_cast<long>(surfaces.size());
  const long budget = std::llround(rate * static_cast<double>(n));
  if (budget <= 0) return plan;

  if (strategy == MaskingStrategy::Uniform) {
    std::vector<int> order(surfaces.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    order.resize(static_cast<size_t>(budget));
    std::sort(order.begin(), order.end());
    for (const int i : order) plan.spans.push_back(MaskSpan{i, i + 1});
  } else {
    check_contract(pmi != nullptr, "plan_masks: pmi strategy requires a collocation vocabulary");
    // Greedy left-to-right longest-match scan over the sequence.
    std::vector<MaskSpan> candidates;
    for (size_t i = 0; i < surfaces.size();) {
      const int len = pmi->longest_match(surfaces, i);
      if (len >= 2) {
        candidates.push_back(MaskSpan{static_cast<int>(i), static_cast<int>(i) + len});
        i += static_cast<size_t>(len);
      } else {
        ++i;
      }
    }
    rng.shuffle(candidates);
    std::vector<uint8_t> covered(surfaces.size(), 0);
    long remaining = budget;
    for (const MaskSpan& span : candidates) {
      const long len = span.end - span.begin;
      if (len > remaining) continue;  // a shorter span later in the shuffle may still fit
      plan.spans.push_back(span);
      for (int t = span.begin; t < span.end; ++t) covered[static_cast<size_t>(t)] = 1;
      remaining -= len;
    }
    if (remaining > 0) {
      std::vector<int> free;
      for (size_t i = 0; i < covered.size(); ++i)
        if (!covered[i]) free.push_back(static_cast<int>(i));
      rng.shuffle(free);
      free.resize(std::min<size_t>(free.size(), static_cast<size_t>(remaining)));
      std::sort(free.begin(), free.end());
      for (const int i : free) plan.spans.push_back(MaskSpan{i, i + 1});
    }
    std::sort(plan.spans.begin(), plan.spans.end(),
              [](const MaskSpan& a, const MaskSpan& b) { return a.begin < b.begin; });
  }

  for (const MaskSpan& span : plan.spans)
    for (int t = span.begin; t < span.end; ++t) {
      MaskedToken m;
      m.index = t;
      const double u = rng.uniform();
      if (u < 0.8) {
        m.action = MaskAction::Mask;
      } else if (u < 0.9) {
        m.action = MaskAction::Random;
        m.random_id = 3 + static_cast<int>(rng.below(static_cast<uint64_t>(vocab_size - 3)));
      } else {
        m.action = MaskAction::Keep;
      }
      plan.tokens.push_back(m);
    }
  return plan;
}

MlmResult pretrain_mlm(Encoder& encoder, const std::vector<std::vector<Token>>& docs,
                       const MlmConfig& config, const PmiVocabulary* pmi) {
  const std::vector<Parameter*> params = encoder.trainable_params();
  check_contract(!params.empty(), "mlm: encoder is frozen; nothing to adapt");
  check_contract(config.epochs >= 1 && config.batch_size >= 1, "mlm: epochs and batch_size must be positive");
  auto* transformer = dynamic_cast<TransformerEncoder*>(&encoder);
  check_contract(transformer != nullptr, "mlm: encoder does not expose a token embedding table");
  Parameter& tok_emb = transformer->token_embedding();
  const Vocab& vocab = encoder.vocab();

  struct Doc {
    std::vector<std::string> surfaces;
    std::vector<int> ids;
  };
  std::vector<Doc> prepared;
  for (const auto& tokens : docs) {
    Doc d;
    d.ids = encode_tokens(vocab, tokens, encoder.max_len());
    if (d.ids.empty()) continue;
    for (size_t i = 0; i < d.ids.size(); ++i) d.surfaces.push_back(tokens[i].surface);
    prepared.push_back(std::move(d));
  }
  check_contract(!prepared.empty(), "mlm: no non-empty documents to train on");

  Rng rng(config.seed);
  Adam adam(params, config.lr);
  MlmResult result;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<size_t> order(prepared.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    double epoch_ce = 0.0;
    long epoch_masked = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      Tape tape;
      Var batch_loss{};
      bool has_loss = false;
      long batch_masked = 0;
      for (size_t b = start; b < stop; ++b) {
        const Doc& doc = prepared[order[b]];
        result.total_tokens += static_cast<long>(doc.ids.size());
        const MaskPlan plan = plan_masks(doc.surfaces, config.mask_rate, config.strategy, pmi,
                                         vocab.size(), rng);
        if (plan.tokens.empty()) continue;
        result.masked_tokens += static_cast<long>(plan.tokens.size());

        std::vector<int> input = doc.ids;
        std::vector<int> positions;
        std::vector<int> targets;
        for (const MaskedToken& m : plan.tokens) {
          positions.push_back(m.index);
          targets.push_back(doc.ids[static_cast<size_t>(m.index)]);
          if (m.action == MaskAction::Mask)
            input[static_cast<size_t>(m.index)] = Vocab::kMask;
          else if (m.action == MaskAction::Random)
            input[static_cast<size_t>(m.index)] = m.random_id;
        }

        const Var hidden = encoder.forward(tape, input);
        const Var at_masks = tape.rows(hidden, positions);
        const Var logits = tape.matmul_nt(at_masks, tape.param(tok_emb));
        const Var ce = tape.ce_with_logits_sum(logits, targets);
        batch_loss = has_loss ? tape.add(batch_loss, ce) : ce;
        has_loss = true;
        batch_masked += static_cast<long>(plan.tokens.size());
      }
      if (!has_loss) continue;
      epoch_ce += tape.value(batch_loss).a[0];
      epoch_masked += batch_masked;
      const Var mean_loss = tape.scale(batch_loss, 1.0 / static_cast<double>(batch_masked));
      adam.zero_grad();
      tape.backward(mean_loss);
      adam.step();
    }
    MlmEpochLog log;
    log.epoch = epoch;
    log.masked_tokens = epoch_masked;
    log.loss = epoch_masked > 0 ? epoch_ce / static_cast<double>(epoch_masked) : 0.0;
    result.epochs.push_back(log);
  }

  result.realized_mask_fraction =
      result.total_tokens > 0
          ? static_cast<double>(result.masked_tokens) / static_cast<double>(result.total_tokens)
          : 0.0;
  return result;
}

}  // namespace causalkit
