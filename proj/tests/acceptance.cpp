// Acceptance harness. Each criterion is one self-contained check over the
// library, prints exactly one PASS/FAIL line, and enforces its own wall-clock
// budget. Invoke with a criterion number (1-9) or "all".

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "causalkit/annotation.hpp"
#include "causalkit/dataset.hpp"
#include "causalkit/encoder.hpp"
#include "causalkit/experiment.hpp"
#include "causalkit/iaa.hpp"
#include "causalkit/io.hpp"
#include "causalkit/masking.hpp"
#include "causalkit/mst.hpp"
#include "causalkit/rng.hpp"
#include "causalkit/sst.hpp"
#include "causalkit/synth.hpp"
#include "causalkit/text.hpp"
#include "guideline_fixtures.hpp"
#include "support.hpp"

using namespace causalkit;

namespace {

struct CheckFailure : std::runtime_error {
  explicit CheckFailure(const std::string& what) : std::runtime_error(what) {}
};

void expect(bool cond, const std::string& what) {
  if (!cond) throw CheckFailure(what);
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 1: agreement metrics vs a brute-force confusion-matrix oracle.
// ---------------------------------------------------------------------------

std::string criterion1() {
  // Hand-worked fixture: n=10, a marks {1,2,3}, b marks {2,3,4}.
  // p_o = 8/10, p_e = (3/10)(3/10) + (7/10)(7/10) = 0.58,
  // kappa = (0.80-0.58)/(1-0.58) = 0.22/0.42 = 0.5238..., F1 = 2*2/(3+3) = 2/3.
  std::vector<uint8_t> a(10, 0), b(10, 0);
  a[1] = a[2] = a[3] = 1;
  b[2] = b[3] = b[4] = 1;
  expect(std::fabs(cohen_kappa(a, b) - 0.22 / 0.42) < 1e-12,
         "kappa fixture 0.22/0.42 not reproduced");
  expect(std::fabs(pairwise_f1(a, b) - 2.0 / 3.0) < 1e-12, "f1 fixture 2/3 not reproduced");

  // Hand-worked fixture: n=4, single disjoint positives.
  // p_o = 1/2, p_e = (1/4)(1/4) + (3/4)(3/4) = 5/8, kappa = -1/3.
  const std::vector<uint8_t> c = {1, 0, 0, 0}, d = {0, 1, 0, 0};
  expect(std::fabs(cohen_kappa(c, d) - (-1.0 / 3.0)) < 1e-12, "kappa fixture -1/3 not reproduced");

  Rng rng(20260818);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const size_t len = 1 + rng.below(200);
    const auto va = testsupport::random_bits(rng, len, rng.uniform());
    const auto vb = testsupport::random_bits(rng, len, rng.uniform());
    worst = std::max(worst, std::fabs(cohen_kappa(va, vb) - testsupport::kappa_bruteforce(va, vb)));
    worst = std::max(worst, std::fabs(pairwise_f1(va, vb) - testsupport::f1_bruteforce(va, vb)));
  }
  expect(worst < 1e-12, fmt("oracle deviation %.3e exceeds 1e-12", worst));
  return fmt("kappa/F1 match the confusion-matrix oracle on 1000 random pairs (max dev %.1e) "
             "and both hand-worked fixtures",
             worst);
}

// ---------------------------------------------------------------------------
// Criterion 2: standoff parse/serialize round trip on generated sets.
// ---------------------------------------------------------------------------

std::string criterion2() {
  Rng rng(7);
  long discontinuous = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string text;
    const AnnotationSet set = testsupport::random_set(rng, &text);
    for (const Entity& e : set.entities)
      if (e.fragments.size() > 1) ++discontinuous;
    const AnnotationSet back =
        parse_standoff(serialize_standoff(set), text, set.text_id, set.annotator_id);
    expect(back.same_content(set) && back.text_id == set.text_id &&
               back.annotator_id == set.annotator_id,
           fmt("round trip diverged on generated set %d", i));
  }
  expect(discontinuous >= 100, "generator produced too few discontinuous entities to count");
  return fmt("1000 generated annotation sets round trip exactly "
             "(%ld discontinuous entities among them)",
             discontinuous);
}

// ---------------------------------------------------------------------------
// Criterion 3: guideline fixtures produce exactly their expected violations.
// ---------------------------------------------------------------------------

std::string criterion3() {
  const auto fixtures = testsupport::guideline_fixtures();
  expect(fixtures.size() == 12, "expected 12 guideline fixtures");
  int clean = 0, flagged = 0;
  for (const auto& fx : fixtures) {
    const AnnotationSet set = fx.build();
    const auto got = testsupport::violation_keys(validate_guidelines(set, fx.text));
    expect(got == testsupport::sorted(fx.expected),
           fmt("fixture %s: violation set differs from the expected one", fx.name.c_str()));
    if (fx.expected.empty())
      ++clean;
    else
      ++flagged;
  }
  return fmt("all 12 guideline fixtures check out (%d valid with no violations, "
             "%d invalid with exactly the expected sets)",
             clean, flagged);
}

// ---------------------------------------------------------------------------
// Criterion 4: analytic gradients vs central finite differences.
// ---------------------------------------------------------------------------

std::vector<double*> component_coords(const std::vector<Parameter*>& params) {
  std::vector<double*> out;
  for (Parameter* p : params)
    for (double& x : p->value.a) out.push_back(&x);
  return out;
}

std::vector<double> component_grads(const std::vector<Parameter*>& params) {
  std::vector<double> g;
  for (const Parameter* p : params) g.insert(g.end(), p->grad.a.begin(), p->grad.a.end());
  return g;
}

// l2 relative error between analytic directional derivatives and central
// differences over `directions` random unit directions within one component.
template <typename GradFn, typename LossFn>
double gradient_check(const std::vector<Parameter*>& all_params,
                      const std::vector<Parameter*>& component, GradFn&& loss_with_grads,
                      LossFn&& loss_only, Rng& rng, int directions) {
  for (Parameter* p : all_params) p->zero_grad();
  loss_with_grads();
  const std::vector<double> g = component_grads(component);
  const std::vector<double*> xs = component_coords(component);
  std::vector<double> base(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) base[i] = *xs[i];

  const double eps = 1e-5;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (int k = 0; k < directions; ++k) {
    std::vector<double> u(xs.size());
    double norm = 0.0;
    for (double& ui : u) {
      ui = rng.gaussian();
      norm += ui * ui;
    }
    norm = std::sqrt(norm);
    double analytic = 0.0;
    for (size_t i = 0; i < u.size(); ++i) {
      u[i] /= norm;
      analytic += g[i] * u[i];
    }
    for (size_t i = 0; i < xs.size(); ++i) *xs[i] = base[i] + eps * u[i];
    const double lp = loss_only();
    for (size_t i = 0; i < xs.size(); ++i) *xs[i] = base[i] - eps * u[i];
    const double lm = loss_only();
    for (size_t i = 0; i < xs.size(); ++i) *xs[i] = base[i];
    const double numeric = (lp - lm) / (2.0 * eps);
    diff2 += (analytic - numeric) * (analytic - numeric);
    a2 += analytic * analytic;
    n2 += numeric * numeric;
  }
  return std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
}

std::vector<Parameter*> params_with_prefix(const std::vector<Parameter*>& params,
                                           const std::string& prefix) {
  std::vector<Parameter*> out;
  for (Parameter* p : params)
    if (p->name.rfind(prefix, 0) == 0) out.push_back(p);
  return out;
}

std::string criterion4() {
  const Tokenizer& tok = tokenizer_by_id("ws");
  const std::vector<std::string> sentences = {
      "overheating causes seal failure .",
      "contamination leads to wafer loss .",
      "the line stopped due to power drift .",
  };
  std::vector<std::vector<std::string>> docs;
  for (const std::string& s : sentences) docs.push_back(token_surfaces(tok.tokenize(s)));
  const Vocab vocab = Vocab::build(docs);

  EncoderConfig ecfg;  // dim 32, 2 layers: the required width
  ecfg.max_len = 32;
  double worst = 0.0;
  const int directions = 50;

  {  // single-stage loss
    SstTagger tagger(make_tiny_encoder(vocab, "ws", 11, ecfg), 12);
    std::vector<SstInstance> batch;
    auto inst = [&](const std::string& text, std::vector<int> trig, std::vector<int> cause,
                    std::vector<int> eff) {
      SstInstance si;
      si.text_id = "t";
      si.text = text;
      si.tokens = tok.tokenize(text);
      si.labels.assign(si.tokens.size(), {0, 0, 0});
      for (int t : cause) si.labels[static_cast<size_t>(t)][static_cast<int>(Label::Cause)] = 1;
      for (int t : eff) si.labels[static_cast<size_t>(t)][static_cast<int>(Label::Effect)] = 1;
      for (int t : trig) si.labels[static_cast<size_t>(t)][static_cast<int>(Label::Trigger)] = 1;
      return si;
    };
    batch.push_back(inst(sentences[0], {1}, {0}, {2, 3}));
    batch.push_back(inst(sentences[1], {1, 2}, {0}, {3, 4}));
    batch.push_back(inst(sentences[2], {3, 4}, {5, 6}, {0, 1, 2}));

    const std::vector<Parameter*> all = tagger.trainable_params();
    const std::vector<Parameter*> enc = tagger.encoder().trainable_params();
    expect(!enc.empty(), "sst encoder exposes no trainable parameters");
    const std::vector<std::vector<Parameter*>> components = {
        enc,
        params_with_prefix(all, "head.Trigger"),
        params_with_prefix(all, "head.Cause"),
        params_with_prefix(all, "head.Effect"),
        all,
    };
    Rng rng(401);
    for (const auto& comp : components) {
      expect(!comp.empty(), "sst gradient component is empty");
      const double rel = gradient_check(
          all, comp, [&] { return tagger.batch_loss(batch, true); },
          [&] { return tagger.batch_loss(batch, false); }, rng, directions);
      worst = std::max(worst, rel);
      expect(rel < 1e-4, fmt("sst component relative error %.3e exceeds 1e-4", rel));
    }
  }

  {  // combined multi-stage loss
    const std::string chain =
        "Due to a wrong implantation dose, the compensation was destroyed, "
        "and therefore, the lot was disregarded.";
    const std::string pair_text = "contamination leads to wafer loss .";
    std::vector<std::vector<std::string>> mdocs = {token_surfaces(tok.tokenize(chain)),
                                                   token_surfaces(tok.tokenize(pair_text))};
    const Vocab mvocab = Vocab::build(mdocs);
    MstTagger tagger(make_tiny_encoder(mvocab, "ws", 21, ecfg), 22);

    MstInstance chained;
    chained.text_id = "chain";
    chained.text = chain;
    chained.tokens = tok.tokenize(chain);
    chained.trigger_bits.assign(chained.tokens.size(), 0);
    for (int t : {0, 1, 13}) chained.trigger_bits[static_cast<size_t>(t)] = 1;
    MstGroup g0;
    g0.trigger_tokens = {0, 1};
    for (int t : {2, 3, 4, 5}) g0.args[t] = Label::Cause;
    for (int t : {7, 8, 9, 10}) g0.args[t] = Label::Effect;
    MstGroup g1;
    g1.trigger_tokens = {13};
    for (int t : {7, 8, 9, 10}) g1.args[t] = Label::Cause;
    for (int t : {15, 16, 17, 18, 19}) g1.args[t] = Label::Effect;
    chained.groups = {g0, g1};

    MstInstance pair;
    pair.text_id = "pair";
    pair.text = pair_text;
    pair.tokens = tok.tokenize(pair_text);
    pair.trigger_bits.assign(pair.tokens.size(), 0);
    pair.trigger_bits[1] = pair.trigger_bits[2] = 1;
    MstGroup pg;
    pg.trigger_tokens = {1, 2};
    pg.args[0] = Label::Cause;
    pg.args[3] = Label::Effect;
    pg.args[4] = Label::Effect;
    pair.groups = {pg};

    const std::vector<MstInstance> batch = {chained, pair};
    MstTrainConfig mcfg;  // lambda = (1, 1, 1)

    const std::vector<Parameter*> all = tagger.trainable_params();
    const std::vector<std::vector<Parameter*>> components = {
        tagger.encoder().trainable_params(),
        params_with_prefix(all, "trigger."),
        params_with_prefix(all, "grouping."),
        params_with_prefix(all, "attn."),
        params_with_prefix(all, "argument."),
        all,
    };
    Rng rng(402);
    for (const auto& comp : components) {
      expect(!comp.empty(), "mst gradient component is empty");
      const double rel = gradient_check(
          all, comp, [&] { return tagger.batch_loss(batch, mcfg, true); },
          [&] { return tagger.batch_loss(batch, mcfg, false); }, rng, directions);
      worst = std::max(worst, rel);
      expect(rel < 1e-4, fmt("mst component relative error %.3e exceeds 1e-4", rel));
    }
  }
  return fmt("analytic gradients match central differences over 50 directions per component "
             "(worst relative error %.1e)",
             worst);
}

// ---------------------------------------------------------------------------
// Criteria 5 and 6: synthetic end-to-end training (shared, cached per process).
// ---------------------------------------------------------------------------

struct EndToEndResult {
  MetricGrid sst_grid;
  MetricGrid mst_grid;
  int distinct_triggers = 0;
  bool saw_chain = false;
  bool saw_disrupted = false;
  bool saw_negative = false;
  std::set<std::string> trigger_surfaces;
};

double micro_f1(const MetricGrid& grid, const std::string& row) {
  const double v = grid.at(row).at("Micro Avg");
  expect(std::isfinite(v), "undefined pooled F1 for row " + row);
  return v;
}

const EndToEndResult& end_to_end() {
  static const EndToEndResult result = [] {
    EndToEndResult r;
    SynthConfig scfg;
    scfg.count = 700;
    scfg.seed = 20260818;
    const std::vector<AnnotatedText> texts = generate_synthetic(scfg);

    for (const AnnotatedText& at : texts) {
      const AnnotationSet& ann = at.by_annotator.at("gold");
      int triggers = 0;
      for (const Entity& e : ann.entities) {
        if (e.label != Label::Trigger) continue;
        ++triggers;
        r.trigger_surfaces.insert(e.surface);
        if (e.fragments.size() > 1) r.saw_disrupted = true;
      }
      if (triggers >= 2) r.saw_chain = true;
      if (ann.entities.empty()) r.saw_negative = true;
    }
    r.distinct_triggers = static_cast<int>(r.trigger_surfaces.size());

    const Dataset ds = build_dataset(texts, "ws", {"gold"});
    expect(ds.sst.size() == 700, "synthetic dataset size mismatch");
    const std::vector<SstInstance> sst_train(ds.sst.begin(), ds.sst.begin() + 500);
    const std::vector<SstInstance> sst_dev(ds.sst.begin() + 500, ds.sst.begin() + 600);
    const std::vector<SstInstance> sst_test(ds.sst.begin() + 600, ds.sst.end());
    const std::vector<MstInstance> mst_train(ds.mst.begin(), ds.mst.begin() + 500);
    const std::vector<MstInstance> mst_dev(ds.mst.begin() + 500, ds.mst.begin() + 600);
    const std::vector<MstInstance> mst_test(ds.mst.begin() + 600, ds.mst.end());

    const Vocab vocab = vocab_from_sst(sst_train);
    EncoderConfig ecfg;  // dim 32, 2 layers
    ecfg.max_len = 48;

    {
      SstTagger tagger(make_tiny_encoder(vocab, "ws", 101, ecfg), 102);
      SstTrainConfig tcfg;
      tcfg.lr = 8e-3;
      tcfg.batch_size = 16;
      tcfg.max_epochs = 30;
      tcfg.patience = 5;
      tcfg.seed = 103;
      tagger.train(sst_train, sst_dev, tcfg);
      r.sst_grid = evaluate_sst(tagger, sst_test, 0.5);
    }
    {
      MstTagger tagger(make_tiny_encoder(vocab, "ws", 201, ecfg), 202);
      MstTrainConfig tcfg;
      tcfg.lr = 8e-3;
      tcfg.batch_size = 16;
      tcfg.max_epochs = 30;
      tcfg.patience = 5;
      tcfg.seed = 203;
      tagger.train(mst_train, mst_dev, tcfg);
      r.mst_grid = evaluate_mst(tagger, mst_test, 0.5, 0.5);
    }
    return r;
  }();
  return result;
}

std::string criterion5() {
  const EndToEndResult& r = end_to_end();

  expect(r.distinct_triggers >= 15,
         fmt("only %d distinct trigger surfaces generated", r.distinct_triggers));
  expect(r.trigger_surfaces.count("due to") == 1, "generator never produced trigger 'due to'");
  expect(r.trigger_surfaces.count("leads to") == 1, "generator never produced trigger 'leads to'");
  expect(r.trigger_surfaces.count("therefore") == 1, "generator never produced 'therefore'");
  expect(r.saw_chain, "no chained text generated");
  expect(r.saw_disrupted, "no disrupted (discontinuous) trigger generated");
  expect(r.saw_negative, "no negative text generated");

  const double s_t = micro_f1(r.sst_grid, "Trigger");
  const double s_c = micro_f1(r.sst_grid, "Cause");
  const double s_e = micro_f1(r.sst_grid, "Effect");
  const double m_t = micro_f1(r.mst_grid, "Trigger");
  const double m_c = micro_f1(r.mst_grid, "Cause");
  const double m_e = micro_f1(r.mst_grid, "Effect");
  const double m_g = micro_f1(r.mst_grid, "Trigger Grouping");

  expect(s_t >= 0.95, fmt("single-stage trigger F1 %.4f below 0.95", s_t));
  expect(s_c >= 0.90, fmt("single-stage cause F1 %.4f below 0.90", s_c));
  expect(s_e >= 0.90, fmt("single-stage effect F1 %.4f below 0.90", s_e));
  expect(m_t >= 0.95, fmt("multi-stage trigger F1 %.4f below 0.95", m_t));
  expect(m_c >= 0.90, fmt("multi-stage cause F1 %.4f below 0.90", m_c));
  expect(m_e >= 0.90, fmt("multi-stage effect F1 %.4f below 0.90", m_e));
  expect(m_g >= 0.95, fmt("trigger-grouping pairwise F1 %.4f below 0.95", m_g));

  return fmt("held-out F1 floors cleared on 500/100/100 synthetic texts "
             "(sst T/C/E %.3f/%.3f/%.3f; mst %.3f/%.3f/%.3f, grouping %.3f)",
             s_t, s_c, s_e, m_t, m_c, m_e, m_g);
}

std::string criterion6() {
  const EndToEndResult& r = end_to_end();
  for (const auto& [name, grid] :
       {std::pair<const char*, const MetricGrid*>{"single-stage", &r.sst_grid},
        std::pair<const char*, const MetricGrid*>{"multi-stage", &r.mst_grid}}) {
    const double t = micro_f1(*grid, "Trigger");
    const double c = micro_f1(*grid, "Cause");
    const double e = micro_f1(*grid, "Effect");
    expect(t >= c, fmt("%s: trigger F1 %.4f below cause F1 %.4f", name, t, c));
    expect(t >= e, fmt("%s: trigger F1 %.4f below effect F1 %.4f", name, t, e));
  }
  return fmt("trigger F1 dominates cause and effect F1 in both taggers' end-to-end reports "
             "(sst %.3f >= %.3f/%.3f; mst %.3f >= %.3f/%.3f)",
             micro_f1(end_to_end().sst_grid, "Trigger"), micro_f1(end_to_end().sst_grid, "Cause"),
             micro_f1(end_to_end().sst_grid, "Effect"), micro_f1(end_to_end().mst_grid, "Trigger"),
             micro_f1(end_to_end().mst_grid, "Cause"), micro_f1(end_to_end().mst_grid, "Effect"));
}

// ---------------------------------------------------------------------------
// Criterion 7: enchained-relation decode after overfitting one sentence.
// ---------------------------------------------------------------------------

std::string criterion7() {
  const Tokenizer& tok = tokenizer_by_id("ws");
  MstInstance inst;
  inst.text_id = "chain";
  inst.text =
      "Due to a wrong implantation dose, the compensation was destroyed, "
      "and therefore, the lot was disregarded.";
  inst.tokens = tok.tokenize(inst.text);
  expect(inst.tokens.size() == 20, "chained sentence tokenization changed");
  inst.trigger_bits.assign(inst.tokens.size(), 0);
  for (int t : {0, 1, 13}) inst.trigger_bits[static_cast<size_t>(t)] = 1;
  MstGroup g0;
  g0.trigger_tokens = {0, 1};
  for (int t : {2, 3, 4, 5}) g0.args[t] = Label::Cause;
  for (int t : {7, 8, 9, 10}) g0.args[t] = Label::Effect;
  MstGroup g1;
  g1.trigger_tokens = {13};
  for (int t : {7, 8, 9, 10}) g1.args[t] = Label::Cause;
  for (int t : {15, 16, 17, 18, 19}) g1.args[t] = Label::Effect;
  inst.groups = {g0, g1};

  const Vocab vocab = Vocab::build({token_surfaces(inst.tokens)});
  EncoderConfig ecfg;
  ecfg.dim = 16;
  ecfg.layers = 1;
  ecfg.ffn_dim = 24;
  ecfg.max_len = 64;
  MstTagger tagger(make_tiny_encoder(vocab, "ws", 19, ecfg), 19);

  MstTrainConfig cfg;
  cfg.lr = 1e-2;
  cfg.batch_size = 1;
  cfg.max_epochs = 300;
  cfg.patience = 300;
  cfg.seed = 7;
  tagger.train({inst}, {}, cfg);

  const MstPrediction pred = tagger.predict(inst.tokens, cfg.theta_t, cfg.theta_g);
  expect(pred.relations.size() == 2,
         fmt("expected exactly 2 relations, got %zu", pred.relations.size()));
  const std::vector<int> middle = {7, 8, 9, 10};
  expect(pred.relations[0].effect_tokens == middle,
         "relation 1 effect is not the middle clause token set");
  expect(pred.relations[1].cause_tokens == middle,
         "relation 2 cause is not the middle clause token set");
  expect(pred.relations[0].effect_tokens == pred.relations[1].cause_tokens,
         "middle clause differs between the two relations");
  return "overfit multi-stage tagger decodes the chained sentence into exactly 2 relations "
         "sharing the middle clause (effect of the first, cause of the second)";
}

// ---------------------------------------------------------------------------
// Criterion 8: mask budgets, PMI span validity, and plan determinism.
// ---------------------------------------------------------------------------

std::string criterion8() {
  SynthConfig scfg;
  scfg.count = 1500;
  scfg.seed = 99;
  const std::vector<AnnotatedText> texts = generate_synthetic(scfg);
  const Tokenizer& tok = tokenizer_by_id("ws");
  std::vector<std::string> stream;
  for (const AnnotatedText& at : texts) {
    const std::vector<std::string> surfaces = token_surfaces(tok.tokenize(at.unit.text));
    stream.insert(stream.end(), surfaces.begin(), surfaces.end());
  }
  expect(stream.size() >= 10000, "synthetic token stream unexpectedly small");

  // 1000 documents of exactly 100 tokens, cycling through the stream.
  std::vector<std::vector<std::string>> docs;
  size_t pos = 0;
  long total_tokens = 0;
  for (int d = 0; d < 1000; ++d) {
    std::vector<std::string> doc;
    doc.reserve(100);
    for (int i = 0; i < 100; ++i) {
      doc.push_back(stream[pos]);
      pos = (pos + 1) % stream.size();
    }
    total_tokens += 100;
    docs.push_back(std::move(doc));
  }
  expect(total_tokens >= 100000, "fewer than 1e5 tokens assembled");

  const PmiVocabulary pmi = build_pmi_vocab(docs);  // default config
  expect(!pmi.entries().empty(), "collocation vocabulary came out empty");
  const Vocab vocab = Vocab::build(docs);

  auto plan_all = [&](MaskingStrategy strategy, uint64_t seed) {
    Rng rng(seed);
    std::vector<MaskPlan> plans;
    plans.reserve(docs.size());
    for (const auto& doc : docs)
      plans.push_back(plan_masks(doc, 0.15, strategy,
                                 strategy == MaskingStrategy::Pmi ? &pmi : nullptr, vocab.size(),
                                 rng));
    return plans;
  };

  double um_fraction = 0.0, pmi_fraction = 0.0;
  long pmi_multi_spans = 0;
  for (const MaskingStrategy strategy : {MaskingStrategy::Uniform, MaskingStrategy::Pmi}) {
    const std::vector<MaskPlan> plans = plan_all(strategy, 4242);
    long masked = 0;
    for (size_t d = 0; d < plans.size(); ++d) {
      masked += static_cast<long>(plans[d].tokens.size());
      if (strategy == MaskingStrategy::Pmi) {
        for (const MaskSpan& span : plans[d].spans) {
          if (span.end - span.begin < 2) continue;
          ++pmi_multi_spans;
          const std::vector<std::string> gram(docs[d].begin() + span.begin,
                                              docs[d].begin() + span.end);
          expect(pmi.contains(gram),
                 fmt("masked span in doc %zu is not a vocabulary n-gram occurrence", d));
        }
      }
    }
    const double fraction = static_cast<double>(masked) / static_cast<double>(total_tokens);
    expect(std::fabs(fraction - 0.15) <= 0.01,
           fmt("%s realized mask fraction %.4f outside 0.15 +/- 0.01",
               masking_strategy_name(strategy), fraction));
    (strategy == MaskingStrategy::Uniform ? um_fraction : pmi_fraction) = fraction;

    const std::vector<MaskPlan> again = plan_all(strategy, 4242);
    expect(again == plans, fmt("%s plans differ under identical seeds",
                               masking_strategy_name(strategy)));
    const std::vector<MaskPlan> other = plan_all(strategy, 77);
    expect(other != plans, fmt("%s plans identical under different seeds",
                               masking_strategy_name(strategy)));
  }
  expect(pmi_multi_spans > 0, "PMI strategy never produced a multi-token span");
  return fmt("mask budget realized over %ld tokens (um %.4f, pmi %.4f), all %ld multi-token "
             "PMI spans are vocabulary occurrences, plans reproduce under identical seeds",
             total_tokens, um_fraction, pmi_fraction, pmi_multi_spans);
}

// ---------------------------------------------------------------------------
// Criterion 9: harness determinism and golden table renders.
// ---------------------------------------------------------------------------

std::string criterion9() {
  // Byte-identical metrics records across two identical cross-validation runs.
  SynthConfig scfg;
  scfg.count = 36;
  scfg.seed = 5;
  const std::vector<AnnotatedText> texts = generate_synthetic(scfg);
  const Dataset ds = build_dataset(texts, "ws", {"gold"});
  std::vector<std::pair<std::string, SourceKind>> ids;
  for (const AnnotatedText& t : texts) ids.emplace_back(t.unit.id, t.unit.source_kind);
  const FoldPlan plan = make_folds(ids, 6, 0.2, 3);

  RunConfig cfg;
  cfg.model = "mst";
  cfg.encoder_spec = "tiny";
  cfg.tokenizer_id = "ws";
  cfg.seed = 17;
  cfg.encoder.dim = 12;
  cfg.encoder.layers = 1;
  cfg.encoder.ffn_dim = 16;
  cfg.encoder.max_len = 32;
  cfg.sst.max_epochs = cfg.mst.max_epochs = 2;
  cfg.sst.patience = cfg.mst.patience = 2;
  cfg.sst.batch_size = cfg.mst.batch_size = 8;

  const std::string first = metrics_records(run_cv(ds, plan, cfg)).dump(2);
  const std::string second = metrics_records(run_cv(ds, plan, cfg)).dump(2);
  expect(first == second, "two identical cross-validation runs produced different records");

  // Injected agreement fixture renders to the golden agreement table.
  IaaReport iaa;
  const int k_pct[4][4] = {{94, 93, 94, 94}, {87, 84, 87, 86}, {86, 67, 81, 76}, {89, 81, 87, 85}};
  const int f_pct[4][4] = {{94, 93, 94, 94}, {90, 85, 88, 88}, {88, 68, 83, 78}, {91, 82, 88, 86}};
  for (int row = 0; row < 4; ++row)
    for (int col = 0; col < 4; ++col) {
      iaa.cell[row][col].kappa = k_pct[row][col] / 100.0;
      iaa.cell[row][col].f1 = f_pct[row][col] / 100.0;
      iaa.cell[row][col].n_tokens = 1;
    }
  const std::string golden1 =
      read_text_file(std::string(CAUSALKIT_TESTS_DATA) + "/golden_table1.txt");
  expect(render_iaa(iaa) == golden1, "agreement table render differs from the golden file");

  // Injected cross-validation fixture renders to the golden metrics table.
  std::map<std::string, std::map<std::string, ReportCell>> cells;
  auto put = [&](const std::string& row, int c0, int s0, int c1, int s1, int c2, int s2, int c3,
                 int s3) {
    auto cell = [](int mean, int stdev) {
      ReportCell c;
      c.n = 5;
      c.mean = mean / 100.0;
      c.stdev = stdev / 100.0;
      return c;
    };
    cells[row]["FMEA"] = cell(c0, s0);
    cells[row]["Slides"] = cell(c1, s1);
    cells[row]["Micro Avg"] = cell(c2, s2);
    cells[row]["Macro Avg"] = cell(c3, s3);
  };
  put("Trigger", 98, 1, 82, 4, 90, 2, 90, 2);
  put("Cause", 88, 4, 65, 4, 75, 3, 76, 4);
  put("Effect", 94, 3, 72, 6, 82, 4, 83, 4);
  put("Macro Avg", 93, 3, 73, 5, 82, 3, 83, 3);
  put("Trigger Grouping", 93, 4, 98, 2, 96, 2, 96, 3);
  const std::string golden2 =
      read_text_file(std::string(CAUSALKIT_TESTS_DATA) + "/golden_table2.txt");
  expect(render_metrics_table(kMstRows, kMetricCols, cells) == golden2,
         "metrics table render differs from the golden file");

  return "cross-validation records are byte-identical across reruns and both fixture tables "
         "match their golden renders";
}

// ---------------------------------------------------------------------------

struct Criterion {
  int number;
  double budget_seconds;  // 0 = no explicit budget
  std::string (*fn)();
};

const Criterion kCriteria[] = {
    {1, 10.0, criterion1},  {2, 10.0, criterion2}, {3, 0.0, criterion3},
    {4, 120.0, criterion4}, {5, 900.0, criterion5}, {6, 0.0, criterion6},
    {7, 0.0, criterion7},   {8, 0.0, criterion8},  {9, 0.0, criterion9},
};

bool run_criterion(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  try {
    detail = c.fn();
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (ok && c.budget_seconds > 0.0 && secs > c.budget_seconds) {
    ok = false;
    detail = fmt("finished correct but in %.1fs, over the %.0fs budget", secs, c.budget_seconds);
  }
  std::printf("%s criterion %d: %s (%.1fs)\n", ok ? "PASS" : "FAIL", c.number, detail.c_str(),
              secs);
  std::fflush(stdout);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string which = argc > 1 ? argv[1] : "all";
  bool all_ok = true;
  bool matched = false;
  for (const Criterion& c : kCriteria) {
    if (which != "all" && which != std::to_string(c.number)) continue;
    matched = true;
    all_ok = run_criterion(c) && all_ok;
  }
  if (!matched) {
    std::fprintf(stderr, "usage: %s [1-9|all]\n", argv[0]);
    return 2;
  }
  return all_ok ? 0 : 1;
}
