#include "causalkit/dataset.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "causalkit/errors.hpp"
#include "causalkit/io.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

namespace {

using EntityKey = std::pair<Label, std::vector<Fragment>>;

EntityKey key_of(const Entity& e) { return {e.label, e.fragments}; }

struct RelationKey {
  RelationType type;
  EntityKey arg1, arg2;
  auto tie() const { return std::tie(type, arg1, arg2); }
  bool operator<(const RelationKey& o) const { return tie() < o.tie(); }
  bool operator==(const RelationKey& o) const { return tie() == o.tie(); }
};

}  // namespace

AnnotationSet renumber(const AnnotationSet& set) {
  std::vector<const Entity*> ents;
  for (const Entity& e : set.entities) ents.push_back(&e);
  std::stable_sort(ents.begin(), ents.end(), [](const Entity* a, const Entity* b) {
    return std::tuple(a->first_begin(), a->label, a->fragments) <
           std::tuple(b->first_begin(), b->label, b->fragments);
  });

  AnnotationSet out;
  out.text_id = set.text_id;
  out.annotator_id = set.annotator_id;
  std::map<std::string, std::string> rename;
  for (size_t i = 0; i < ents.size(); ++i) {
    Entity e = *ents[i];
    rename[e.id] = "T" + std::to_string(i + 1);
    e.id = rename[e.id];
    out.entities.push_back(std::move(e));
  }

  std::vector<Relation> rels = set.relations;
  for (Relation& r : rels) {
    const auto it1 = rename.find(r.arg1);
    const auto it2 = rename.find(r.arg2);
    check_contract(it1 != rename.end() && it2 != rename.end(),
                   "renumber: relation " + r.id + " references a missing entity");
    r.arg1 = it1->second;
    r.arg2 = it2->second;
  }
  auto idx = [](const std::string& id) { return std::stol(id.substr(1)); };
  std::stable_sort(rels.begin(), rels.end(), [&](const Relation& a, const Relation& b) {
    return std::tuple(idx(a.arg1), idx(a.arg2), a.type) < std::tuple(idx(b.arg1), idx(b.arg2), b.type);
  });
  for (size_t i = 0; i < rels.size(); ++i) {
    rels[i].id = "R" + std::to_string(i + 1);
    out.relations.push_back(rels[i]);
  }
  return out;
}

AnnotationSet aggregate_annotators(const AnnotationSet& a, const AnnotationSet& b) {
  check_contract(a.text_id == b.text_id, "aggregate_annotators: sets refer to different texts ('" +
                                             a.text_id + "' vs '" + b.text_id + "')");

  AnnotationSet merged;
  merged.text_id = a.text_id;
  merged.annotator_id =
      a.annotator_id == b.annotator_id ? a.annotator_id : a.annotator_id + "+" + b.annotator_id;

  std::map<EntityKey, std::string> entity_id;  // key -> temp id in merged
  int next = 1;
  for (const AnnotationSet* s : {&a, &b}) {
    for (const Entity& e : s->entities) {
      const EntityKey k = key_of(e);
      if (entity_id.count(k)) continue;
      Entity copy = e;
      copy.id = "T" + std::to_string(next++);
      entity_id[k] = copy.id;
      merged.entities.push_back(std::move(copy));
    }
  }

  std::set<RelationKey> seen;
  int rnext = 1;
  for (const AnnotationSet* s : {&a, &b}) {
    for (const Relation& r : s->relations) {
      const Entity* e1 = s->find_entity(r.arg1);
      const Entity* e2 = s->find_entity(r.arg2);
      check_contract(e1 && e2, "aggregate_annotators: relation " + r.id + " references a missing entity");
      const RelationKey k{r.type, key_of(*e1), key_of(*e2)};
      if (!seen.insert(k).second) continue;
      Relation copy;
      copy.id = "R" + std::to_string(rnext++);
      copy.type = r.type;
      copy.arg1 = entity_id.at(k.arg1);
      copy.arg2 = entity_id.at(k.arg2);
      merged.relations.push_back(std::move(copy));
    }
  }

  return renumber(merged);
}

namespace {

// Tokens whose span overlaps any fragment by at least one character.
std::vector<int> overlapping_tokens(const Entity& e, const std::vector<Token>& tokens) {
  std::vector<int> out;
  for (size_t t = 0; t < tokens.size(); ++t)
    for (const Fragment& f : e.fragments)
      if (tokens[t].begin < f.end && f.begin < tokens[t].end) {
        out.push_back(static_cast<int>(t));
        break;
      }
  return out;
}

AnnotationSet effective_set(const AnnotatedText& at, const std::vector<std::string>& annotators) {
  std::vector<const AnnotationSet*> present;
  for (const std::string& a : annotators) {
    const auto it = at.by_annotator.find(a);
    if (it != at.by_annotator.end()) present.push_back(&it->second);
  }
  if (present.empty()) {
    AnnotationSet empty;
    empty.text_id = at.unit.id;
    return empty;
  }
  if (present.size() == 1) return *present[0];  // singly annotated texts pass through unchanged
  AnnotationSet acc = aggregate_annotators(*present[0], *present[1]);
  for (size_t i = 2; i < present.size(); ++i) acc = aggregate_annotators(acc, *present[i]);
  return acc;
}

}  // namespace

std::vector<SstInstance> build_sst_instances(const std::vector<AnnotatedText>& texts,
                                             const std::string& tokenizer_id,
                                             const std::vector<std::string>& annotators) {
  const Tokenizer& tok = tokenizer_by_id(tokenizer_id);
  std::vector<SstInstance> out;
  out.reserve(texts.size());
  for (const AnnotatedText& at : texts) {
    SstInstance inst;
    inst.text_id = at.unit.id;
    inst.source = at.unit.source_kind;
    inst.text = at.unit.text;
    inst.tokens = tok.tokenize(at.unit.text);
    const AnnotationSet set = effective_set(at, annotators);
    const TokenLabelVector v = project_to_tokens(set, inst.tokens);
    inst.labels.assign(inst.tokens.size(), {0, 0, 0});
    for (int l = 0; l < kNumLabels; ++l)
      for (size_t t = 0; t < inst.tokens.size(); ++t)
        inst.labels[t][static_cast<size_t>(l)] = v.bits[static_cast<size_t>(l)][t];
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<MstInstance> build_mst_instances(const std::vector<AnnotatedText>& texts,
                                             const std::string& tokenizer_id,
                                             const std::vector<std::string>& annotators) {
  const Tokenizer& tok = tokenizer_by_id(tokenizer_id);
  std::vector<MstInstance> out;
  out.reserve(texts.size());
  for (const AnnotatedText& at : texts) {
    MstInstance inst;
    inst.text_id = at.unit.id;
    inst.source = at.unit.source_kind;
    inst.text = at.unit.text;
    inst.tokens = tok.tokenize(at.unit.text);
    inst.trigger_bits.assign(inst.tokens.size(), 0);
    const AnnotationSet set = effective_set(at, annotators);
    for (const Entity& e : set.entities) {
      if (e.label != Label::Trigger) continue;
      MstGroup group;
      group.trigger_tokens = overlapping_tokens(e, inst.tokens);
      if (group.trigger_tokens.empty()) continue;  // trigger projects onto no token

      bool has_cause = false, has_effect = false;
      // effects first so that a token claimed by both roles resolves to Cause
      for (const Relation& r : set.relations) {
        if (r.type != RelationType::LeadsTo || r.arg1 != e.id) continue;
        const Entity* eff = set.find_entity(r.arg2);
        check_contract(eff != nullptr, "mst instances: dangling relation argument " + r.arg2);
        has_effect = true;
        for (const int t : overlapping_tokens(*eff, inst.tokens)) group.args[t] = Label::Effect;
      }
      for (const Relation& r : set.relations) {
        if (r.type != RelationType::CauseOf || r.arg2 != e.id) continue;
        const Entity* cause = set.find_entity(r.arg1);
        check_contract(cause != nullptr, "mst instances: dangling relation argument " + r.arg1);
        has_cause = true;
        for (const int t : overlapping_tokens(*cause, inst.tokens)) group.args[t] = Label::Cause;
      }
      check_contract(has_cause && has_effect,
                     "mst instances: trigger " + e.id + " of text " + inst.text_id +
                         " has no complete relation; validate annotations first");
      for (const int t : group.trigger_tokens) inst.trigger_bits[static_cast<size_t>(t)] = 1;
      inst.groups.push_back(std::move(group));
    }
    // deterministic group order: by first trigger token
    std::stable_sort(inst.groups.begin(), inst.groups.end(), [](const MstGroup& a, const MstGroup& b) {
      return a.trigger_tokens.front() < b.trigger_tokens.front();
    });
    out.push_back(std::move(inst));
  }
  return out;
}

Dataset build_dataset(const std::vector<AnnotatedText>& texts, const std::string& tokenizer_id,
                      const std::vector<std::string>& annotators) {
  Dataset ds;
  ds.tokenizer_id = tokenizer_id;
  ds.sst = build_sst_instances(texts, tokenizer_id, annotators);
  ds.mst = build_mst_instances(texts, tokenizer_id, annotators);
  return ds;
}

FoldPlan make_folds(const std::vector<std::pair<std::string, SourceKind>>& ids, uint64_t seed,
                    double test_fraction, int k) {
  check_contract(ids.size() >= 10, "make_folds: need at least 10 ids");
  check_contract(test_fraction > 0.0 && test_fraction < 1.0, "make_folds: test_fraction must be in (0,1)");
  check_contract(k >= 2, "make_folds: need at least 2 folds");
  {
    std::set<std::string> uniq;
    for (const auto& [id, _] : ids)
      check_contract(uniq.insert(id).second, "make_folds: duplicate id " + id);
  }

  Rng rng(seed);
  FoldPlan plan;
  plan.seed = seed;
  plan.test_fraction = test_fraction;

  std::vector<std::string> rest;
  for (const SourceKind kind : {SourceKind::Fmea, SourceKind::Slides}) {
    std::vector<std::string> bucket;
    for (const auto& [id, src] : ids)
      if (src == kind) bucket.push_back(id);
    if (bucket.empty()) continue;
    rng.shuffle(bucket);
    const auto n_test = static_cast<size_t>(std::llround(test_fraction * static_cast<double>(bucket.size())));
    plan.test_ids.insert(plan.test_ids.end(), bucket.begin(), bucket.begin() + static_cast<long>(n_test));
    rest.insert(rest.end(), bucket.begin() + static_cast<long>(n_test), bucket.end());
  }
  check_contract(!plan.test_ids.empty() && rest.size() >= static_cast<size_t>(k),
                 "make_folds: not enough ids for the requested split");

  rng.shuffle(rest);
  plan.folds.resize(static_cast<size_t>(k));
  size_t off = 0;
  for (int f = 0; f < k; ++f) {
    size_t size = rest.size() / static_cast<size_t>(k) + (static_cast<size_t>(f) < rest.size() % static_cast<size_t>(k) ? 1 : 0);
    plan.folds[static_cast<size_t>(f)].assign(rest.begin() + static_cast<long>(off),
                                              rest.begin() + static_cast<long>(off + size));
    off += size;
  }

  std::sort(plan.test_ids.begin(), plan.test_ids.end());
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

namespace {

Json tokens_json(const std::vector<Token>& tokens) {
  Json arr = Json::array();
  for (const Token& t : tokens) arr.push_back({t.begin, t.end, t.surface});
  return arr;
}

std::vector<Token> tokens_from_json(const Json& arr) {
  std::vector<Token> out;
  for (const auto& t : arr)
    out.push_back(Token{t.at(0).get<uint32_t>(), t.at(1).get<uint32_t>(), t.at(2).get<std::string>()});
  return out;
}

}  // namespace

void save_dataset(const std::filesystem::path& file, const Dataset& ds) {
  check_contract(ds.sst.size() == ds.mst.size(), "save_dataset: sst/mst instance counts differ");
  Json doc;
  doc["schema"] = "causalkit-dataset-v1";
  doc["tokenizer"] = ds.tokenizer_id;
  Json texts = Json::array();
  for (size_t i = 0; i < ds.sst.size(); ++i) {
    const SstInstance& s = ds.sst[i];
    const MstInstance& m = ds.mst[i];
    check_contract(s.text_id == m.text_id, "save_dataset: sst/mst instance order differs");
    Json t;
    t["id"] = s.text_id;
    t["source"] = source_kind_name(s.source);
    t["text"] = s.text;
    t["tokens"] = tokens_json(s.tokens);
    Json labels = Json::array();
    for (const auto& per_token : s.labels) {
      Json cell = Json::array();
      for (const Label l : {Label::Cause, Label::Effect, Label::Trigger})
        if (per_token[static_cast<size_t>(l)]) cell.push_back(label_name(l));
      labels.push_back(cell);
    }
    t["sst"] = labels;
    Json groups = Json::array();
    for (const MstGroup& g : m.groups) {
      Json gj;
      gj["trigger"] = g.trigger_tokens;
      Json args = Json::array();
      for (const auto& [tok, lab] : g.args) args.push_back({tok, label_name(lab)});
      gj["args"] = args;
      groups.push_back(gj);
    }
    t["mst"] = groups;
    texts.push_back(t);
  }
  doc["texts"] = texts;
  write_json_file(file, doc);
}

Dataset load_dataset(const std::filesystem::path& file) {
  const Json doc = read_json_file(file);
  require(doc.value("schema", std::string()) == "causalkit-dataset-v1", ErrorKind::Parse,
          file.string() + ": unsupported dataset schema");
  Dataset ds;
  ds.tokenizer_id = doc.at("tokenizer").get<std::string>();
  for (const auto& t : doc.at("texts")) {
    SstInstance s;
    s.text_id = t.at("id").get<std::string>();
    s.source = source_kind_from(t.at("source").get<std::string>());
    s.text = t.at("text").get<std::string>();
    s.tokens = tokens_from_json(t.at("tokens"));
    s.labels.assign(s.tokens.size(), {0, 0, 0});
    const auto& labels = t.at("sst");
    require(labels.size() == s.tokens.size(), ErrorKind::Parse, file.string() + ": label/token count mismatch");
    for (size_t i = 0; i < labels.size(); ++i)
      for (const auto& name : labels[i])
        s.labels[i][static_cast<size_t>(label_from(name.get<std::string>()))] = 1;

    MstInstance m;
    m.text_id = s.text_id;
    m.source = s.source;
    m.text = s.text;
    m.tokens = s.tokens;
    m.trigger_bits.assign(m.tokens.size(), 0);
    for (const auto& gj : t.at("mst")) {
      MstGroup g;
      for (const auto& idx : gj.at("trigger")) {
        g.trigger_tokens.push_back(idx.get<int>());
        m.trigger_bits[static_cast<size_t>(g.trigger_tokens.back())] = 1;
      }
      for (const auto& arg : gj.at("args"))
        g.args[arg.at(0).get<int>()] = label_from(arg.at(1).get<std::string>());
      m.groups.push_back(std::move(g));
    }
    ds.sst.push_back(std::move(s));
    ds.mst.push_back(std::move(m));
  }
  return ds;
}

void save_fold_plan(const std::filesystem::path& file, const FoldPlan& plan) {
  Json doc;
  doc["schema"] = "causalkit-folds-v1";
  doc["seed"] = plan.seed;
  doc["test_fraction"] = plan.test_fraction;
  doc["test"] = plan.test_ids;
  doc["folds"] = plan.folds;
  write_json_file(file, doc);
}

FoldPlan load_fold_plan(const std::filesystem::path& file) {
  const Json doc = read_json_file(file);
  require(doc.value("schema", std::string()) == "causalkit-folds-v1", ErrorKind::Parse,
          file.string() + ": unsupported fold plan schema");
  FoldPlan plan;
  plan.seed = doc.at("seed").get<uint64_t>();
  plan.test_fraction = doc.at("test_fraction").get<double>();
  plan.test_ids = doc.at("test").get<std::vector<std::string>>();
  plan.folds = doc.at("folds").get<std::vector<std::vector<std::string>>>();
  return plan;
}

}  // namespace causalkit
