#include "causalkit/graph.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "causalkit/dataset.hpp"
#include "causalkit/errors.hpp"
#include "causalkit/utf8.hpp"

namespace causalkit {

namespace {

// Contiguous index runs -> fragments spanning first token begin to last token end.
std::vector<Fragment> runs_to_fragments(const std::vector<int>& token_indices,
                                        const std::vector<Token>& tokens) {
  std::vector<int> sorted = token_indices;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<Fragment> out;
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[j] + 1) ++j;
    out.push_back(Fragment{tokens[static_cast<size_t>(sorted[i])].begin,
                           tokens[static_cast<size_t>(sorted[j])].end});
    i = j + 1;
  }
  return out;
}

std::string fragments_surface(const std::vector<Fragment>& fragments, const std::string& text,
                              const Utf8Map& map) {
  std::string surface;
  for (size_t i = 0; i < fragments.size(); ++i) {
    if (i > 0) surface += ' ';
    surface += utf8_slice(text, map, fragments[i].begin, fragments[i].end);
  }
  return surface;
}

}  // namespace

DecodedAnnotations decode_mst_prediction(const std::string& text_id, const std::string& text,
                                         const std::vector<Token>& tokens,
                                         const MstPrediction& pred) {
  const Utf8Map map = utf8_index(text);
  AnnotationSet set;
  set.text_id = text_id;
  set.annotator_id = "model";

  using Key = std::pair<Label, std::vector<Fragment>>;
  std::map<Key, std::string> entity_id;
  int next_entity = 1;
  const auto intern = [&](Label label, const std::vector<int>& token_indices) {
    const std::vector<Fragment> fragments = runs_to_fragments(token_indices, tokens);
    check_contract(!fragments.empty(), "decode: role with no tokens");
    const Key key{label, fragments};
    const auto it = entity_id.find(key);
    if (it != entity_id.end()) return it->second;
    Entity e;
    e.id = "T" + std::to_string(next_entity++);
    e.label = label;
    e.fragments = fragments;
    e.surface = fragments_surface(fragments, text, map);
    entity_id[key] = e.id;
    set.entities.push_back(std::move(e));
    return entity_id[key];
  };

  // confidence keyed by the relation's argument fragments, stable across renumbering
  std::map<std::tuple<RelationType, std::vector<Fragment>, std::vector<Fragment>>, double> conf;
  int next_rel = 1;
  std::set<std::tuple<RelationType, std::string, std::string>> seen;
  for (const MstRelation& rel : pred.relations) {
    const double c = std::min({rel.trigger_score, rel.group_score, rel.argument_score});
    const std::string trig = intern(Label::Trigger, rel.trigger_tokens);
    const std::string cause = intern(Label::Cause, rel.cause_tokens);
    const std::string effect = intern(Label::Effect, rel.effect_tokens);
    const auto frag_of = [&](const std::string& id) { return set.find_entity(id)->fragments; };
    if (seen.insert({RelationType::CauseOf, cause, trig}).second) {
      set.relations.push_back(Relation{"R" + std::to_string(next_rel++), RelationType::CauseOf,
                                       cause, trig});
      conf[{RelationType::CauseOf, frag_of(cause), frag_of(trig)}] = c;
    } else {
      auto& slot = conf.at({RelationType::CauseOf, frag_of(cause), frag_of(trig)});
      slot = std::min(slot, c);
    }
    if (seen.insert({RelationType::LeadsTo, trig, effect}).second) {
      set.relations.push_back(Relation{"R" + std::to_string(next_rel++), RelationType::LeadsTo,
                                       trig, effect});
      conf[{RelationType::LeadsTo, frag_of(trig), frag_of(effect)}] = c;
    } else {
      auto& slot = conf.at({RelationType::LeadsTo, frag_of(trig), frag_of(effect)});
      slot = std::min(slot, c);
    }
  }

  DecodedAnnotations out;
  out.set = renumber(set);
  for (const Relation& r : out.set.relations) {
    const Entity* e1 = out.set.find_entity(r.arg1);
    const Entity* e2 = out.set.find_entity(r.arg2);
    out.relation_confidence[r.id] = conf.at({r.type, e1->fragments, e2->fragments});
  }
  return out;
}

AnnotationSet decode_sst_prediction(const std::string& text_id, const std::string& text,
                                    const std::vector<Token>& tokens,
                                    const std::array<std::vector<uint8_t>, kNumLabels>& bits) {
  const Utf8Map map = utf8_index(text);
  AnnotationSet set;
  set.text_id = text_id;
  set.annotator_id = "model";
  int next = 1;
  for (int l = 0; l < kNumLabels; ++l) {
    check_contract(bits[static_cast<size_t>(l)].size() == tokens.size(),
                   "decode: bit vector does not match token count");
    std::vector<int> indices;
    for (size_t t = 0; t < tokens.size(); ++t)
      if (bits[static_cast<size_t>(l)][t]) indices.push_back(static_cast<int>(t));
    // each contiguous run is its own entity: nothing ties separated runs together
    for (const Fragment& f : runs_to_fragments(indices, tokens)) {
      Entity e;
      e.id = "T" + std::to_string(next++);
      e.label = static_cast<Label>(l);
      e.fragments = {f};
      e.surface = fragments_surface(e.fragments, text, map);
      set.entities.push_back(std::move(e));
    }
  }
  return renumber(set);
}

CausalGraph build_graph(const std::vector<GraphInput>& inputs) {
  CausalGraph graph;
  std::map<std::pair<std::string, std::vector<Fragment>>, size_t> node_index;
  std::map<std::string, int> id_uses;

  const auto node_for = [&](const GraphInput& input, const Entity& e,
                            const std::string& role) -> std::string {
    const std::pair<std::string, std::vector<Fragment>> key{input.unit->id, e.fragments};
    const auto it = node_index.find(key);
    if (it != node_index.end()) {
      GraphNode& node = graph.nodes[it->second];
      if (node.role != role) node.role = "both";
      return node.id;
    }
    GraphNode node;
    std::string base = input.unit->id + ":" + std::to_string(e.first_begin());
    const int uses = ++id_uses[base];
    node.id = uses == 1 ? base : base + "#" + std::to_string(uses);
    node.text_id = input.unit->id;
    node.role = role;
    node.fragments = e.fragments;
    node.surface = e.surface;
    node_index[key] = graph.nodes.size();
    graph.nodes.push_back(std::move(node));
    return graph.nodes.back().id;
  };

  for (const GraphInput& input : inputs) {
    check_contract(input.unit != nullptr && input.ann != nullptr, "build_graph: null input");
    check_contract(input.unit->id == input.ann->text_id,
                   "build_graph: annotation set does not match text unit");
    const AnnotationSet& ann = *input.ann;

    const auto confidence_of = [&](const std::string& rel_id) {
      const auto it = input.relation_confidence.find(rel_id);
      return it == input.relation_confidence.end() ? 1.0 : it->second;
    };

    // every cause/effect entity becomes a node, related or not, so annotation
    // sets without relations (e.g. token-level extraction) still populate the graph
    for (const Entity& e : ann.entities) {
      if (e.label == Label::Cause)
        node_for(input, e, "cause");
      else if (e.label == Label::Effect)
        node_for(input, e, "effect");
    }

    // trigger entity id -> (causes, effects) with per-relation confidence
    std::map<std::string, std::vector<std::pair<const Entity*, double>>> causes, effects;
    for (const Relation& r : ann.relations) {
      const Entity* e1 = ann.find_entity(r.arg1);
      const Entity* e2 = ann.find_entity(r.arg2);
      check_contract(e1 && e2, "build_graph: dangling relation argument in " + r.id);
      if (r.type == RelationType::CauseOf)
        causes[r.arg2].emplace_back(e1, confidence_of(r.id));
      else
        effects[r.arg1].emplace_back(e2, confidence_of(r.id));
    }

    for (const Entity& trig : ann.entities) {
      if (trig.label != Label::Trigger) continue;
      const auto cit = causes.find(trig.id);
      const auto eit = effects.find(trig.id);
      if (cit == causes.end() || eit == effects.end()) continue;
      for (const auto& [cause, c_conf] : cit->second) {
        for (const auto& [effect, e_conf] : eit->second) {
          GraphEdge edge;
          edge.from = node_for(input, *cause, "cause");
          edge.to = node_for(input, *effect, "effect");
          edge.text_id = input.unit->id;
          edge.trigger_fragments = trig.fragments;
          edge.trigger_surface = trig.surface;
          edge.confidence = std::min(c_conf, e_conf);
          graph.edges.push_back(std::move(edge));
        }
      }
    }
  }
  return graph;
}

Json graph_json(const CausalGraph& graph) {
  Json doc;
  doc["schema"] = "causalkit-graph-v1";
  Json nodes = Json::array();
  for (const GraphNode& n : graph.nodes) {
    Json frags = Json::array();
    for (const Fragment& f : n.fragments) frags.push_back({f.begin, f.end});
    nodes.push_back({{"id", n.id},
                     {"text_id", n.text_id},
                     {"role", n.role},
                     {"fragments", frags},
                     {"surface", n.surface}});
  }
  doc["nodes"] = nodes;
  Json edges = Json::array();
  for (const GraphEdge& e : graph.edges) {
    Json frags = Json::array();
    for (const Fragment& f : e.trigger_fragments) frags.push_back({f.begin, f.end});
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"text_id", e.text_id},
                     {"trigger_fragments", frags},
                     {"trigger_surface", e.trigger_surface},
                     {"confidence", e.confidence}});
  }
  doc["edges"] = edges;
  return doc;
}

std::vector<CellSplitProposal> split_merged_cells(const std::vector<GraphInput>& inputs) {
  std::vector<CellSplitProposal> proposals;
  for (const GraphInput& input : inputs) {
    check_contract(input.unit != nullptr && input.ann != nullptr, "split_merged_cells: null input");
    const AnnotationSet& ann = *input.ann;
    const Utf8Map map = utf8_index(input.unit->text);

    CellSplitProposal prop;
    prop.text_id = input.unit->id;
    std::set<std::vector<Fragment>> seen_cause, seen_effect;
    for (const Entity& e : ann.entities) {
      if (e.label == Label::Trigger) continue;
      auto& seen = e.label == Label::Cause ? seen_cause : seen_effect;
      if (!seen.insert(e.fragments).second) continue;

      // fragment-wise verification against the unit text
      for (const Fragment& f : e.fragments) {
        require(f.end <= map.length(), ErrorKind::Range,
                "split_merged_cells: fragment beyond text end in " + prop.text_id);
      }
      const std::string expected = fragments_surface(e.fragments, input.unit->text, map);
      check_contract(expected == e.surface,
                     "split_merged_cells: surface does not match text for entity " + e.id +
                         " of " + prop.text_id);

      CellEvent event;
      event.role = e.label == Label::Cause ? "cause" : "effect";
      event.fragments = e.fragments;
      event.surface = e.surface;
      prop.events.push_back(std::move(event));
      (e.label == Label::Cause ? prop.cause_events : prop.effect_events) += 1;
    }
    if (prop.events.empty()) continue;
    prop.split_recommended = prop.cause_events > 1 || prop.effect_events > 1;
    for (const auto& [rel_id, conf] : input.relation_confidence)
      prop.confidence = std::min(prop.confidence, conf);
    proposals.push_back(std::move(prop));
  }
  return proposals;
}

Json split_proposals_json(const std::vector<CellSplitProposal>& proposals) {
  Json doc;
  doc["schema"] = "causalkit-splits-v1";
  Json list = Json::array();
  for (const CellSplitProposal& p : proposals) {
    Json events = Json::array();
    for (const CellEvent& e : p.events) {
      Json frags = Json::array();
      for (const Fragment& f : e.fragments) frags.push_back({f.begin, f.end});
      events.push_back({{"role", e.role}, {"fragments", frags}, {"surface", e.surface}});
    }
    list.push_back({{"text_id", p.text_id},
                    {"events", events},
                    {"cause_events", p.cause_events},
                    {"effect_events", p.effect_events},
                    {"split_recommended", p.split_recommended},
                    {"confidence", p.confidence}});
  }
  doc["proposals"] = list;
  return doc;
}

}  // namespace causalkit
