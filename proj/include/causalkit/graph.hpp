#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "causalkit/annotation.hpp"
#include "causalkit/corpus.hpp"
#include "causalkit/io.hpp"
#include "causalkit/mst.hpp"
#include "causalkit/text.hpp"

namespace causalkit {

// Token-level predictions turned back into standoff entities and relations.
// Contiguous token runs become fragments; each relation contributes one
// Cause/Trigger/Effect triple linked by CAUSE_OF and LEADS_TO.
struct DecodedAnnotations {
  AnnotationSet set;
  std::map<std::string, double> relation_confidence;  // relation id -> min stage score
};

DecodedAnnotations decode_mst_prediction(const std::string& text_id, const std::string& text,
                                         const std::vector<Token>& tokens,
                                         const MstPrediction& pred);

// Entities only (one per contiguous labeled run); the single-stage tagger does
// not predict which spans belong together, so no relations are emitted.
AnnotationSet decode_sst_prediction(const std::string& text_id, const std::string& text,
                                    const std::vector<Token>& tokens,
                                    const std::array<std::vector<uint8_t>, kNumLabels>& bits);

struct GraphNode {
  std::string id;  // "<text_id>:<first offset>", "#k" appended on collisions
  std::string text_id;
  std::string role;  // "cause" | "effect" | "both"
  std::vector<Fragment> fragments;
  std::string surface;
};

struct GraphEdge {
  std::string from, to;  // cause node -> effect node
  std::string text_id;
  std::vector<Fragment> trigger_fragments;
  std::string trigger_surface;
  double confidence = 1.0;
};

struct CausalGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
};

struct GraphInput {
  const TextUnit* unit = nullptr;
  const AnnotationSet* ann = nullptr;
  std::map<std::string, double> relation_confidence;  // by relation id; absent -> 1.0
};

// One node per distinct (text, fragments) span; co-extensive cause and effect
// spans collapse into a single chain node with role "both".
CausalGraph build_graph(const std::vector<GraphInput>& inputs);

Json graph_json(const CausalGraph& graph);

struct CellEvent {
  std::string role;  // "cause" | "effect"
  std::vector<Fragment> fragments;
  std::string surface;
};

// A table cell (or text box) whose annotation mentions several distinct events
// of the same role is a candidate for splitting into separate rows.
struct CellSplitProposal {
  std::string text_id;
  std::vector<CellEvent> events;
  int cause_events = 0;
  int effect_events = 0;
  bool split_recommended = false;
  double confidence = 1.0;  // min confidence over contributing relations
};

std::vector<CellSplitProposal> split_merged_cells(const std::vector<GraphInput>& inputs);

Json split_proposals_json(const std::vector<CellSplitProposal>& proposals);

}  // namespace causalkit
