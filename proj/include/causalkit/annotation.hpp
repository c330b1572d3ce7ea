#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace causalkit {

enum class Label { Cause, Effect, Trigger };
inline constexpr int kNumLabels = 3;

const char* label_name(Label l);
Label label_from(const std::string& name);

// CAUSE_OF links a Cause (arg1) to its Trigger (arg2); LEADS_TO links a
// Trigger (arg1) to its Effect (arg2).
enum class RelationType { CauseOf, LeadsTo };

const char* relation_type_name(RelationType t);
RelationType relation_type_from(const std::string& name);

// Code-point span over normalized text, end exclusive.
struct Fragment {
  uint32_t begin = 0;
  uint32_t end = 0;

  bool operator==(const Fragment&) const = default;
  auto operator<=>(const Fragment&) const = default;
};

// A possibly discontinuous span. Fragments are sorted, non-overlapping and
// non-empty; surface is the fragment texts joined by a single space.
struct Entity {
  std::string id;  // "T<n>"
  Label label = Label::Cause;
  std::vector<Fragment> fragments;
  std::string surface;

  uint32_t first_begin() const { return fragments.empty() ? 0 : fragments.front().begin; }
  bool operator==(const Entity&) const = default;
};

struct Relation {
  std::string id;  // "R<n>"
  RelationType type = RelationType::CauseOf;
  std::string arg1;
  std::string arg2;

  bool operator==(const Relation&) const = default;
};

struct AnnotationSet {
  std::string text_id;
  std::string annotator_id;
  std::vector<Entity> entities;
  std::vector<Relation> relations;

  const Entity* find_entity(const std::string& id) const;
  bool same_content(const AnnotationSet& o) const {
    return entities == o.entities && relations == o.relations;
  }
};

// One fired annotation-guideline check. rule_id is the 1-based number of the
// guideline; rules 7-12 are annotator-facing judgement calls that the
// machine checker never fires (see guideline_catalog).
struct Violation {
  int rule_id = 0;
  std::string message;
  std::vector<std::string> ids;  // offending entity/relation ids

  bool operator==(const Violation&) const = default;
};

struct GuidelineInfo {
  int rule_id;
  bool machine_checked;
  const char* summary;
};

const std::vector<GuidelineInfo>& guideline_catalog();

// Standoff grammar (one record per '\n'-terminated line, UTF-8, offsets in
// code points of the normalized base text):
//   T<n> \t <Label> <start> <end>(;<start> <end>)* \t <surface>
//   R<n> \t <Type> Arg1:T<a> Arg2:T<b>
// Malformed lines raise Parse errors with the line number, offsets beyond the
// text raise Range errors, surface mismatches and dangling references raise
// Integrity errors.
AnnotationSet parse_standoff(const std::string& ann_text, const std::string& base_text,
                             const std::string& text_id = "", const std::string& annotator_id = "");

// Inverse of parse_standoff: entities in id order then relations in id order,
// '\n' line endings. parse(serialize(s)) == s for any valid set.
std::string serialize_standoff(const AnnotationSet& set);

// Machine-checkable guideline checks: relation arguments resolve within this
// text's set (rule 1), fragments are well-formed spans of the text (rule 5),
// relation argument labels are correctly typed and every annotated entity is
// part of a complete cause-trigger-effect relation (rule 6). Chained
// (co-extensive) and nested entities are valid and never flagged.
std::vector<Violation> validate_guidelines(const AnnotationSet& set, const std::string& text);

}  // namespace causalkit
