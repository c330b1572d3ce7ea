#pragma once

// Twelve crafted texts, one per annotation guideline. Each carries the
// annotations an annotator following the guidelines would produce — or, for
// the machine-checkable rules 1 and 6, annotations that break exactly that
// rule — plus the exact violation set the checker must report.
//
// Offsets are never written by hand: every fragment is located by substring
// search, so a fixture typo throws at construction instead of silently
// shifting spans.

#include <string>
#include <utility>
#include <vector>

#include "support.hpp"

namespace testsupport {

// (rule_id, ids) pairs; message text is not part of the contract.
using ExpectedViolations = std::vector<std::pair<int, std::vector<std::string>>>;

struct GuidelineFixture {
  int rule_id = 0;
  std::string name;
  std::string text;
  std::vector<EntitySpec> entities;
  std::vector<RelationSpec> relations;
  ExpectedViolations expected;

  AnnotationSet build() const { return build_set(text, entities, relations, name, "a1"); }
};

inline std::vector<GuidelineFixture> guideline_fixtures() {
  using E = EntitySpec;
  using R = RelationSpec;
  std::vector<GuidelineFixture> out;

  // Rule 1: relations must stay within one text. A relation whose argument
  // does not resolve in this set is the one machine-checkable breach.
  out.push_back({1,
                 "g01",
                 "Cracks due to voids.",
                 {E{"T1", Label::Effect, {{"Cracks"}}},
                  E{"T2", Label::Trigger, {{"due to"}}},
                  E{"T3", Label::Cause, {{"voids"}}}},
                 {R{"R1", RelationType::CauseOf, "T3", "T2"},
                  R{"R2", RelationType::LeadsTo, "T2", "T1"},
                  R{"R3", RelationType::LeadsTo, "T2", "T9"}},
                 {{1, {"R3", "T9"}}}});

  // Rule 2: annotate full causes and effects, not head words.
  out.push_back({2,
                 "g02",
                 "Die chipping/crack due to dicing process condition/parameters and "
                 "the wafer condition in kerf area",
                 {E{"T1", Label::Effect, {{"Die chipping/crack"}}},
                  E{"T2", Label::Trigger, {{"due to"}}},
                  E{"T3",
                    Label::Cause,
                    {{"dicing process condition/parameters and the wafer condition in "
                      "kerf area"}}}},
                 {R{"R1", RelationType::CauseOf, "T3", "T2"},
                  R{"R2", RelationType::LeadsTo, "T2", "T1"}},
                 {}});

  // Rule 3: chains annotate each link; the middle clause is both the first
  // effect and, as a separate co-extensive entity, the second cause.
  out.push_back({3,
                 "g03",
                 "Due to a wrong implantation dose, the compensation was destroyed, "
                 "and therefore, the lot was disregarded.",
                 {E{"T1", Label::Trigger, {{"Due to"}}},
                  E{"T2", Label::Cause, {{"a wrong implantation dose"}}},
                  E{"T3", Label::Effect, {{"the compensation was destroyed"}}},
                  E{"T4", Label::Cause, {{"the compensation was destroyed"}}},
                  E{"T5", Label::Trigger, {{"therefore"}}},
                  E{"T6", Label::Effect, {{"the lot was disregarded."}}}},
                 {R{"R1", RelationType::CauseOf, "T2", "T1"},
                  R{"R2", RelationType::LeadsTo, "T1", "T3"},
                  R{"R3", RelationType::CauseOf, "T4", "T5"},
                  R{"R4", RelationType::LeadsTo, "T5", "T6"}},
                 {}});

  // Rule 4: nested relations are annotated at both levels.
  out.push_back({4,
                 "g04",
                 "Foreign material or residue does not cause failure at wafer test "
                 "due to thin isolation, inhibiting leakage current.",
                 {E{"T1",
                    Label::Effect,
                    {{"Foreign material or residue does not cause failure at wafer "
                      "test"}}},
                  E{"T2", Label::Trigger, {{"due to"}}},
                  E{"T3", Label::Cause, {{"thin isolation, inhibiting leakage current"}}},
                  E{"T4", Label::Cause, {{"thin isolation"}}},
                  E{"T5", Label::Trigger, {{"inhibiting"}}},
                  E{"T6", Label::Effect, {{"leakage current"}}}},
                 {R{"R1", RelationType::CauseOf, "T3", "T2"},
                  R{"R2", RelationType::LeadsTo, "T2", "T1"},
                  R{"R3", RelationType::CauseOf, "T4", "T5"},
                  R{"R4", RelationType::LeadsTo, "T5", "T6"}},
                 {}});

  // Rule 5: discontinuous arguments use multiple fragments; here the effect
  // is split around the trigger "thus".
  out.push_back({5,
                 "g05",
                 "Due to a wrong implantation dose, the compensation was destroyed, "
                 "and the lot was thus disregarded.",
                 {E{"T1",
                    Label::Cause,
                    {{"Due to a wrong implantation dose, the compensation was "
                      "destroyed"}}},
                  E{"T2", Label::Effect, {{"the lot was"}, {"disregarded"}}},
                  E{"T3", Label::Trigger, {{"thus"}}}},
                 {R{"R1", RelationType::CauseOf, "T1", "T3"},
                  R{"R2", RelationType::LeadsTo, "T3", "T2"}},
                 {}});

  // Rule 6: every annotated entity takes part in a complete relation pair.
  // Dropping LEADS_TO leaves the trigger without an effect and the effect
  // unlinked — two violations, nothing else.
  out.push_back({6,
                 "g06",
                 "Particle contamination leads to leakage current.",
                 {E{"T1", Label::Cause, {{"Particle contamination"}}},
                  E{"T2", Label::Trigger, {{"leads to"}}},
                  E{"T3", Label::Effect, {{"leakage current"}}}},
                 {R{"R1", RelationType::CauseOf, "T1", "T2"}},
                 {{6, {"T2"}}, {6, {"T3"}}}});

  // Rule 7: spans sit on word boundaries.
  out.push_back({7,
                 "g07",
                 "Overheating due to fan failure.",
                 {E{"T1", Label::Effect, {{"Overheating"}}},
                  E{"T2", Label::Trigger, {{"due to"}}},
                  E{"T3", Label::Cause, {{"fan failure"}}}},
                 {R{"R1", RelationType::CauseOf, "T3", "T2"},
                  R{"R2", RelationType::LeadsTo, "T2", "T1"}},
                 {}});

  // Rule 8: lexical causatives (verbs like "is cracking") carry the causal
  // meaning themselves and are left unannotated.
  out.push_back({8,
                 "g08",
                 "Electrical and mechanical stress at application environment is "
                 "cracking the isolation layer between defect and conductive line.",
                 {},
                 {},
                 {}});

  // Rule 9: correlation-only statements are left unannotated.
  out.push_back({9,
                 "g09",
                 "The failure rate is linked to the ambient humidity.",
                 {},
                 {},
                 {}});

  // Rule 10: hedged causal statements are annotated, hedge inside the trigger.
  out.push_back({10,
                 "g10",
                 "Scratches at Wafer BS, most probably due to particles.",
                 {E{"T1", Label::Effect, {{"Scratches at Wafer BS"}}},
                  E{"T2", Label::Trigger, {{"most probably due to"}}},
                  E{"T3", Label::Cause, {{"particles"}}}},
                 {R{"R1", RelationType::CauseOf, "T3", "T2"},
                  R{"R2", RelationType::LeadsTo, "T2", "T1"}},
                 {}});

  // Rule 11: future or merely possible causal statements are annotated too.
  out.push_back({11,
                 "g11",
                 "Continued moisture ingress will lead to pad corrosion.",
                 {E{"T1", Label::Cause, {{"Continued moisture ingress"}}},
                  E{"T2", Label::Trigger, {{"will lead to"}}},
                  E{"T3", Label::Effect, {{"pad corrosion"}}}},
                 {R{"R1", RelationType::CauseOf, "T1", "T2"},
                  R{"R2", RelationType::LeadsTo, "T2", "T3"}},
                 {}});

  // Rule 12: relative pronouns standing for an argument join its span.
  out.push_back({12,
                 "g12",
                 "There is a QMP regarding edge damage which could cause the flying "
                 "dies.",
                 {E{"T1", Label::Cause, {{"edge damage which"}}},
                  E{"T2", Label::Trigger, {{"could cause"}}},
                  E{"T3", Label::Effect, {{"the flying dies"}}}},
                 {R{"R1", RelationType::CauseOf, "T1", "T2"},
                  R{"R2", RelationType::LeadsTo, "T2", "T3"}},
                 {}});

  return out;
}

// Normalized view for order-insensitive comparison.
inline ExpectedViolations violation_keys(const std::vector<causalkit::Violation>& vs) {
  ExpectedViolations keys;
  for (const causalkit::Violation& v : vs) keys.emplace_back(v.rule_id, v.ids);
  std::sort(keys.begin(), keys.end());
  return keys;
}

inline ExpectedViolations sorted(ExpectedViolations keys) {
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace testsupport
