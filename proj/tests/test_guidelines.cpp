#include <algorithm>
#include <string>
#include <vector>

#include "causalkit/annotation.hpp"
#include "doctest.h"
#include "guideline_fixtures.hpp"
#include "support.hpp"

using namespace causalkit;
using namespace testsupport;

TEST_SUITE_BEGIN("guidelines");

TEST_CASE("catalog lists twelve rules; exactly 1, 5 and 6 are machine-checked") {
  const auto& catalog = guideline_catalog();
  REQUIRE(catalog.size() == 12);
  for (size_t i = 0; i < catalog.size(); ++i) {
    CHECK(catalog[i].rule_id == static_cast<int>(i) + 1);
    bool expect_checked = catalog[i].rule_id == 1 || catalog[i].rule_id == 5 || catalog[i].rule_id == 6;
    CHECK(catalog[i].machine_checked == expect_checked);
    CHECK(std::string(catalog[i].summary).size() > 0);
  }
}

TEST_CASE("each guideline fixture yields exactly its expected violations") {
  auto fixtures = guideline_fixtures();
  REQUIRE(fixtures.size() == 12);
  for (const auto& fx : fixtures) {
    CAPTURE(fx.name);
    AnnotationSet set = fx.build();
    auto got = violation_keys(validate_guidelines(set, fx.text));
    CHECK(got == sorted(fx.expected));
  }
}

TEST_CASE("fixture rule ids cover guidelines 1 through 12 in order") {
  auto fixtures = guideline_fixtures();
  for (size_t i = 0; i < fixtures.size(); ++i) CHECK(fixtures[i].rule_id == static_cast<int>(i) + 1);
}

TEST_CASE("valid fixtures survive a serialize/parse/validate round trip") {
  for (const auto& fx : guideline_fixtures()) {
    if (!fx.expected.empty()) continue;  // invalid sets are built, not parsed
    CAPTURE(fx.name);
    AnnotationSet set = fx.build();
    AnnotationSet back = parse_standoff(serialize_standoff(set), fx.text, fx.name, "a1");
    CHECK(back.same_content(set));
    CHECK(validate_guidelines(back, fx.text).empty());
  }
}

TEST_CASE("rule 5 fires for every kind of malformed fragment") {
  const std::string text = "abcdef ghij";

  auto entity = [](std::string id, std::vector<Fragment> frags, std::string surface) {
    Entity e;
    e.id = std::move(id);
    e.label = Label::Cause;
    e.fragments = std::move(frags);
    e.surface = std::move(surface);
    return e;
  };

  AnnotationSet set;
  set.entities.push_back(entity("T1", {}, ""));                       // no fragments
  set.entities.push_back(entity("T2", {{3, 3}}, ""));                 // empty
  set.entities.push_back(entity("T3", {{4, 2}}, ""));                 // inverted
  set.entities.push_back(entity("T4", {{0, 99}}, "abcdef ghij"));     // beyond end
  set.entities.push_back(entity("T5", {{0, 4}, {2, 6}}, "abcd cdef"));  // overlap
  set.entities.push_back(entity("T6", {{4, 6}, {0, 2}}, "ef ab"));    // unsorted
  set.entities.push_back(entity("T7", {{0, 3}}, "xyz"));              // surface mismatch
  set.entities.push_back(entity("T8", {{0, 3}, {7, 11}}, "abc ghij"));  // fine bar rule 6

  auto violations = validate_guidelines(set, text);
  ExpectedViolations keys = violation_keys(violations);
  ExpectedViolations rule5(keys.begin(),
                           std::partition_point(keys.begin(), keys.end(),
                                                [](const auto& k) { return k.first < 6; }));
  CHECK(rule5 == ExpectedViolations{{5, {"T1"}},
                                    {5, {"T2"}},
                                    {5, {"T3"}},
                                    {5, {"T4"}},
                                    {5, {"T5"}},
                                    {5, {"T6"}},
                                    {5, {"T7"}}});
  // T8 is well-formed, so its only complaint is the missing relation (rule 6).
  bool t8_rule5 = false;
  for (const auto& k : keys)
    if (k.first == 5 && k.second == std::vector<std::string>{"T8"}) t8_rule5 = true;
  CHECK_FALSE(t8_rule5);
}

TEST_CASE("rule 6 fires for mistyped relation arguments") {
  const std::string text = "Cracks due to voids.";
  // Swapped: CAUSE_OF gets the effect as Arg1, LEADS_TO gets the cause as Arg2.
  AnnotationSet set = build_set(text,
                                {{"T1", Label::Effect, {{"Cracks"}}},
                                 {"T2", Label::Trigger, {{"due to"}}},
                                 {"T3", Label::Cause, {{"voids"}}}},
                                {{"R1", RelationType::CauseOf, "T1", "T2"},
                                 {"R2", RelationType::LeadsTo, "T2", "T3"}});
  auto keys = violation_keys(validate_guidelines(set, text));
  // R1 Arg1 must be a Cause (is Effect); R2 Arg2 must be an Effect (is Cause);
  // then both mislinked entities lack their complete relation.
  CHECK(keys == sorted(ExpectedViolations{{6, {"R1", "T1"}},
                                          {6, {"R2", "T3"}},
                                          {6, {"T1"}},
                                          {6, {"T3"}}}));
}

TEST_CASE("a trigger with neither argument reports a single combined violation") {
  const std::string text = "due to";
  AnnotationSet set = build_set(text, {{"T1", Label::Trigger, {{"due to"}}}}, {});
  auto violations = validate_guidelines(set, text);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].rule_id == 6);
  CHECK(violations[0].ids == std::vector<std::string>{"T1"});
  CHECK(violations[0].message.find("cause and an effect") != std::string::npos);
}

TEST_CASE("co-extensive chained entities and nested relations are never flagged") {
  for (const auto& fx : guideline_fixtures()) {
    if (fx.rule_id != 3 && fx.rule_id != 4) continue;
    AnnotationSet set = fx.build();
    CHECK(validate_guidelines(set, fx.text).empty());
  }
}

TEST_SUITE_END();
