#include "causalkit/annotation.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "causalkit/errors.hpp"
#include "causalkit/utf8.hpp"

namespace causalkit {

const char* label_name(Label l) {
  switch (l) {
    case Label::Cause: return "Cause";
    case Label::Effect: return "Effect";
    case Label::Trigger: return "Trigger";
  }
  return "?";
}

Label label_from(const std::string& name) {
  if (name == "Cause") return Label::Cause;
  if (name == "Effect") return Label::Effect;
  if (name == "Trigger") return Label::Trigger;
  fail(ErrorKind::Parse, "unknown entity label: '" + name + "'");
}

const char* relation_type_name(RelationType t) {
  return t == RelationType::CauseOf ? "CAUSE_OF" : "LEADS_TO";
}

RelationType relation_type_from(const std::string& name) {
  if (name == "CAUSE_OF") return RelationType::CauseOf;
  if (name == "LEADS_TO") return RelationType::LeadsTo;
  fail(ErrorKind::Parse, "unknown relation type: '" + name + "'");
}

const Entity* AnnotationSet::find_entity(const std::string& id) const {
  for (const Entity& e : entities)
    if (e.id == id) return &e;
  return nullptr;
}

const std::vector<GuidelineInfo>& guideline_catalog() {
  static const std::vector<GuidelineInfo> kCatalog = {
      {1, true, "relation arguments must resolve within the same text unit"},
      {2, false, "several counterpart mentions of one relation are annotated as a single entity where possible"},
      {3, false, "chained relations are annotated with co-extensive effect/cause entities"},
      {4, false, "nested relations are annotated in full"},
      {5, true, "entities may be discontinuous; every fragment must be a well-formed span of the text"},
      {6, true, "entities are annotated only as part of a complete cause-trigger-effect relation with correctly typed arguments"},
      {7, false, "no annotations inside words"},
      {8, false, "lexical causatives are not annotated as triggers"},
      {9, false, "vague associative phrasing is not annotated"},
      {10, false, "hedged or uncertain causality is annotated"},
      {11, false, "future or predicted causality is annotated"},
      {12, false, "relative pronouns standing for the cause belong to the cause entity"},
  };
  return kCatalog;
}

namespace {

struct LineCursor {
  const std::string& s;
  size_t pos = 0;
  int line_no;

  [[noreturn]] void bad(const std::string& why) const {
    fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + why);
  }

  bool done() const { return pos >= s.size(); }
  char peek() const { return s[pos]; }

  void expect(char c, const char* what) {
    if (done() || s[pos] != c) bad(std::string("expected ") + what);
    ++pos;
  }

  std::string until(char stop) {
    const size_t e = s.find(stop, pos);
    if (e == std::string::npos) bad(std::string("expected '") + stop + "'");
    std::string r = s.substr(pos, e - pos);
    pos = e + 1;
    return r;
  }

  uint32_t number() {
    if (done() || s[pos] < '0' || s[pos] > '9') bad("expected a number");
    uint64_t v = 0;
    while (!done() && s[pos] >= '0' && s[pos] <= '9') {
      v = v * 10 + static_cast<uint64_t>(s[pos] - '0');
      if (v > 0xFFFFFFFFull) bad("number out of range");
      ++pos;
    }
    return static_cast<uint32_t>(v);
  }

  std::string rest() { return s.substr(pos); }
};

long id_number(const std::string& id) {
  // ids look like T<n>/R<n>; returns n or -1 when malformed
  if (id.size() < 2) return -1;
  long v = 0;
  for (size_t i = 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return -1;
    v = v * 10 + (id[i] - '0');
  }
  return v;
}

std::string check_id(LineCursor& cur, char prefix) {
  std::string id = cur.until('\t');
  if (id.empty() || id[0] != prefix || id_number(id) < 0)
    cur.bad(std::string("malformed id '") + id + "'");
  return id;
}

std::string arg_ref(LineCursor& cur, const char* tag, char stop) {
  const std::string prefix = std::string(tag) + ":";
  for (const char c : prefix) cur.expect(c, tag);
  std::string id;
  while (!cur.done() && cur.peek() != stop) {
    id.push_back(cur.peek());
    ++cur.pos;
  }
  if (id.empty() || id[0] != 'T' || id_number(id) < 0)
    cur.bad(std::string(tag) + " must reference an entity id, got '" + id + "'");
  return id;
}

std::string joined_surface(const std::string& text, const Utf8Map& map, const std::vector<Fragment>& frags) {
  std::string s;
  for (size_t i = 0; i < frags.size(); ++i) {
    if (i) s.push_back(' ');
    s += utf8_slice(text, map, frags[i].begin, frags[i].end);
  }
  return s;
}

}  // namespace

AnnotationSet parse_standoff(const std::string& ann_text, const std::string& base_text,
                             const std::string& text_id, const std::string& annotator_id) {
  const Utf8Map map = utf8_index(base_text);
  const uint32_t text_len = static_cast<uint32_t>(map.length());

  AnnotationSet set;
  set.text_id = text_id;
  set.annotator_id = annotator_id;
  std::set<std::string> seen_ids;

  int line_no = 0;
  size_t start = 0;
  while (start <= ann_text.size()) {
    size_t nl = ann_text.find('\n', start);
    if (nl == std::string::npos) nl = ann_text.size();
    const std::string line = ann_text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.empty()) continue;

    LineCursor cur{line, 0, line_no};
    if (line[0] == 'T') {
      Entity e;
      e.id = check_id(cur, 'T');
      e.label = [&] {
        const std::string name = cur.until(' ');
        try {
          return label_from(name);
        } catch (const Error&) {
          cur.bad("unknown entity label '" + name + "'");
        }
      }();
      // offset list: start end(;start end)*
      while (true) {
        Fragment f;
        f.begin = cur.number();
        cur.expect(' ', "' ' between offsets");
        f.end = cur.number();
        if (f.begin >= f.end) cur.bad("empty or inverted fragment " + std::to_string(f.begin) + " " + std::to_string(f.end));
        if (f.end > text_len)
          fail(ErrorKind::Range, "line " + std::to_string(line_no) + ": fragment end " +
                                     std::to_string(f.end) + " beyond text length " + std::to_string(text_len));
        if (!e.fragments.empty() && f.begin < e.fragments.back().end)
          cur.bad("fragments must be sorted and non-overlapping");
        e.fragments.push_back(f);
        if (cur.done()) cur.bad("expected '\\t' before surface");
        if (cur.peek() == ';') {
          ++cur.pos;
          continue;
        }
        break;
      }
      cur.expect('\t', "'\\t' before surface");
      e.surface = cur.rest();
      const std::string expect_surface = joined_surface(base_text, map, e.fragments);
      if (e.surface != expect_surface)
        fail(ErrorKind::Integrity, "line " + std::to_string(line_no) + ": surface '" + e.surface +
                                       "' does not match text '" + expect_surface + "'");
      if (!seen_ids.insert(e.id).second)
        fail(ErrorKind::Integrity, "line " + std::to_string(line_no) + ": duplicate id " + e.id);
      set.entities.push_back(std::move(e));
    } else if (line[0] == 'R') {
      Relation r;
      r.id = check_id(cur, 'R');
      const std::string type = cur.until(' ');
      try {
        r.type = relation_type_from(type);
      } catch (const Error&) {
        cur.bad("unknown relation type '" + type + "'");
      }
      r.arg1 = arg_ref(cur, "Arg1", ' ');
      cur.expect(' ', "' ' between arguments");
      r.arg2 = arg_ref(cur, "Arg2", '\n');
      if (!cur.done()) cur.bad("trailing characters after Arg2");
      if (!seen_ids.insert(r.id).second)
        fail(ErrorKind::Integrity, "line " + std::to_string(line_no) + ": duplicate id " + r.id);
      set.relations.push_back(std::move(r));
    } else {
      cur.bad("unknown record type '" + line.substr(0, 1) + "' (expected T or R)");
    }
  }

  for (const Relation& r : set.relations)
    for (const std::string* arg : {&r.arg1, &r.arg2})
      if (!set.find_entity(*arg))
        fail(ErrorKind::Integrity, "relation " + r.id + " references missing entity " + *arg);

  return set;
}

std::string serialize_standoff(const AnnotationSet& set) {
  std::vector<const Entity*> ents;
  for (const Entity& e : set.entities) ents.push_back(&e);
  std::stable_sort(ents.begin(), ents.end(),
                   [](const Entity* a, const Entity* b) { return id_number(a->id) < id_number(b->id); });
  std::vector<const Relation*> rels;
  for (const Relation& r : set.relations) rels.push_back(&r);
  std::stable_sort(rels.begin(), rels.end(),
                   [](const Relation* a, const Relation* b) { return id_number(a->id) < id_number(b->id); });

  std::string out;
  for (const Entity* e : ents) {
    out += e->id;
    out.push_back('\t');
    out += label_name(e->label);
    for (size_t i = 0; i < e->fragments.size(); ++i) {
      out += i == 0 ? " " : ";";
      out += std::to_string(e->fragments[i].begin);
      out.push_back(' ');
      out += std::to_string(e->fragments[i].end);
    }
    out.push_back('\t');
    out += e->surface;
    out.push_back('\n');
  }
  for (const Relation* r : rels) {
    out += r->id;
    out.push_back('\t');
    out += relation_type_name(r->type);
    out += " Arg1:" + r->arg1 + " Arg2:" + r->arg2;
    out.push_back('\n');
  }
  return out;
}

std::vector<Violation> validate_guidelines(const AnnotationSet& set, const std::string& text) {
  const Utf8Map map = utf8_index(text);
  const uint32_t text_len = static_cast<uint32_t>(map.length());
  std::vector<Violation> out;

  std::map<std::string, const Entity*> by_id;
  for (const Entity& e : set.entities) by_id[e.id] = &e;

  // rule 5: fragment well-formedness
  for (const Entity& e : set.entities) {
    std::string why;
    if (e.fragments.empty()) {
      why = "has no fragments";
    } else {
      for (size_t i = 0; i < e.fragments.size() && why.empty(); ++i) {
        const Fragment& f = e.fragments[i];
        if (f.begin >= f.end)
          why = "fragment " + std::to_string(f.begin) + ".." + std::to_string(f.end) + " is empty or inverted";
        else if (f.end > text_len)
          why = "fragment end " + std::to_string(f.end) + " beyond text length " + std::to_string(text_len);
        else if (i > 0 && f.begin < e.fragments[i - 1].end)
          why = "fragments overlap or are unsorted";
      }
    }
    if (why.empty()) {
      std::string expect;
      for (size_t i = 0; i < e.fragments.size(); ++i) {
        if (i) expect.push_back(' ');
        expect += utf8_slice(text, map, e.fragments[i].begin, e.fragments[i].end);
      }
      if (e.surface != expect) why = "surface does not match the text under its fragments";
    }
    if (!why.empty()) out.push_back({5, "entity " + e.id + " " + why, {e.id}});
  }

  // rule 1: arguments resolve within this text's set
  for (const Relation& r : set.relations)
    for (const std::string* arg : {&r.arg1, &r.arg2})
      if (!by_id.count(*arg))
        out.push_back({1, "relation " + r.id + " references entity " + *arg + " outside this text", {r.id, *arg}});

  // rule 6a: argument typing
  for (const Relation& r : set.relations) {
    const auto it1 = by_id.find(r.arg1);
    const auto it2 = by_id.find(r.arg2);
    if (it1 == by_id.end() || it2 == by_id.end()) continue;  // rule 1 already fired
    const Label l1 = it1->second->label;
    const Label l2 = it2->second->label;
    const Label want1 = r.type == RelationType::CauseOf ? Label::Cause : Label::Trigger;
    const Label want2 = r.type == RelationType::CauseOf ? Label::Trigger : Label::Effect;
    if (l1 != want1)
      out.push_back({6,
                     "relation " + r.id + " (" + relation_type_name(r.type) + ") Arg1 must be a " +
                         label_name(want1) + " but " + r.arg1 + " is a " + label_name(l1),
                     {r.id, r.arg1}});
    if (l2 != want2)
      out.push_back({6,
                     "relation " + r.id + " (" + relation_type_name(r.type) + ") Arg2 must be a " +
                         label_name(want2) + " but " + r.arg2 + " is an " + label_name(l2),
                     {r.id, r.arg2}});
  }

  // rule 6b: every entity takes part in a complete relation
  for (const Entity& e : set.entities) {
    bool ok = false;
    switch (e.label) {
      case Label::Cause:
        for (const Relation& r : set.relations)
          ok = ok || (r.type == RelationType::CauseOf && r.arg1 == e.id);
        if (!ok) out.push_back({6, "cause " + e.id + " is not linked to any trigger", {e.id}});
        break;
      case Label::Effect:
        for (const Relation& r : set.relations)
          ok = ok || (r.type == RelationType::LeadsTo && r.arg2 == e.id);
        if (!ok) out.push_back({6, "effect " + e.id + " is not linked to any trigger", {e.id}});
        break;
      case Label::Trigger: {
        bool has_cause = false, has_effect = false;
        for (const Relation& r : set.relations) {
          has_cause = has_cause || (r.type == RelationType::CauseOf && r.arg2 == e.id);
          has_effect = has_effect || (r.type == RelationType::LeadsTo && r.arg1 == e.id);
        }
        if (!has_cause || !has_effect)
          out.push_back({6,
                         "trigger " + e.id + " lacks " +
                             (!has_cause && !has_effect ? "a cause and an effect"
                              : !has_cause              ? "a cause"
                                                        : "an effect"),
                         {e.id}});
        break;
      }
    }
  }

  return out;
}

}  // namespace causalkit
