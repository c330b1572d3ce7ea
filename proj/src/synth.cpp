#include "causalkit/synth.hpp"

#include <cstdio>
#include <functional>

#include "causalkit/dataset.hpp"
#include "causalkit/errors.hpp"
#include "causalkit/rng.hpp"

namespace causalkit {

namespace {

// All phrases are ASCII, so code-point offsets equal byte offsets.
const std::vector<std::string> kPhrases = {
    "wafer cracking",        "die chipping",          "leakage current",
    "thin isolation",        "particle contamination", "edge damage",
    "humidity residues",     "implantation dose drift", "overlay misalignment",
    "resist peeling",        "metal bridging",        "void formation",
    "delamination",          "pad corrosion",         "broken bond wires",
    "backside scratches",    "mask defects",          "charge buildup",
    "etch undercut",         "blade wear",            "seal ring damage",
    "moisture ingress",      "solder fatigue",        "probe mark damage",
};

struct Builder {
  std::string text;

  void plain(const std::string& s) { text += s; }
  Fragment phrase(const std::string& s) {
    const auto begin = static_cast<uint32_t>(text.size());
    text += s;
    return Fragment{begin, static_cast<uint32_t>(text.size())};
  }
};

Entity make_entity(int id, Label label, std::vector<Fragment> fragments, const std::string& text) {
  Entity e;
  e.id = "T" + std::to_string(id);
  e.label = label;
  std::string surface;
  for (size_t i = 0; i < fragments.size(); ++i) {
    if (i > 0) surface += ' ';
    surface += text.substr(fragments[i].begin, fragments[i].end - fragments[i].begin);
  }
  e.fragments = std::move(fragments);
  e.surface = std::move(surface);
  return e;
}

Relation make_relation(int id, RelationType type, int arg1, int arg2) {
  return Relation{"R" + std::to_string(id), type, "T" + std::to_string(arg1),
                  "T" + std::to_string(arg2)};
}

struct Generated {
  std::string text;
  AnnotationSet ann;  // text_id filled by the caller
};

using TemplateFn = std::function<Generated(Rng&)>;

std::string pick(Rng& rng) { return kPhrases[rng.below(kPhrases.size())]; }

std::pair<std::string, std::string> pick2(Rng& rng) {
  const std::string a = pick(rng);
  std::string b = pick(rng);
  while (b == a) b = pick(rng);
  return {a, b};
}

// One trigger linking one cause to one effect.
Generated simple_positive(Rng& rng, const std::string& before, const std::string& trigger_text,
                          const std::string& between, const std::string& tail, bool cause_first) {
  auto [first, second] = pick2(rng);
  Builder b;
  Generated g;
  b.plain(before);
  const Fragment f1 = b.phrase(first);
  b.plain(" ");
  const Fragment ft = b.phrase(trigger_text);
  b.plain(between);
  const Fragment f2 = b.phrase(second);
  b.plain(tail);
  g.text = b.text;
  const Fragment fc = cause_first ? f1 : f2;
  const Fragment fe = cause_first ? f2 : f1;
  g.ann.entities.push_back(make_entity(1, Label::Cause, {fc}, g.text));
  g.ann.entities.push_back(make_entity(2, Label::Trigger, {ft}, g.text));
  g.ann.entities.push_back(make_entity(3, Label::Effect, {fe}, g.text));
  g.ann.relations.push_back(make_relation(1, RelationType::CauseOf, 1, 2));
  g.ann.relations.push_back(make_relation(2, RelationType::LeadsTo, 2, 3));
  return g;
}

Generated negative_text(Rng& rng, const std::string& before, const std::string& middle,
                        const std::string& tail) {
  auto [first, second] = pick2(rng);
  Builder b;
  Generated g;
  b.plain(before);
  b.plain(first);
  b.plain(middle);
  b.plain(second);
  b.plain(tail);
  g.text = b.text;
  return g;
}

std::vector<TemplateFn> make_templates() {
  std::vector<TemplateFn> t;

  // forward: cause precedes the trigger
  t.push_back([](Rng& rng) { return simple_positive(rng, "", "causes", " ", ".", true); });
  t.push_back([](Rng& rng) { return simple_positive(rng, "", "results in", " ", ".", true); });
  t.push_back([](Rng& rng) { return simple_positive(rng, "", "leads to", " ", ".", true); });
  t.push_back([](Rng& rng) {
    return simple_positive(rng, "The analysis showed that ", "induces", " ", ".", true);
  });
  t.push_back([](Rng& rng) { return simple_positive(rng, "", "triggered", " ", ".", true); });
  t.push_back([](Rng& rng) {
    return simple_positive(rng, "", "resulted in", " ", " during final test.", true);
  });
  t.push_back([](Rng& rng) { return simple_positive(rng, "", "will lead to", " ", ".", true); });
  t.push_back([](Rng& rng) { return simple_positive(rng, "Repeated ", "produces", " ", ".", true); });
  // reversed: effect precedes the trigger
  t.push_back([](Rng& rng) { return simple_positive(rng, "", "due to", " ", ".", false); });
  t.push_back([](Rng& rng) { return simple_positive(rng, "", "is caused by", " ", ".", false); });
  t.push_back([](Rng& rng) {
    return simple_positive(rng, "We found ", "resulting from", " ", " here.", false);
  });
  t.push_back([](Rng& rng) {
    return simple_positive(rng, "", "was traced back to", " ", ".", false);
  });
  t.push_back([](Rng& rng) {
    return simple_positive(rng, "", "most probably due to", " ", ".", false);
  });
  t.push_back([](Rng& rng) {
    return simple_positive(rng, "We observed ", "owing to", " ", ".", false);
  });

  // sentence-initial trigger: "Due to {C}, {E}." / "Because of {C}, {E}."
  const auto initial_trigger = [](const std::string& trigger_text) {
    return [trigger_text](Rng& rng) {
      auto [c, e] = pick2(rng);
      Builder b;
      Generated g;
      const Fragment ft = b.phrase(trigger_text);
      b.plain(" ");
      const Fragment fc = b.phrase(c);
      b.plain(", ");
      const Fragment fe = b.phrase(e);
      b.plain(".");
      g.text = b.text;
      g.ann.entities.push_back(make_entity(1, Label::Trigger, {ft}, g.text));
      g.ann.entities.push_back(make_entity(2, Label::Cause, {fc}, g.text));
      g.ann.entities.push_back(make_entity(3, Label::Effect, {fe}, g.text));
      g.ann.relations.push_back(make_relation(1, RelationType::CauseOf, 2, 1));
      g.ann.relations.push_back(make_relation(2, RelationType::LeadsTo, 1, 3));
      return g;
    };
  };
  t.push_back(initial_trigger("Due to"));
  t.push_back(initial_trigger("Because of"));

  // chained: "Due to {A}, {B}, and therefore, {C}." with two trigger groups
  t.push_back([](Rng& rng) {
    const std::string a = pick(rng);
    std::string m = pick(rng);
    while (m == a) m = pick(rng);
    std::string c = pick(rng);
    while (c == a || c == m) c = pick(rng);
    Builder b;
    Generated g;
    const Fragment ft1 = b.phrase("Due to");
    b.plain(" ");
    const Fragment fa = b.phrase(a);
    b.plain(", ");
    const Fragment fm = b.phrase(m);
    b.plain(", and ");
    const Fragment ft2 = b.phrase("therefore");
    b.plain(", ");
    const Fragment fc = b.phrase(c);
    b.plain(".");
    g.text = b.text;
    g.ann.entities.push_back(make_entity(1, Label::Trigger, {ft1}, g.text));
    g.ann.entities.push_back(make_entity(2, Label::Cause, {fa}, g.text));
    g.ann.entities.push_back(make_entity(3, Label::Effect, {fm}, g.text));
    g.ann.entities.push_back(make_entity(4, Label::Cause, {fm}, g.text));
    g.ann.entities.push_back(make_entity(5, Label::Trigger, {ft2}, g.text));
    g.ann.entities.push_back(make_entity(6, Label::Effect, {fc}, g.text));
    g.ann.relations.push_back(make_relation(1, RelationType::CauseOf, 2, 1));
    g.ann.relations.push_back(make_relation(2, RelationType::LeadsTo, 1, 3));
    g.ann.relations.push_back(make_relation(3, RelationType::CauseOf, 4, 5));
    g.ann.relations.push_back(make_relation(4, RelationType::LeadsTo, 5, 6));
    return g;
  });

  // two coordinated causes sharing one trigger and effect
  t.push_back([](Rng& rng) {
    const std::string c1 = pick(rng);
    std::string c2 = pick(rng);
    while (c2 == c1) c2 = pick(rng);
    std::string e = pick(rng);
    while (e == c1 || e == c2) e = pick(rng);
    Builder b;
    Generated g;
    const Fragment f1 = b.phrase(c1);
    b.plain(" and ");
    const Fragment f2 = b.phrase(c2);
    b.plain(" ");
    const Fragment ft = b.phrase("cause");
    b.plain(" ");
    const Fragment fe = b.phrase(e);
    b.plain(".");
    g.text = b.text;
    g.ann.entities.push_back(make_entity(1, Label::Cause, {f1}, g.text));
    g.ann.entities.push_back(make_entity(2, Label::Cause, {f2}, g.text));
    g.ann.entities.push_back(make_entity(3, Label::Trigger, {ft}, g.text));
    g.ann.entities.push_back(make_entity(4, Label::Effect, {fe}, g.text));
    g.ann.relations.push_back(make_relation(1, RelationType::CauseOf, 1, 3));
    g.ann.relations.push_back(make_relation(2, RelationType::CauseOf, 2, 3));
    g.ann.relations.push_back(make_relation(3, RelationType::LeadsTo, 3, 4));
    return g;
  });

  // disrupted trigger: "The root cause for {E} are {C}."
  t.push_back([](Rng& rng) {
    auto [e, c] = pick2(rng);
    Builder b;
    Generated g;
    const Fragment ft1 = b.phrase("The root cause for");
    b.plain(" ");
    const Fragment fe = b.phrase(e);
    b.plain(" ");
    const Fragment ft2 = b.phrase("are");
    b.plain(" ");
    const Fragment fc = b.phrase(c);
    b.plain(".");
    g.text = b.text;
    g.ann.entities.push_back(make_entity(1, Label::Trigger, {ft1, ft2}, g.text));
    g.ann.entities.push_back(make_entity(2, Label::Effect, {fe}, g.text));
    g.ann.entities.push_back(make_entity(3, Label::Cause, {fc}, g.text));
    g.ann.relations.push_back(make_relation(1, RelationType::CauseOf, 3, 1));
    g.ann.relations.push_back(make_relation(2, RelationType::LeadsTo, 1, 2));
    return g;
  });

  // negatives: neutral or associative wording, nothing annotated
  t.push_back([](Rng& rng) { return negative_text(rng, "", " and ", " were inspected."); });
  t.push_back([](Rng& rng) { return negative_text(rng, "", " is linked to ", "."); });
  t.push_back([](Rng& rng) { return negative_text(rng, "After ", ", ", " was measured."); });
  t.push_back([](Rng& rng) {
    return negative_text(rng, "The report lists ", " next to ", " without conclusion.");
  });
  t.push_back([](Rng& rng) { return negative_text(rng, "Inspection covered ", " and ", "."); });
  t.push_back([](Rng& rng) {
    return negative_text(rng, "Both ", " and ", " remain under observation.");
  });
  return t;
}

}  // namespace

std::vector<AnnotatedText> generate_synthetic(const SynthConfig& config) {
  check_contract(config.count > 0, "synthetic corpus: count must be positive");
  const std::vector<TemplateFn> templates = make_templates();
  Rng rng(config.seed);
  std::vector<AnnotatedText> out;
  out.reserve(static_cast<size_t>(config.count));

  for (int i = 0; i < config.count; ++i) {
    Generated g = templates[rng.below(templates.size())](rng);

    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "syn-%04d", i);
    AnnotatedText at;
    at.unit.id = idbuf;
    at.unit.text = g.text;
    if (i % 2 == 0) {
      at.unit.source_kind = SourceKind::Fmea;
      at.unit.provenance.file = "synthetic.csv";
      at.unit.provenance.row = i;
      at.unit.provenance.column = "cause";
    } else {
      at.unit.source_kind = SourceKind::Slides;
      at.unit.provenance.file = "synthetic.json";
      at.unit.provenance.slide = i / 2;
      at.unit.provenance.box = 0;
      at.unit.provenance.bbox = BBox{0.0, 0.0, 1.0, 1.0};
    }

    g.ann.text_id = at.unit.id;
    g.ann.annotator_id = "gold";
    at.by_annotator["gold"] = renumber(g.ann);
    out.push_back(std::move(at));
  }
  return out;
}

}  // namespace causalkit
