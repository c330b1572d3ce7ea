#pragma once

// Shared helpers for the unit and acceptance tests: substring-located
// annotation building, a random valid-annotation generator for round-trip
// properties, and brute-force agreement oracles computed straight from the
// confusion matrix.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "causalkit/annotation.hpp"
#include "causalkit/rng.hpp"
#include "causalkit/utf8.hpp"

namespace testsupport {

using causalkit::AnnotationSet;
using causalkit::Entity;
using causalkit::Fragment;
using causalkit::Label;
using causalkit::Relation;
using causalkit::RelationType;

// --- substring-located annotation building ---------------------------------

inline size_t byte_to_cp(const causalkit::Utf8Map& map, size_t byte_offset) {
  auto it = std::lower_bound(map.byte_of.begin(), map.byte_of.end(),
                             static_cast<uint32_t>(byte_offset));
  if (it == map.byte_of.end() || *it != byte_offset)
    throw std::runtime_error("byte offset does not start a code point");
  return static_cast<size_t>(it - map.byte_of.begin());
}

// Locate the Nth occurrence (0-based) of `piece` in `text` and return its
// code-point fragment. Throws when the piece is absent, so fixture typos
// surface immediately instead of producing silently wrong offsets.
inline Fragment frag_at(const std::string& text, const std::string& piece,
                        int occurrence = 0) {
  if (piece.empty()) throw std::runtime_error("empty piece");
  size_t pos = 0;
  for (int seen = 0;; ++seen) {
    pos = text.find(piece, pos);
    if (pos == std::string::npos)
      throw std::runtime_error("piece not found in fixture text: " + piece);
    if (seen == occurrence) break;
    ++pos;
  }
  causalkit::Utf8Map map = causalkit::utf8_index(text);
  Fragment f;
  f.begin = static_cast<uint32_t>(byte_to_cp(map, pos));
  f.end = static_cast<uint32_t>(byte_to_cp(map, pos + piece.size()));
  return f;
}

struct SpanSpec {
  std::string piece;
  int occurrence = 0;
};

struct EntitySpec {
  std::string id;
  Label label = Label::Trigger;
  std::vector<SpanSpec> spans;
};

struct RelationSpec {
  std::string id;
  RelationType type = RelationType::CauseOf;
  std::string arg1;
  std::string arg2;
};

// Build an AnnotationSet directly (without going through the parser), with
// fragment offsets computed from substring positions. Surfaces are the joined
// fragment texts, matching the serializer's convention.
inline AnnotationSet build_set(const std::string& text,
                               const std::vector<EntitySpec>& entities,
                               const std::vector<RelationSpec>& relations,
                               const std::string& text_id = "t1",
                               const std::string& annotator_id = "a1") {
  causalkit::Utf8Map map = causalkit::utf8_index(text);
  AnnotationSet set;
  set.text_id = text_id;
  set.annotator_id = annotator_id;
  for (const EntitySpec& spec : entities) {
    Entity e;
    e.id = spec.id;
    e.label = spec.label;
    std::string surface;
    for (const SpanSpec& span : spec.spans) {
      Fragment f = frag_at(text, span.piece, span.occurrence);
      if (!surface.empty()) surface += ' ';
      surface += causalkit::utf8_slice(text, map, f.begin, f.end);
      e.fragments.push_back(f);
    }
    std::sort(e.fragments.begin(), e.fragments.end());
    e.surface = surface;
    set.entities.push_back(std::move(e));
  }
  for (const RelationSpec& spec : relations) {
    Relation r;
    r.id = spec.id;
    r.type = spec.type;
    r.arg1 = spec.arg1;
    r.arg2 = spec.arg2;
    set.relations.push_back(std::move(r));
  }
  return set;
}

// --- random valid annotation sets -------------------------------------------

// Text alphabet with deliberate multi-byte code points so that round-trip
// tests exercise code-point (not byte) offset handling.
inline std::string random_text(causalkit::Rng& rng) {
  static const std::vector<std::string> pool = {
      "a", "b", "Z", "9", " ", " ", ".", ",", "µ", "Ω", "€", "犬", "😀", "\n"};
  size_t len = 1 + rng.below(120);
  std::string text;
  for (size_t i = 0; i < len; ++i) text += pool[rng.below(pool.size())];
  return text;
}

// Generate a structurally valid AnnotationSet over a random text: entity ids
// increase with gaps, fragments are sorted and non-overlapping (possibly
// discontinuous), surfaces match the text, and relations point at existing
// entities. Valid here means "parseable", not "guideline-clean".
inline AnnotationSet random_set(causalkit::Rng& rng, std::string* text_out) {
  std::string text = random_text(rng);
  causalkit::Utf8Map map = causalkit::utf8_index(text);
  size_t len = map.length();

  AnnotationSet set;
  set.text_id = "t";
  set.annotator_id = "a";

  static const Label labels[3] = {Label::Cause, Label::Effect, Label::Trigger};
  int next_entity_num = 1 + static_cast<int>(rng.below(3));
  size_t n_entities = rng.below(9);  // 0..8
  for (size_t i = 0; i < n_entities; ++i) {
    size_t n_frags = 1 + rng.below(3);
    std::vector<Fragment> frags;
    size_t cursor = rng.below(std::max<size_t>(len, 1));
    for (size_t k = 0; k < n_frags; ++k) {
      if (cursor >= len) break;
      size_t begin = cursor + rng.below(std::min<size_t>(len - cursor, 4));
      if (begin >= len) break;
      size_t max_span = std::min<size_t>(len - begin, 6);
      size_t end = begin + 1 + rng.below(max_span);
      // The standoff grammar is line-based, so a fragment may not cover a
      // newline; cut the span at the first one.
      for (size_t cp = begin; cp < end; ++cp)
        if (causalkit::utf8_slice(text, map, cp, cp + 1) == "\n") {
          end = cp;
          break;
        }
      if (end <= begin) {
        cursor = begin + 1;
        continue;
      }
      Fragment f;
      f.begin = static_cast<uint32_t>(begin);
      f.end = static_cast<uint32_t>(end);
      frags.push_back(f);
      cursor = end + rng.below(3);  // zero gap (adjacent fragments) allowed
    }
    if (frags.empty()) continue;
    Entity e;
    e.id = "T" + std::to_string(next_entity_num);
    next_entity_num += 1 + static_cast<int>(rng.below(4));
    e.label = labels[rng.below(3)];
    e.fragments = frags;
    std::string surface;
    for (const Fragment& f : frags) {
      if (!surface.empty()) surface += ' ';
      surface += causalkit::utf8_slice(text, map, f.begin, f.end);
    }
    e.surface = surface;
    set.entities.push_back(std::move(e));
  }

  if (set.entities.size() >= 2) {
    int next_rel_num = 1 + static_cast<int>(rng.below(3));
    size_t n_rels = rng.below(5);  // 0..4
    for (size_t i = 0; i < n_rels; ++i) {
      size_t a = rng.below(set.entities.size());
      size_t b = rng.below(set.entities.size());
      if (a == b) continue;
      Relation r;
      r.id = "R" + std::to_string(next_rel_num);
      next_rel_num += 1 + static_cast<int>(rng.below(4));
      r.type = rng.below(2) == 0 ? RelationType::CauseOf : RelationType::LeadsTo;
      r.arg1 = set.entities[a].id;
      r.arg2 = set.entities[b].id;
      set.relations.push_back(std::move(r));
    }
  }

  *text_out = text;
  return set;
}

// --- brute-force agreement oracles ------------------------------------------

// Cohen's kappa from the explicit 2x2 confusion matrix and its marginals.
inline double kappa_bruteforce(const std::vector<uint8_t>& a,
                               const std::vector<uint8_t>& b) {
  double c[2][2] = {{0, 0}, {0, 0}};
  for (size_t i = 0; i < a.size(); ++i) c[a[i] ? 1 : 0][b[i] ? 1 : 0] += 1.0;
  double n = static_cast<double>(a.size());
  double po = (c[0][0] + c[1][1]) / n;
  double a_pos = (c[1][0] + c[1][1]) / n;
  double a_neg = (c[0][0] + c[0][1]) / n;
  double b_pos = (c[0][1] + c[1][1]) / n;
  double b_neg = (c[0][0] + c[1][0]) / n;
  double pe = a_pos * b_pos + a_neg * b_neg;
  if (po == 1.0) return 1.0;
  return (po - pe) / (1.0 - pe);
}

// Pairwise F1 via precision and recall (one side treated as reference; the
// measure is symmetric).
inline double f1_bruteforce(const std::vector<uint8_t>& a,
                            const std::vector<uint8_t>& b) {
  double tp = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i]) tp += 1.0;
    if (a[i]) na += 1.0;
    if (b[i]) nb += 1.0;
  }
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (tp == 0.0) return 0.0;
  double precision = tp / nb;
  double recall = tp / na;
  return 2.0 * precision * recall / (precision + recall);
}

inline std::vector<uint8_t> random_bits(causalkit::Rng& rng, size_t len,
                                        double density) {
  std::vector<uint8_t> bits(len);
  for (size_t i = 0; i < len; ++i) bits[i] = rng.uniform() < density ? 1 : 0;
  return bits;
}

// --- scratch directories -----------------------------------------------------

// Fresh directory under the system temp dir, removed when the guard dies.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static std::atomic<uint64_t> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("causalkit-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testsupport
