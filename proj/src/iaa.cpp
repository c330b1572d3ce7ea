#include "causalkit/iaa.hpp"

#include <cmath>
#include <cstdio>

#include "causalkit/errors.hpp"

namespace causalkit {

TokenLabelVector project_to_tokens(const AnnotationSet& set, const std::vector<Token>& tokens,
                                   ProjectStats* stats) {
  TokenLabelVector v;
  v.text_id = set.text_id;
  for (auto& b : v.bits) b.assign(tokens.size(), 0);
  for (const Entity& e : set.entities) {
    bool covered = false;
    auto& bits = v.bits[static_cast<size_t>(e.label)];
    for (const Fragment& f : e.fragments) {
      for (size_t t = 0; t < tokens.size(); ++t) {
        if (tokens[t].begin < f.end && f.begin < tokens[t].end) {
          bits[t] = 1;
          covered = true;
        }
      }
    }
    if (!covered && stats) ++stats->uncovered_entities;
  }
  return v;
}

double cohen_kappa(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  check_contract(a.size() == b.size(), "cohen_kappa: vectors must have equal length");
  check_contract(!a.empty(), "cohen_kappa: vectors must be non-empty");
  const double n = static_cast<double>(a.size());
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] && b[i])
      ++n11;
    else if (a[i])
      ++n10;
    else if (b[i])
      ++n01;
    else
      ++n00;
  }
  const double po = (n11 + n00) / n;
  if (po == 1.0) return 1.0;  // perfect observed agreement, regardless of marginals
  const double pa1 = (n11 + n10) / n, pb1 = (n11 + n01) / n;
  const double pe = pa1 * pb1 + (1.0 - pa1) * (1.0 - pb1);
  return (po - pe) / (1.0 - pe);
}

double pairwise_f1(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
  check_contract(a.size() == b.size(), "pairwise_f1: vectors must have equal length");
  double both = 0, na = 0, nb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    both += (a[i] && b[i]) ? 1 : 0;
    na += a[i] ? 1 : 0;
    nb += b[i] ? 1 : 0;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * both / (na + nb);
}

IaaReport iaa_report(const std::vector<AnnotatedText>& texts, const std::string& annotator_a,
                     const std::string& annotator_b, const std::string& tokenizer_id) {
  const Tokenizer& tok = tokenizer_by_id(tokenizer_id);

  // pooled bit vectors: [label][source][annotator]
  std::vector<uint8_t> pool[kNumLabels][2][2];
  IaaReport report;

  for (const AnnotatedText& at : texts) {
    const auto ita = at.by_annotator.find(annotator_a);
    const auto itb = at.by_annotator.find(annotator_b);
    if (ita == at.by_annotator.end() || itb == at.by_annotator.end()) {
      ++report.skipped_texts;
      continue;
    }
    const std::vector<Token> tokens = tok.tokenize(at.unit.text);
    const TokenLabelVector va = project_to_tokens(ita->second, tokens);
    const TokenLabelVector vb = project_to_tokens(itb->second, tokens);
    const int src = at.unit.source_kind == SourceKind::Fmea ? 0 : 1;
    for (int l = 0; l < kNumLabels; ++l) {
      auto& pa = pool[l][src][0];
      auto& pb = pool[l][src][1];
      pa.insert(pa.end(), va.bits[static_cast<size_t>(l)].begin(), va.bits[static_cast<size_t>(l)].end());
      pb.insert(pb.end(), vb.bits[static_cast<size_t>(l)].begin(), vb.bits[static_cast<size_t>(l)].end());
    }
  }

  // row order in the table: Trigger, Cause, Effect
  const Label kRowLabel[3] = {Label::Trigger, Label::Cause, Label::Effect};
  for (int row = 0; row < 3; ++row) {
    const int l = static_cast<int>(kRowLabel[row]);
    std::vector<uint8_t> micro_a, micro_b;
    for (int src = 0; src < 2; ++src) {
      IaaCell& c = report.cell[row][src];
      c.n_tokens = static_cast<long>(pool[l][src][0].size());
      if (c.n_tokens > 0) {
        c.kappa = cohen_kappa(pool[l][src][0], pool[l][src][1]);
        c.f1 = pairwise_f1(pool[l][src][0], pool[l][src][1]);
      }
      micro_a.insert(micro_a.end(), pool[l][src][0].begin(), pool[l][src][0].end());
      micro_b.insert(micro_b.end(), pool[l][src][1].begin(), pool[l][src][1].end());
    }
    IaaCell& micro = report.cell[row][2];
    micro.n_tokens = static_cast<long>(micro_a.size());
    if (micro.n_tokens > 0) {
      micro.kappa = cohen_kappa(micro_a, micro_b);
      micro.f1 = pairwise_f1(micro_a, micro_b);
    }
    IaaCell& macro = report.cell[row][3];
    macro.n_tokens = micro.n_tokens;
    int present = 0;
    for (int src = 0; src < 2; ++src) {
      if (report.cell[row][src].n_tokens == 0) continue;
      macro.kappa += report.cell[row][src].kappa;
      macro.f1 += report.cell[row][src].f1;
      ++present;
    }
    if (present > 0) {
      macro.kappa /= present;
      macro.f1 /= present;
    }
  }

  // macro-average row: unweighted mean over the three label rows
  for (int col = 0; col < 4; ++col) {
    IaaCell& c = report.cell[3][col];
    for (int row = 0; row < 3; ++row) {
      c.kappa += report.cell[row][col].kappa;
      c.f1 += report.cell[row][col].f1;
      c.n_tokens = report.cell[row][col].n_tokens;  // same token count per label
    }
    c.kappa /= 3.0;
    c.f1 /= 3.0;
  }
  return report;
}

namespace {
std::string pct(double fraction, long n_tokens) {
  if (n_tokens == 0) return "--";
  return std::to_string(static_cast<long>(std::llround(fraction * 100.0)));
}
}  // namespace

std::string render_iaa(const IaaReport& report) {
  char buf[256];
  std::vector<std::string> lines;
  std::string line;
  std::snprintf(buf, sizeof buf, "%-21s", "Annotation Type");
  line = buf;
  for (const char* col : kIaaColNames) {
    std::snprintf(buf, sizeof buf, "%-15s", col);
    line += buf;
  }
  lines.push_back(line);
  std::snprintf(buf, sizeof buf, "%-21s", "");
  line = buf;
  for (int col = 0; col < 4; ++col) {
    std::snprintf(buf, sizeof buf, "%-7s%-8s", "k%", "F1%");
    line += buf;
  }
  lines.push_back(line);
  for (int row = 0; row < 4; ++row) {
    std::snprintf(buf, sizeof buf, "%-21s", kIaaRowNames[row]);
    line = buf;
    for (int col = 0; col < 4; ++col) {
      const IaaCell& c = report.cell[row][col];
      std::snprintf(buf, sizeof buf, "%-7s%-8s", pct(c.kappa, c.n_tokens).c_str(),
                    pct(c.f1, c.n_tokens).c_str());
      line += buf;
    }
    lines.push_back(line);
  }
  std::string out;
  for (std::string& l : lines) {
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l;
    out += "\n";
  }
  return out;
}

Json iaa_records(const IaaReport& report) {
  Json records = Json::array();
  for (int row = 0; row < 4; ++row)
    for (int col = 0; col < 4; ++col) {
      const IaaCell& c = report.cell[row][col];
      Json r;
      r["label"] = kIaaRowNames[row];
      r["source"] = kIaaColNames[col];
      r["kappa"] = c.kappa;
      r["f1"] = c.f1;
      r["n_tokens"] = c.n_tokens;
      records.push_back(r);
    }
  Json doc;
  doc["schema"] = "causalkit-iaa-v1";
  doc["skipped_texts"] = report.skipped_texts;
  doc["records"] = records;
  return doc;
}

std::vector<AnnotatedText> load_annotated_corpus(const std::filesystem::path& dir,
                                                 const std::vector<std::string>& annotators) {
  std::vector<AnnotatedText> out;
  for (TextUnit& unit : read_corpus(dir)) {
    AnnotatedText at;
    at.unit = std::move(unit);
    for (const std::string& annotator : annotators) {
      const std::filesystem::path file = annotation_path(dir, at.unit.id, annotator);
      if (!std::filesystem::exists(file)) continue;
      at.by_annotator[annotator] =
          parse_standoff(read_text_file(file), at.unit.text, at.unit.id, annotator);
    }
    out.push_back(std::move(at));
  }
  return out;
}

}  // namespace causalkit
