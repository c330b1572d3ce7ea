#include "causalkit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "causalkit/errors.hpp"

namespace causalkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool defined(double v) { return !std::isnan(v); }

size_t source_slot(SourceKind k) { return k == SourceKind::Fmea ? 0 : 1; }

const std::array<const char*, 2> kSourceCols = {"FMEA", "Slides"};

// Assemble one metric grid row from per-source tallies.
void fill_row(MetricGrid& grid, const std::string& row, const std::array<F1Counts, 2>& per_source,
              const std::array<bool, 2>& present) {
  F1Counts micro;
  double macro_sum = 0.0;
  int macro_n = 0;
  for (size_t s = 0; s < 2; ++s) {
    if (present[s]) {
      grid[row][kSourceCols[s]] = per_source[s].f1();
      micro.merge(per_source[s]);
      macro_sum += per_source[s].f1();
      ++macro_n;
    } else {
      grid[row][kSourceCols[s]] = kNaN;
    }
  }
  grid[row]["Micro Avg"] = macro_n > 0 ? micro.f1() : kNaN;
  grid[row]["Macro Avg"] = macro_n > 0 ? macro_sum / macro_n : kNaN;
}

void fill_macro_row(MetricGrid& grid, const std::vector<std::string>& label_rows) {
  for (const std::string& col : kMetricCols) {
    double sum = 0.0;
    int n = 0;
    for (const std::string& row : label_rows) {
      const double v = grid.at(row).at(col);
      if (defined(v)) {
        sum += v;
        ++n;
      }
    }
    grid["Macro Avg"][col] = n == 0 ? kNaN : sum / n;
  }
}

}  // namespace

MetricGrid evaluate_sst(SstTagger& tagger, const std::vector<SstInstance>& instances,
                        double threshold) {
  check_contract(!instances.empty(), "evaluate: empty instance set");
  std::array<std::array<F1Counts, 2>, kNumLabels> counts;  // [label][source]
  std::array<bool, 2> present = {false, false};
  for (const SstInstance& inst : instances) {
    const size_t s = source_slot(inst.source);
    present[s] = true;
    const auto bits = tagger.predict(inst.tokens, threshold);
    for (int l = 0; l < kNumLabels; ++l)
      for (size_t t = 0; t < inst.tokens.size(); ++t)
        counts[static_cast<size_t>(l)][s].add(inst.labels[t][static_cast<size_t>(l)] != 0,
                                              bits[static_cast<size_t>(l)][t] != 0);
  }

  MetricGrid grid;
  fill_row(grid, "Trigger", counts[static_cast<size_t>(Label::Trigger)], present);
  fill_row(grid, "Cause", counts[static_cast<size_t>(Label::Cause)], present);
  fill_row(grid, "Effect", counts[static_cast<size_t>(Label::Effect)], present);
  fill_macro_row(grid, {"Trigger", "Cause", "Effect"});
  return grid;
}

MetricGrid evaluate_mst(MstTagger& tagger, const std::vector<MstInstance>& instances,
                        double theta_t, double theta_g) {
  check_contract(!instances.empty(), "evaluate: empty instance set");
  std::array<F1Counts, 2> trig, cause, effect, grouping;
  std::array<bool, 2> present = {false, false};

  for (const MstInstance& inst : instances) {
    const size_t s = source_slot(inst.source);
    present[s] = true;
    const MstPrediction pred = tagger.predict(inst.tokens, theta_t, theta_g);

    std::vector<uint8_t> gold_cause(inst.tokens.size(), 0), gold_effect(inst.tokens.size(), 0);
    for (const MstGroup& g : inst.groups)
      for (const auto& [tok, label] : g.args)
        (label == Label::Cause ? gold_cause : gold_effect)[static_cast<size_t>(tok)] = 1;
    std::vector<uint8_t> pred_cause(inst.tokens.size(), 0), pred_effect(inst.tokens.size(), 0);
    for (const MstRelation& rel : pred.relations) {
      for (const int t : rel.cause_tokens) pred_cause[static_cast<size_t>(t)] = 1;
      for (const int t : rel.effect_tokens) pred_effect[static_cast<size_t>(t)] = 1;
    }
    for (size_t t = 0; t < inst.tokens.size(); ++t) {
      trig[s].add(inst.trigger_bits[t] != 0, pred.trigger_bits[t] != 0);
      cause[s].add(gold_cause[t] != 0, pred_cause[t] != 0);
      effect[s].add(gold_effect[t] != 0, pred_effect[t] != 0);
    }

    // Grouping quality: raw pairwise decisions over the gold trigger tokens.
    std::vector<int> gold_triggers;
    for (size_t t = 0; t < inst.trigger_bits.size(); ++t)
      if (inst.trigger_bits[t]) gold_triggers.push_back(static_cast<int>(t));
    if (gold_triggers.size() >= 2) {
      const std::vector<double> probs = tagger.grouping_probs(inst.tokens, gold_triggers);
      size_t p = 0;
      for (size_t a = 0; a < gold_triggers.size(); ++a)
        for (size_t b = a + 1; b < gold_triggers.size(); ++b, ++p) {
          bool same = false;
          for (const MstGroup& g : inst.groups) {
            const auto& tt = g.trigger_tokens;
            const bool has_a = std::find(tt.begin(), tt.end(), gold_triggers[a]) != tt.end();
            const bool has_b = std::find(tt.begin(), tt.end(), gold_triggers[b]) != tt.end();
            if (has_a && has_b) {
              same = true;
              break;
            }
          }
          grouping[s].add(same, probs[p] >= theta_g);
        }
    }
  }

  MetricGrid grid;
  fill_row(grid, "Trigger", trig, present);
  fill_row(grid, "Cause", cause, present);
  fill_row(grid, "Effect", effect, present);
  fill_macro_row(grid, {"Trigger", "Cause", "Effect"});
  fill_row(grid, "Trigger Grouping", grouping, present);
  return grid;
}

ReportCell aggregate_cell(const std::vector<double>& values) {
  ReportCell cell;
  cell.n = static_cast<int>(values.size());
  if (values.empty()) return cell;
  double sum = 0.0;
  for (const double v : values) sum += v;
  cell.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - cell.mean) * (v - cell.mean);
  cell.stdev = std::sqrt(sq / static_cast<double>(values.size()));
  return cell;
}

std::map<std::string, std::map<std::string, ReportCell>> aggregate_report(const MetricsReport& report) {
  std::map<std::string, std::map<std::string, ReportCell>> out;
  for (const std::string& row : report.row_names) {
    for (const std::string& col : report.col_names) {
      std::vector<double> values;
      for (const CvFoldResult& fold : report.folds) {
        const auto rit = fold.values.find(row);
        if (rit == fold.values.end()) continue;
        const auto cit = rit->second.find(col);
        if (cit == rit->second.end() || !defined(cit->second)) continue;
        values.push_back(cit->second);
      }
      out[row][col] = aggregate_cell(values);
    }
  }
  return out;
}

namespace {

// Pad to a display width, counting the two-byte sign "±" as one column.
std::string pad_display(const std::string& s, size_t width) {
  size_t display = 0;
  for (size_t i = 0; i < s.size(); ++i)
    if ((s[i] & 0xC0) != 0x80) ++display;  // count UTF-8 lead bytes only
  std::string out = s;
  while (display < width) {
    out.push_back(' ');
    ++display;
  }
  return out;
}

std::string rstrip(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

}  // namespace

std::string render_metrics_table(const std::vector<std::string>& row_names,
                                 const std::vector<std::string>& col_names,
                                 const std::map<std::string, std::map<std::string, ReportCell>>& cells) {
  constexpr size_t kNameWidth = 21;
  constexpr size_t kColWidth = 15;
  std::vector<std::string> lines;

  std::string header = pad_display("Annotation Type", kNameWidth);
  for (const std::string& col : col_names) header += pad_display(col, kColWidth);
  lines.push_back(rstrip(header));

  std::string sub = pad_display("", kNameWidth);
  for (size_t c = 0; c < col_names.size(); ++c) sub += pad_display("F1%", kColWidth);
  lines.push_back(rstrip(sub));

  for (const std::string& row : row_names) {
    std::string line = pad_display(row, kNameWidth);
    for (const std::string& col : col_names) {
      const ReportCell& cell = cells.at(row).at(col);
      std::string text = "--";
      if (cell.n > 0) {
        text = std::to_string(static_cast<long>(std::llround(cell.mean * 100.0))) + "±" +
               std::to_string(static_cast<long>(std::llround(cell.stdev * 100.0)));
      }
      line += pad_display(text, kColWidth);
    }
    lines.push_back(rstrip(line));
  }

  std::string out;
  for (size_t i = 0; i < lines.size(); ++i) {
    out += lines[i];
    out += '\n';
  }
  return out;
}

Json metrics_records(const MetricsReport& report) {
  const auto cells = aggregate_report(report);
  Json doc;
  doc["schema"] = "causalkit-metrics-v1";
  doc["model"] = report.model;
  doc["rows"] = report.row_names;
  doc["cols"] = report.col_names;
  Json records = Json::array();
  for (const std::string& row : report.row_names) {
    for (const std::string& col : report.col_names) {
      Json rec;
      rec["row"] = row;
      rec["col"] = col;
      Json folds = Json::array();
      for (const CvFoldResult& fold : report.folds) {
        const auto rit = fold.values.find(row);
        if (rit == fold.values.end()) continue;
        const auto cit = rit->second.find(col);
        if (cit == rit->second.end() || !defined(cit->second)) continue;
        folds.push_back(cit->second);
      }
      rec["folds"] = folds;
      const ReportCell& cell = cells.at(row).at(col);
      rec["n"] = cell.n;
      rec["mean"] = cell.n > 0 ? Json(cell.mean) : Json(nullptr);
      rec["std"] = cell.n > 0 ? Json(cell.stdev) : Json(nullptr);
      records.push_back(rec);
    }
  }
  doc["records"] = records;
  Json folds_meta = Json::array();
  for (const CvFoldResult& fold : report.folds) {
    folds_meta.push_back({{"fold", fold.fold},
                          {"epochs", fold.log.epochs.size()},
                          {"best_epoch", fold.log.best_epoch},
                          {"best_dev_score", fold.log.best_dev_score}});
  }
  doc["fold_details"] = folds_meta;
  return doc;
}

Json RunConfig::to_json() const {
  Json j;
  j["model"] = model;
  j["encoder_spec"] = encoder_spec;
  j["freeze_encoder"] = freeze_encoder;
  j["tokenizer"] = tokenizer_id;
  j["seed"] = seed;
  j["encoder"] = {{"dim", encoder.dim},
                  {"layers", encoder.layers},
                  {"ffn_dim", encoder.ffn_dim},
                  {"max_len", encoder.max_len}};
  j["sst"] = {{"lr", sst.lr},
              {"batch_size", sst.batch_size},
              {"max_epochs", sst.max_epochs},
              {"patience", sst.patience},
              {"threshold", sst.threshold}};
  j["mst"] = {{"lr", mst.lr},
              {"batch_size", mst.batch_size},
              {"max_epochs", mst.max_epochs},
              {"patience", mst.patience},
              {"theta_t", mst.theta_t},
              {"theta_g", mst.theta_g},
              {"lambda1", mst.lambda1},
              {"lambda2", mst.lambda2},
              {"lambda3", mst.lambda3}};
  return j;
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  c.model = j.at("model").get<std::string>();
  c.encoder_spec = j.at("encoder_spec").get<std::string>();
  c.freeze_encoder = j.at("freeze_encoder").get<bool>();
  c.tokenizer_id = j.at("tokenizer").get<std::string>();
  c.seed = j.at("seed").get<uint64_t>();
  const Json& e = j.at("encoder");
  c.encoder.dim = e.at("dim").get<int>();
  c.encoder.layers = e.at("layers").get<int>();
  c.encoder.ffn_dim = e.at("ffn_dim").get<int>();
  c.encoder.max_len = e.at("max_len").get<int>();
  const Json& s = j.at("sst");
  c.sst.lr = s.at("lr").get<double>();
  c.sst.batch_size = s.at("batch_size").get<int>();
  c.sst.max_epochs = s.at("max_epochs").get<int>();
  c.sst.patience = s.at("patience").get<int>();
  c.sst.threshold = s.at("threshold").get<double>();
  const Json& m = j.at("mst");
  c.mst.lr = m.at("lr").get<double>();
  c.mst.batch_size = m.at("batch_size").get<int>();
  c.mst.max_epochs = m.at("max_epochs").get<int>();
  c.mst.patience = m.at("patience").get<int>();
  c.mst.theta_t = m.at("theta_t").get<double>();
  c.mst.theta_g = m.at("theta_g").get<double>();
  c.mst.lambda1 = m.at("lambda1").get<double>();
  c.mst.lambda2 = m.at("lambda2").get<double>();
  c.mst.lambda3 = m.at("lambda3").get<double>();
  return c;
}

std::vector<SstInstance> select_sst(const std::vector<SstInstance>& all,
                                    const std::vector<std::string>& ids) {
  std::map<std::string, const SstInstance*> by_id;
  for (const SstInstance& inst : all) by_id[inst.text_id] = &inst;
  std::vector<SstInstance> out;
  for (const std::string& id : ids) {
    const auto it = by_id.find(id);
    check_contract(it != by_id.end(), "dataset does not contain text id '" + id + "'");
    out.push_back(*it->second);
  }
  return out;
}

std::vector<MstInstance> select_mst(const std::vector<MstInstance>& all,
                                    const std::vector<std::string>& ids) {
  std::map<std::string, const MstInstance*> by_id;
  for (const MstInstance& inst : all) by_id[inst.text_id] = &inst;
  std::vector<MstInstance> out;
  for (const std::string& id : ids) {
    const auto it = by_id.find(id);
    check_contract(it != by_id.end(), "dataset does not contain text id '" + id + "'");
    out.push_back(*it->second);
  }
  return out;
}

Vocab vocab_from_sst(const std::vector<SstInstance>& instances) {
  std::vector<std::vector<std::string>> docs;
  for (const SstInstance& inst : instances) docs.push_back(token_surfaces(inst.tokens));
  return Vocab::build(docs);
}

Vocab vocab_from_mst(const std::vector<MstInstance>& instances) {
  std::vector<std::vector<std::string>> docs;
  for (const MstInstance& inst : instances) docs.push_back(token_surfaces(inst.tokens));
  return Vocab::build(docs);
}

MetricsReport run_cv(const Dataset& dataset, const FoldPlan& plan, const RunConfig& config,
                     const std::filesystem::path& out_dir) {
  check_contract(config.model == "sst" || config.model == "mst",
                 "run_cv: model must be sst or mst");
  check_contract(plan.folds.size() >= 2, "run_cv: fold plan needs at least 2 folds");

  MetricsReport report;
  report.model = config.model;
  report.row_names = config.model == "sst" ? kSstRows : kMstRows;
  report.col_names = kMetricCols;

  for (size_t fold = 0; fold < plan.folds.size(); ++fold) {
    std::vector<std::string> train_ids, dev_ids = plan.folds[fold];
    for (size_t other = 0; other < plan.folds.size(); ++other)
      if (other != fold)
        train_ids.insert(train_ids.end(), plan.folds[other].begin(), plan.folds[other].end());
    check_contract(!train_ids.empty() && !dev_ids.empty(), "run_cv: empty fold split");

    const uint64_t fold_seed = config.seed + 1000ULL * (fold + 1);
    CvFoldResult result;
    result.fold = static_cast<int>(fold);

    if (config.model == "sst") {
      const std::vector<SstInstance> train = select_sst(dataset.sst, train_ids);
      const std::vector<SstInstance> dev = select_sst(dataset.sst, dev_ids);
      const Vocab vocab = config.encoder_spec == "tiny" ? vocab_from_sst(train) : Vocab{};
      auto encoder = make_encoder(config.encoder_spec, vocab, dataset.tokenizer_id, fold_seed,
                                  config.freeze_encoder, config.encoder);
      SstTagger tagger(std::move(encoder), fold_seed + 1);
      SstTrainConfig tc = config.sst;
      tc.seed = fold_seed + 2;
      result.log = tagger.train(train, dev, tc);
      result.values = evaluate_sst(tagger, dev, tc.threshold);
      if (!out_dir.empty()) tagger.save(out_dir / ("fold" + std::to_string(fold)) / "model");
    } else {
      const std::vector<MstInstance> train = select_mst(dataset.mst, train_ids);
      const std::vector<MstInstance> dev = select_mst(dataset.mst, dev_ids);
      const Vocab vocab = config.encoder_spec == "tiny" ? vocab_from_mst(train) : Vocab{};
      auto encoder = make_encoder(config.encoder_spec, vocab, dataset.tokenizer_id, fold_seed,
                                  config.freeze_encoder, config.encoder);
      MstTagger tagger(std::move(encoder), fold_seed + 1);
      MstTrainConfig tc = config.mst;
      tc.seed = fold_seed + 2;
      result.log = tagger.train(train, dev, tc);
      result.values = evaluate_mst(tagger, dev, tc.theta_t, tc.theta_g);
      if (!out_dir.empty()) tagger.save(out_dir / ("fold" + std::to_string(fold)) / "model");
    }
    report.folds.push_back(std::move(result));
  }
  return report;
}

}  // namespace causalkit
