#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "causalkit/dataset.hpp"
#include "causalkit/io.hpp"
#include "causalkit/metrics.hpp"
#include "causalkit/mst.hpp"
#include "causalkit/sst.hpp"

namespace causalkit {

inline const std::vector<std::string> kMetricCols = {"FMEA", "Slides", "Micro Avg", "Macro Avg"};
inline const std::vector<std::string> kSstRows = {"Trigger", "Cause", "Effect", "Macro Avg"};
inline const std::vector<std::string> kMstRows = {"Trigger", "Cause", "Effect", "Macro Avg",
                                                  "Trigger Grouping"};

struct RunConfig {
  std::string model = "mst";          // "sst" | "mst"
  std::string encoder_spec = "tiny";  // "tiny" or a checkpoint directory
  bool freeze_encoder = false;
  std::string tokenizer_id = "ws";
  uint64_t seed = 42;
  EncoderConfig encoder;
  SstTrainConfig sst;
  MstTrainConfig mst;

  Json to_json() const;
  static RunConfig from_json(const Json& j);
};

// row -> col -> F1 (NaN when the column is undefined for this evaluation set).
using MetricGrid = std::map<std::string, std::map<std::string, double>>;

MetricGrid evaluate_sst(SstTagger& tagger, const std::vector<SstInstance>& instances,
                        double threshold);
MetricGrid evaluate_mst(MstTagger& tagger, const std::vector<MstInstance>& instances,
                        double theta_t, double theta_g);

struct CvFoldResult {
  int fold = 0;
  MetricGrid values;
  TrainLog log;
};

struct MetricsReport {
  std::string model;
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;
  std::vector<CvFoldResult> folds;
};

struct ReportCell {
  int n = 0;  // folds where the cell was defined
  double mean = 0.0;
  double stdev = 0.0;  // population standard deviation across folds
};

ReportCell aggregate_cell(const std::vector<double>& values);
std::map<std::string, std::map<std::string, ReportCell>> aggregate_report(const MetricsReport& report);

// Fixed-width table of "mean±std" percent cells, one row per annotation type.
std::string render_metrics_table(const std::vector<std::string>& row_names,
                                 const std::vector<std::string>& col_names,
                                 const std::map<std::string, std::map<std::string, ReportCell>>& cells);

Json metrics_records(const MetricsReport& report);

// Train one tagger per fold (dev = the fold, train = the others), evaluate each on its
// dev fold, and optionally save fold models under out_dir/fold<i>/model.
MetricsReport run_cv(const Dataset& dataset, const FoldPlan& plan, const RunConfig& config,
                     const std::filesystem::path& out_dir = {});

// Convenience used by both run_cv and standalone evaluation: subset instances by id.
std::vector<SstInstance> select_sst(const std::vector<SstInstance>& all,
                                    const std::vector<std::string>& ids);
std::vector<MstInstance> select_mst(const std::vector<MstInstance>& all,
                                    const std::vector<std::string>& ids);

// Vocabulary over the token surfaces of the given instances.
Vocab vocab_from_sst(const std::vector<SstInstance>& instances);
Vocab vocab_from_mst(const std::vector<MstInstance>& instances);

}  // namespace causalkit
