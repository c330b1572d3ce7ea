#pragma once

#include <vector>

namespace causalkit {

// Binary precision/recall/F1 tallies. Empty tallies score 1.0: predicting
// nothing when there is nothing to find is a perfect outcome.
struct F1Counts {
  long tp = 0, fp = 0, fn = 0;

  void add(bool gold, bool pred) {
    if (gold && pred)
      ++tp;
    else if (!gold && pred)
      ++fp;
    else if (gold && !pred)
      ++fn;
  }
  void merge(const F1Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
  }
  bool empty() const { return tp == 0 && fp == 0 && fn == 0; }
  double precision() const {
    return tp + fp == 0 ? (fn == 0 ? 1.0 : 0.0) : static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  double recall() const {
    return tp + fn == 0 ? (fp == 0 ? 1.0 : 0.0) : static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  double f1() const {
    const long denom = 2 * tp + fp + fn;
    return denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_score = 0.0;
  bool improved = false;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  int best_epoch = -1;
  double best_dev_score = 0.0;
};

}  // namespace causalkit
