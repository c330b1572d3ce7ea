#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "causalkit/rng.hpp"

namespace causalkit::nn {

// Dense row-major matrix of doubles. Everything in the model stack is 2-D;
// token sequences are (n_tokens x dim).
struct Mat {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  double* data() { return a.data(); }
  const double* data() const { return a.data(); }
  size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  void zero() { std::fill(a.begin(), a.end(), 0.0); }
};

void init_gaussian(Mat& m, Rng& rng, double stddev);

// Named trainable tensor; grad is accumulated by Tape::backward.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;

  Parameter() = default;
  Parameter(std::string n, int rows, int cols) : name(std::move(n)), value(rows, cols), grad(rows, cols) {}
  void zero_grad() { grad.zero(); }
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. A tape is built per batch: leaves are created with
// input()/param()/embedding_rows(), ops record a closure that pushes
// gradients to their inputs, and backward() runs the closures in reverse
// creation order. All accumulation orders are fixed, so results are
// deterministic for a given op sequence.
class Tape {
 public:
  Var input(Mat m);
  Var param(Parameter& p);
  // Gather rows of an embedding table; backward scatter-adds into table.grad.
  Var embedding_rows(Parameter& table, std::vector<int> ids);

  Var matmul(Var a, Var b);     // A (m x k) * B (k x n)
  Var matmul_nt(Var a, Var b);  // A (m x k) * B^T with B (n x k)
  Var add(Var a, Var b);
  Var add_rowvec(Var a, Var v);  // v is (1 x cols), broadcast over rows
  Var scale(Var a, double s);
  Var hadamard(Var a, Var b);
  Var tanh_(Var a);
  Var sigmoid_(Var a);
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  Var softmax_rows(Var x);
  Var transpose(Var a);
  Var rows(Var a, std::vector<int> idx);
  Var concat_cols(Var a, Var b);
  Var tile_rows(Var v, int n);  // v (1 x d) -> (n x d)
  Var sum_all(Var a);           // (1 x 1)

  // Summed binary cross entropy on logits; targets are 0/1 per element,
  // pos_weight scales the positive-class term.
  Var bce_with_logits_sum(Var logits, std::vector<double> targets, double pos_weight = 1.0);
  // Summed softmax cross entropy per row; targets are class indices.
  Var ce_with_logits_sum(Var logits, std::vector<int> targets);

  const Mat& value(Var v) const;
  void backward(Var loss);

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Mat val;
    Mat grad;  // allocated on first touch
    bool needs_grad = false;
    std::function<void(Tape&)> back;
    Parameter* bound = nullptr;
  };

  std::vector<Node> nodes_;

  int push(Mat val, bool needs_grad);
  Mat& grad(int id);
  bool needs(int id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }
  const Mat& val(int id) const { return nodes_[static_cast<size_t>(id)].val; }
};

class Adam {
 public:
  explicit Adam(std::vector<Parameter*> params, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);
  void step();
  void zero_grad();
  double lr() const { return lr_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Mat> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
};

// Flat parameter vector helpers (model snapshots, checkpoints, gradient
// checks).
std::vector<double> flatten_values(const std::vector<Parameter*>& params);
void unflatten_values(const std::vector<double>& flat, const std::vector<Parameter*>& params);
std::vector<double> flatten_grads(const std::vector<Parameter*>& params);
void zero_grads(const std::vector<Parameter*>& params);

}  // namespace causalkit::nn

namespace causalkit {
using nn::Adam;
using nn::flatten_grads;
using nn::flatten_values;
using nn::init_gaussian;
using nn::Mat;
using nn::Parameter;
using nn::Tape;
using nn::unflatten_values;
using nn::Var;
using nn::zero_grads;
}  // namespace causalkit
