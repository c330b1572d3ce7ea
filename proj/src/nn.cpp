#include "causalkit/nn.hpp"

#include <cmath>

#include "causalkit/errors.hpp"
#include "causalkit/kernels.hpp"

namespace causalkit::nn {

namespace {
inline double softplus(double z) {
  return (z > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::fabs(z)));
}
inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

void init_gaussian(Mat& m, Rng& rng, double stddev) {
  for (auto& x : m.a) x = rng.gaussian() * stddev;
}

int Tape::push(Mat val, bool needs_grad) {
  Node n;
  n.val = std::move(val);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Mat& Tape::grad(int id) {
  Node& n = nodes_[static_cast<size_t>(id)];
  if (n.grad.rows != n.val.rows || n.grad.cols != n.val.cols) n.grad = Mat(n.val.rows, n.val.cols);
  return n.grad;
}

const Mat& Tape::value(Var v) const {
  check_contract(v.valid() && v.id < static_cast<int>(nodes_.size()), "tape: invalid var");
  return nodes_[static_cast<size_t>(v.id)].val;
}

Var Tape::input(Mat m) { return {push(std::move(m), false)}; }

Var Tape::param(Parameter& p) {
  const int id = push(p.value, true);
  nodes_[static_cast<size_t>(id)].bound = &p;
  nodes_[static_cast<size_t>(id)].back = [id](Tape& t) {
    Node& n = t.nodes_[static_cast<size_t>(id)];
    const Mat& g = t.grad(id);
    for (size_t i = 0; i < g.size(); ++i) n.bound->grad.a[i] += g.a[i];
  };
  return {id};
}

Var Tape::embedding_rows(Parameter& table, std::vector<int> ids) {
  const int d = table.value.cols;
  Mat out(static_cast<int>(ids.size()), d);
  for (size_t r = 0; r < ids.size(); ++r) {
    check_contract(ids[r] >= 0 && ids[r] < table.value.rows, "embedding_rows: id out of range");
    for (int c = 0; c < d; ++c) out.at(static_cast<int>(r), c) = table.value.at(ids[r], c);
  }
  const int id = push(std::move(out), true);
  nodes_[static_cast<size_t>(id)].bound = &table;
  auto idx = std::make_shared<std::vector<int>>(std::move(ids));
  nodes_[static_cast<size_t>(id)].back = [id, idx](Tape& t) {
    Node& n = t.nodes_[static_cast<size_t>(id)];
    const Mat& g = t.grad(id);
    const int d2 = g.cols;
    for (size_t r = 0; r < idx->size(); ++r)
      for (int c = 0; c < d2; ++c) n.bound->grad.at((*idx)[r], c) += g.at(static_cast<int>(r), c);
  };
  return {id};
}

Var Tape::matmul(Var a, Var b) {
  const Mat& A = val(a.id);
  const Mat& B = val(b.id);
  check_contract(A.cols == B.rows, "matmul: inner dimensions differ");
  Mat C(A.rows, B.cols);
  kernels::matmul_nn(A.data(), B.data(), C.data(), A.rows, A.cols, B.cols);
  const bool ng = needs(a.id) || needs(b.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a, b](Tape& t) {
      const Mat& g = t.grad(id);
      const Mat& A2 = t.val(a.id);
      const Mat& B2 = t.val(b.id);
      if (t.needs(a.id))
        kernels::matmul_nt(g.data(), B2.data(), t.grad(a.id).data(), g.rows, g.cols, B2.rows, true);
      if (t.needs(b.id))
        kernels::matmul_tn(A2.data(), g.data(), t.grad(b.id).data(), A2.cols, A2.rows, g.cols, true);
    };
  return {id};
}

Var Tape::matmul_nt(Var a, Var b) {
  const Mat& A = val(a.id);
  const Mat& B = val(b.id);
  check_contract(A.cols == B.cols, "matmul_nt: inner dimensions differ");
  Mat C(A.rows, B.rows);
  kernels::matmul_nt(A.data(), B.data(), C.data(), A.rows, A.cols, B.rows);
  const bool ng = needs(a.id) || needs(b.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a, b](Tape& t) {
      const Mat& g = t.grad(id);
      const Mat& A2 = t.val(a.id);
      const Mat& B2 = t.val(b.id);
      if (t.needs(a.id))
        kernels::matmul_nn(g.data(), B2.data(), t.grad(a.id).data(), g.rows, g.cols, B2.cols, true);
      if (t.needs(b.id))
        kernels::matmul_tn(g.data(), A2.data(), t.grad(b.id).data(), g.cols, g.rows, A2.cols, true);
    };
  return {id};
}

Var Tape::add(Var a, Var b) {
  const Mat& A = val(a.id);
  const Mat& B = val(b.id);
  check_contract(A.same_shape(B), "add: shape mismatch");
  Mat C = A;
  for (size_t i = 0; i < C.size(); ++i) C.a[i] += B.a[i];
  const bool ng = needs(a.id) || needs(b.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a, b](Tape& t) {
      const Mat& g = t.grad(id);
      if (t.needs(a.id)) {
        Mat& ga = t.grad(a.id);
        for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i];
      }
      if (t.needs(b.id)) {
        Mat& gb = t.grad(b.id);
        for (size_t i = 0; i < g.size(); ++i) gb.a[i] += g.a[i];
      }
    };
  return {id};
}

Var Tape::add_rowvec(Var a, Var v) {
  const Mat& A = val(a.id);
  const Mat& V = val(v.id);
  check_contract(V.rows == 1 && V.cols == A.cols, "add_rowvec: vector shape mismatch");
  Mat C = A;
  for (int r = 0; r < C.rows; ++r)
    for (int c = 0; c < C.cols; ++c) C.at(r, c) += V.at(0, c);
  const bool ng = needs(a.id) || needs(v.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a, v](Tape& t) {
      const Mat& g = t.grad(id);
      if (t.needs(a.id)) {
        Mat& ga = t.grad(a.id);
        for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i];
      }
      if (t.needs(v.id)) {
        Mat& gv = t.grad(v.id);
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < g.cols; ++c) gv.at(0, c) += g.at(r, c);
      }
    };
  return {id};
}

Var Tape::scale(Var a, double s) {
  Mat C = val(a.id);
  for (auto& x : C.a) x *= s;
  const bool ng = needs(a.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a, s](Tape& t) {
      const Mat& g = t.grad(id);
      Mat& ga = t.grad(a.id);
      for (size_t i = 0; i < g.size(); ++i) ga.a[i] += s * g.a[i];
    };
  return {id};
}

Var Tape::hadamard(Var a, Var b) {
  const Mat& A = val(a.id);
  const Mat& B = val(b.id);
  check_contract(A.same_shape(B), "hadamard: shape mismatch");
  Mat C = A;
  for (size_t i = 0; i < C.size(); ++i) C.a[i] *= B.a[i];
  const bool ng = needs(a.id) || needs(b.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a, b](Tape& t) {
      const Mat& g = t.grad(id);
      const Mat& A2 = t.val(a.id);
      const Mat& B2 = t.val(b.id);
      if (t.needs(a.id)) {
        Mat& ga = t.grad(a.id);
        for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] * B2.a[i];
      }
      if (t.needs(b.id)) {
        Mat& gb = t.grad(b.id);
        for (size_t i = 0; i < g.size(); ++i) gb.a[i] += g.a[i] * A2.a[i];
      }
    };
  return {id};
}

Var Tape::tanh_(Var a) {
  Mat C = val(a.id);
  for (auto& x : C.a) x = std::tanh(x);
  const bool ng = needs(a.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a](Tape& t) {
      const Mat& g = t.grad(id);
      const Mat& y = t.val(id);
      Mat& ga = t.grad(a.id);
      for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] * (1.0 - y.a[i] * y.a[i]);
    };
  return {id};
}

Var Tape::sigmoid_(Var a) {
  Mat C = val(a.id);
  for (auto& x : C.a) x = sigmoid(x);
  const bool ng = needs(a.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a](Tape& t) {
      const Mat& g = t.grad(id);
      const Mat& y = t.val(id);
      Mat& ga = t.grad(a.id);
      for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] * y.a[i] * (1.0 - y.a[i]);
    };
  return {id};
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
  const Mat& X = val(x.id);
  const Mat& G = val(gain.id);
  const Mat& B = val(bias.id);
  check_contract(G.rows == 1 && G.cols == X.cols && B.rows == 1 && B.cols == X.cols,
                 "layer_norm: gain/bias shape mismatch");
  Mat Y(X.rows, X.cols);
  auto mean = std::make_shared<std::vector<double>>(static_cast<size_t>(X.rows));
  auto rstd = std::make_shared<std::vector<double>>(static_cast<size_t>(X.rows));
  kernels::layer_norm_rows(X.data(), G.data(), B.data(), Y.data(), mean->data(), rstd->data(),
                           X.rows, X.cols, eps);
  const bool ng = needs(x.id) || needs(gain.id) || needs(bias.id);
  const int id = push(std::move(Y), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, x, gain, bias, mean, rstd](Tape& t) {
      const Mat& g = t.grad(id);
      const Mat& X2 = t.val(x.id);
      const Mat& G2 = t.val(gain.id);
      if (t.needs(x.id))
        kernels::layer_norm_backward_rows(g.data(), X2.data(), G2.data(), mean->data(),
                                          rstd->data(), t.grad(x.id).data(), X2.rows, X2.cols);
      if (t.needs(gain.id)) {
        Mat& gg = t.grad(gain.id);
        for (int r = 0; r < X2.rows; ++r)
          for (int c = 0; c < X2.cols; ++c)
            gg.at(0, c) += g.at(r, c) * (X2.at(r, c) - (*mean)[static_cast<size_t>(r)]) *
                           (*rstd)[static_cast<size_t>(r)];
      }
      if (t.needs(bias.id)) {
        Mat& gb = t.grad(bias.id);
        for (int r = 0; r < X2.rows; ++r)
          for (int c = 0; c < X2.cols; ++c) gb.at(0, c) += g.at(r, c);
      }
    };
  return {id};
}

Var Tape::softmax_rows(Var x) {
  const Mat& X = val(x.id);
  Mat Y(X.rows, X.cols);
  if (X.rows > 0) kernels::softmax_rows(X.data(), Y.data(), X.rows, X.cols);
  const bool ng = needs(x.id);
  const int id = push(std::move(Y), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, x](Tape& t) {
      const Mat& g = t.grad(id);
      const Mat& y = t.val(id);
      if (g.rows > 0)
        kernels::softmax_backward_rows(g.data(), y.data(), t.grad(x.id).data(), g.rows, g.cols);
    };
  return {id};
}

Var Tape::transpose(Var a) {
  const Mat& A = val(a.id);
  Mat C(A.cols, A.rows);
  for (int r = 0; r < A.rows; ++r)
    for (int c = 0; c < A.cols; ++c) C.at(c, r) = A.at(r, c);
  const bool ng = needs(a.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a](Tape& t) {
      const Mat& g = t.grad(id);
      Mat& ga = t.grad(a.id);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) ga.at(c, r) += g.at(r, c);
    };
  return {id};
}

Var Tape::rows(Var a, std::vector<int> idx) {
  const Mat& A = val(a.id);
  Mat C(static_cast<int>(idx.size()), A.cols);
  for (size_t r = 0; r < idx.size(); ++r) {
    check_contract(idx[r] >= 0 && idx[r] < A.rows, "rows: index out of range");
    for (int c = 0; c < A.cols; ++c) C.at(static_cast<int>(r), c) = A.at(idx[r], c);
  }
  const bool ng = needs(a.id);
  const int id = push(std::move(C), ng);
  if (ng) {
    auto ix = std::make_shared<std::vector<int>>(std::move(idx));
    nodes_[static_cast<size_t>(id)].back = [id, a, ix](Tape& t) {
      const Mat& g = t.grad(id);
      Mat& ga = t.grad(a.id);
      for (size_t r = 0; r < ix->size(); ++r)
        for (int c = 0; c < g.cols; ++c) ga.at((*ix)[r], c) += g.at(static_cast<int>(r), c);
    };
  }
  return {id};
}

Var Tape::concat_cols(Var a, Var b) {
  const Mat& A = val(a.id);
  const Mat& B = val(b.id);
  check_contract(A.rows == B.rows, "concat_cols: row count mismatch");
  Mat C(A.rows, A.cols + B.cols);
  for (int r = 0; r < A.rows; ++r) {
    for (int c = 0; c < A.cols; ++c) C.at(r, c) = A.at(r, c);
    for (int c = 0; c < B.cols; ++c) C.at(r, A.cols + c) = B.at(r, c);
  }
  const bool ng = needs(a.id) || needs(b.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a, b](Tape& t) {
      const Mat& g = t.grad(id);
      const int ca = t.val(a.id).cols;
      const int cb = t.val(b.id).cols;
      if (t.needs(a.id)) {
        Mat& ga = t.grad(a.id);
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < ca; ++c) ga.at(r, c) += g.at(r, c);
      }
      if (t.needs(b.id)) {
        Mat& gb = t.grad(b.id);
        for (int r = 0; r < g.rows; ++r)
          for (int c = 0; c < cb; ++c) gb.at(r, c) += g.at(r, ca + c);
      }
    };
  return {id};
}

Var Tape::tile_rows(Var v, int n) {
  const Mat& V = val(v.id);
  check_contract(V.rows == 1, "tile_rows: input must be a single row");
  Mat C(n, V.cols);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < V.cols; ++c) C.at(r, c) = V.at(0, c);
  const bool ng = needs(v.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, v](Tape& t) {
      const Mat& g = t.grad(id);
      Mat& gv = t.grad(v.id);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) gv.at(0, c) += g.at(r, c);
    };
  return {id};
}

Var Tape::sum_all(Var a) {
  const Mat& A = val(a.id);
  Mat C(1, 1);
  double s = 0.0;
  for (const double x : A.a) s += x;
  C.at(0, 0) = s;
  const bool ng = needs(a.id);
  const int id = push(std::move(C), ng);
  if (ng)
    nodes_[static_cast<size_t>(id)].back = [id, a](Tape& t) {
      const double g = t.grad(id).at(0, 0);
      Mat& ga = t.grad(a.id);
      for (auto& x : ga.a) x += g;
    };
  return {id};
}

Var Tape::bce_with_logits_sum(Var logits, std::vector<double> targets, double pos_weight) {
  const Mat& Z = val(logits.id);
  check_contract(targets.size() == Z.size(), "bce_with_logits_sum: target count mismatch");
  Mat C(1, 1);
  double loss = 0.0;
  for (size_t i = 0; i < Z.size(); ++i) {
    const double z = Z.a[i];
    const double y = targets[i];
    loss += pos_weight * y * softplus(-z) + (1.0 - y) * softplus(z);
  }
  C.at(0, 0) = loss;
  const bool ng = needs(logits.id);
  const int id = push(std::move(C), ng);
  if (ng) {
    auto tg = std::make_shared<std::vector<double>>(std::move(targets));
    nodes_[static_cast<size_t>(id)].back = [id, logits, tg, pos_weight](Tape& t) {
      const double g = t.grad(id).at(0, 0);
      const Mat& Z2 = t.val(logits.id);
      Mat& gz = t.grad(logits.id);
      for (size_t i = 0; i < Z2.size(); ++i) {
        const double s = sigmoid(Z2.a[i]);
        const double y = (*tg)[i];
        gz.a[i] += g * (pos_weight * y * (s - 1.0) + (1.0 - y) * s);
      }
    };
  }
  return {id};
}

Var Tape::ce_with_logits_sum(Var logits, std::vector<int> targets) {
  const Mat& Z = val(logits.id);
  check_contract(static_cast<int>(targets.size()) == Z.rows, "ce_with_logits_sum: target count mismatch");
  Mat C(1, 1);
  double loss = 0.0;
  for (int r = 0; r < Z.rows; ++r) {
    check_contract(targets[static_cast<size_t>(r)] >= 0 && targets[static_cast<size_t>(r)] < Z.cols,
                   "ce_with_logits_sum: class index out of range");
    double mx = Z.at(r, 0);
    for (int c = 1; c < Z.cols; ++c) mx = std::max(mx, Z.at(r, c));
    double lse = 0.0;
    for (int c = 0; c < Z.cols; ++c) lse += std::exp(Z.at(r, c) - mx);
    loss += mx + std::log(lse) - Z.at(r, targets[static_cast<size_t>(r)]);
  }
  C.at(0, 0) = loss;
  const bool ng = needs(logits.id);
  const int id = push(std::move(C), ng);
  if (ng) {
    auto tg = std::make_shared<std::vector<int>>(std::move(targets));
    nodes_[static_cast<size_t>(id)].back = [id, logits, tg](Tape& t) {
      const double g = t.grad(id).at(0, 0);
      const Mat& Z2 = t.val(logits.id);
      Mat& gz = t.grad(logits.id);
      for (int r = 0; r < Z2.rows; ++r) {
        double mx = Z2.at(r, 0);
        for (int c = 1; c < Z2.cols; ++c) mx = std::max(mx, Z2.at(r, c));
        double lse = 0.0;
        for (int c = 0; c < Z2.cols; ++c) lse += std::exp(Z2.at(r, c) - mx);
        for (int c = 0; c < Z2.cols; ++c) {
          const double p = std::exp(Z2.at(r, c) - mx) / lse;
          gz.at(r, c) += g * (p - (c == (*tg)[static_cast<size_t>(r)] ? 1.0 : 0.0));
        }
      }
    };
  }
  return {id};
}

void Tape::backward(Var loss) {
  check_contract(loss.valid() && loss.id < static_cast<int>(nodes_.size()), "backward: invalid loss var");
  const Mat& lv = nodes_[static_cast<size_t>(loss.id)].val;
  check_contract(lv.rows == 1 && lv.cols == 1, "backward: loss must be scalar");
  grad(loss.id).at(0, 0) = 1.0;
  for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
    Node& n = nodes_[static_cast<size_t>(id)];
    if (n.needs_grad && n.back) {
      grad(id);  // make sure the output grad exists even if untouched
      n.back(*this);
    }
  }
}

Adam::Adam(std::vector<Parameter*> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Parameter* p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    for (size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad.a[j];
      m_[i].a[j] = beta1_ * m_[i].a[j] + (1.0 - beta1_) * g;
      v_[i].a[j] = beta2_ * v_[i].a[j] + (1.0 - beta2_) * g * g;
      const double mhat = m_[i].a[j] / c1;
      const double vhat = v_[i].a[j] / c2;
      p.value.a[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

std::vector<double> flatten_values(const std::vector<Parameter*>& params) {
  std::vector<double> out;
  for (const Parameter* p : params) out.insert(out.end(), p->value.a.begin(), p->value.a.end());
  return out;
}

void unflatten_values(const std::vector<double>& flat, const std::vector<Parameter*>& params) {
  size_t off = 0;
  for (Parameter* p : params) {
    check_contract(off + p->value.size() <= flat.size(), "unflatten_values: size mismatch");
    std::copy(flat.begin() + static_cast<long>(off),
              flat.begin() + static_cast<long>(off + p->value.size()), p->value.a.begin());
    off += p->value.size();
  }
  check_contract(off == flat.size(), "unflatten_values: size mismatch");
}

std::vector<double> flatten_grads(const std::vector<Parameter*>& params) {
  std::vector<double> out;
  for (const Parameter* p : params) out.insert(out.end(), p->grad.a.begin(), p->grad.a.end());
  return out;
}

void zero_grads(const std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace causalkit::nn
