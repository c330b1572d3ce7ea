#include <cmath>
#include <vector>

#include "causalkit/kernels.hpp"
#include "causalkit/rng.hpp"
#include "doctest.h"

using namespace causalkit;
namespace k = causalkit::kernels;

namespace {

std::vector<double> random_mat(Rng& rng, int rows, int cols, double scale = 1.0) {
  std::vector<double> m(static_cast<size_t>(rows) * cols);
  for (double& v : m) v = rng.gaussian() * scale;
  return m;
}

// Straight-from-the-definition matrix products used as oracles. Accumulation
// order matches no particular kernel, so comparisons are approximate.
std::vector<double> naive_nn(const std::vector<double>& a, const std::vector<double>& b,
                             int m, int kk, int n) {
  std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int p = 0; p < kk; ++p) s += a[i * kk + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  return c;
}

std::vector<double> naive_nt(const std::vector<double>& a, const std::vector<double>& b,
                             int m, int kk, int n) {
  std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int p = 0; p < kk; ++p) s += a[i * kk + p] * b[j * kk + p];
      c[i * n + j] = s;
    }
  return c;
}

std::vector<double> naive_tn(const std::vector<double>& a, const std::vector<double>& b,
                             int m, int kk, int n) {
  std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int p = 0; p < kk; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] = s;
    }
  return c;
}

void check_close(const std::vector<double>& got, const std::vector<double>& want,
                 double tol = 1e-10) {
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); ++i) {
    double denom = std::max({std::fabs(want[i]), std::fabs(got[i]), 1.0});
    CHECK(std::fabs(got[i] - want[i]) / denom <= tol);
  }
}

}  // namespace

TEST_SUITE_BEGIN("kernels");

TEST_CASE("matmul variants match the textbook definition") {
  Rng rng(7);
  // Shapes chosen to include 1, primes, and sizes straddling the parallel
  // cutoff (64*64*64 * 2 flops > 1<<16).
  const int shapes[][3] = {{1, 1, 1}, {3, 5, 7}, {16, 16, 16}, {33, 17, 9}, {64, 64, 64}};
  for (const auto& s : shapes) {
    int m = s[0], kk = s[1], n = s[2];
    auto a = random_mat(rng, m, kk);
    auto b_nn = random_mat(rng, kk, n);
    auto b_nt = random_mat(rng, n, kk);
    auto a_tn = random_mat(rng, kk, m);

    std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
    k::matmul_nn(a.data(), b_nn.data(), c.data(), m, kk, n);
    check_close(c, naive_nn(a, b_nn, m, kk, n));

    k::matmul_nt(a.data(), b_nt.data(), c.data(), m, kk, n);
    check_close(c, naive_nt(a, b_nt, m, kk, n));

    k::matmul_tn(a_tn.data(), b_nn.data(), c.data(), m, kk, n);
    check_close(c, naive_tn(a_tn, b_nn, m, kk, n));
  }
}

TEST_CASE("accumulate flag adds on top of existing output") {
  Rng rng(11);
  int m = 5, kk = 4, n = 6;
  auto a = random_mat(rng, m, kk);
  auto b = random_mat(rng, kk, n);
  auto base = random_mat(rng, m, n);

  std::vector<double> c = base;
  k::matmul_nn(a.data(), b.data(), c.data(), m, kk, n, /*acc=*/true);
  auto prod = naive_nn(a, b, m, kk, n);
  std::vector<double> want(base.size());
  for (size_t i = 0; i < want.size(); ++i) want[i] = base[i] + prod[i];
  check_close(c, want);
}

TEST_CASE("parallel kernels are bitwise identical to the serial reference") {
  Rng rng(13);
  // Cover sizes below and above the parallel cutoff, including row counts
  // that do not divide evenly among threads.
  const int shapes[][3] = {{2, 3, 2}, {7, 31, 5}, {65, 33, 29}, {128, 64, 64}};
  for (const auto& s : shapes) {
    int m = s[0], kk = s[1], n = s[2];
    auto a = random_mat(rng, m, kk);
    auto b_nn = random_mat(rng, kk, n);
    auto b_nt = random_mat(rng, n, kk);
    auto a_tn = random_mat(rng, kk, m);
    std::vector<double> c1(static_cast<size_t>(m) * n), c2(c1.size());

    k::matmul_nn_serial(a.data(), b_nn.data(), c1.data(), m, kk, n);
    k::matmul_nn(a.data(), b_nn.data(), c2.data(), m, kk, n);
    CHECK(c1 == c2);

    k::matmul_nt_serial(a.data(), b_nt.data(), c1.data(), m, kk, n);
    k::matmul_nt(a.data(), b_nt.data(), c2.data(), m, kk, n);
    CHECK(c1 == c2);

    k::matmul_tn_serial(a_tn.data(), b_nn.data(), c1.data(), m, kk, n);
    k::matmul_tn(a_tn.data(), b_nn.data(), c2.data(), m, kk, n);
    CHECK(c1 == c2);

    auto x = random_mat(rng, m, n);
    std::vector<double> y1(x.size()), y2(x.size());
    k::softmax_rows_serial(x.data(), y1.data(), m, n);
    k::softmax_rows(x.data(), y2.data(), m, n);
    CHECK(y1 == y2);

    auto gain = random_mat(rng, 1, n);
    auto bias = random_mat(rng, 1, n);
    std::vector<double> mean1(m), mean2(m), rstd1(m), rstd2(m);
    k::layer_norm_rows_serial(x.data(), gain.data(), bias.data(), y1.data(), mean1.data(),
                              rstd1.data(), m, n, 1e-5);
    k::layer_norm_rows(x.data(), gain.data(), bias.data(), y2.data(), mean2.data(),
                       rstd2.data(), m, n, 1e-5);
    CHECK(y1 == y2);
    CHECK(mean1 == mean2);
    CHECK(rstd1 == rstd2);

    auto gy = random_mat(rng, m, n);
    std::vector<double> gx1(x.size()), gx2(x.size());
    k::layer_norm_backward_rows_serial(gy.data(), x.data(), gain.data(), mean1.data(),
                                       rstd1.data(), gx1.data(), m, n);
    k::layer_norm_backward_rows(gy.data(), x.data(), gain.data(), mean1.data(), rstd1.data(),
                                gx2.data(), m, n);
    CHECK(gx1 == gx2);

    k::softmax_rows_serial(x.data(), y1.data(), m, n);
    k::softmax_backward_rows_serial(gy.data(), y1.data(), gx1.data(), m, n);
    k::softmax_backward_rows(gy.data(), y1.data(), gx2.data(), m, n);
    CHECK(gx1 == gx2);
  }
}

TEST_CASE("softmax rows are positive, normalized, and shift-invariant") {
  Rng rng(17);
  int rows = 6, cols = 9;
  auto x = random_mat(rng, rows, cols, 3.0);
  std::vector<double> y(x.size());
  k::softmax_rows(x.data(), y.data(), rows, cols);
  for (int r = 0; r < rows; ++r) {
    double sum = 0;
    for (int c = 0; c < cols; ++c) {
      CHECK(y[r * cols + c] > 0.0);
      sum += y[r * cols + c];
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }

  // Adding a constant per row must not change the result (max subtraction).
  auto x2 = x;
  for (int c = 0; c < cols; ++c) x2[2 * cols + c] += 1000.0;
  std::vector<double> y2(x.size());
  k::softmax_rows(x2.data(), y2.data(), rows, cols);
  for (int c = 0; c < cols; ++c)
    CHECK(std::fabs(y2[2 * cols + c] - y[2 * cols + c]) < 1e-9);
}

TEST_CASE("layer norm output matches the direct formula") {
  Rng rng(19);
  int rows = 4, cols = 8;
  double eps = 1e-5;
  auto x = random_mat(rng, rows, cols, 2.0);
  auto gain = random_mat(rng, 1, cols);
  auto bias = random_mat(rng, 1, cols);
  std::vector<double> y(x.size()), mean(rows), rstd(rows);
  k::layer_norm_rows(x.data(), gain.data(), bias.data(), y.data(), mean.data(), rstd.data(),
                     rows, cols, eps);
  for (int r = 0; r < rows; ++r) {
    double mu = 0;
    for (int c = 0; c < cols; ++c) mu += x[r * cols + c];
    mu /= cols;
    double var = 0;
    for (int c = 0; c < cols; ++c) {
      double d = x[r * cols + c] - mu;
      var += d * d;
    }
    var /= cols;
    CHECK(std::fabs(mean[r] - mu) < 1e-12);
    CHECK(std::fabs(rstd[r] - 1.0 / std::sqrt(var + eps)) < 1e-12);
    for (int c = 0; c < cols; ++c) {
      double want = (x[r * cols + c] - mu) / std::sqrt(var + eps) * gain[c] + bias[c];
      CHECK(std::fabs(y[r * cols + c] - want) < 1e-10);
    }
  }
}

TEST_CASE("backward kernels agree with central finite differences") {
  Rng rng(23);
  int rows = 3, cols = 5;
  auto x = random_mat(rng, rows, cols);
  auto gy = random_mat(rng, rows, cols);
  const double eps_fd = 1e-6;

  SUBCASE("softmax input gradient") {
    std::vector<double> y(x.size());
    k::softmax_rows(x.data(), y.data(), rows, cols);
    std::vector<double> gx(x.size());
    k::softmax_backward_rows(gy.data(), y.data(), gx.data(), rows, cols);
    for (size_t i = 0; i < x.size(); ++i) {
      auto value = [&](double delta) {
        auto xx = x;
        xx[i] += delta;
        std::vector<double> yy(x.size());
        k::softmax_rows(xx.data(), yy.data(), rows, cols);
        double loss = 0;
        for (size_t j = 0; j < yy.size(); ++j) loss += gy[j] * yy[j];
        return loss;
      };
      double numeric = (value(eps_fd) - value(-eps_fd)) / (2 * eps_fd);
      CHECK(std::fabs(numeric - gx[i]) < 1e-7);
    }
  }

  SUBCASE("layer norm input gradient") {
    auto gain = random_mat(rng, 1, cols);
    auto bias = random_mat(rng, 1, cols);
    std::vector<double> y(x.size()), mean(rows), rstd(rows);
    k::layer_norm_rows(x.data(), gain.data(), bias.data(), y.data(), mean.data(), rstd.data(),
                       rows, cols, 1e-5);
    std::vector<double> gx(x.size());
    k::layer_norm_backward_rows(gy.data(), x.data(), gain.data(), mean.data(), rstd.data(),
                                gx.data(), rows, cols);
    for (size_t i = 0; i < x.size(); ++i) {
      auto value = [&](double delta) {
        auto xx = x;
        xx[i] += delta;
        std::vector<double> yy(x.size()), mm(rows), rr(rows);
        k::layer_norm_rows(xx.data(), gain.data(), bias.data(), yy.data(), mm.data(),
                           rr.data(), rows, cols, 1e-5);
        double loss = 0;
        for (size_t j = 0; j < yy.size(); ++j) loss += gy[j] * yy[j];
        return loss;
      };
      double numeric = (value(eps_fd) - value(-eps_fd)) / (2 * eps_fd);
      CHECK(std::fabs(numeric - gx[i]) < 1e-6);
    }
  }
}

TEST_SUITE_END();
