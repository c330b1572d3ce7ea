#include "causalkit/kernels.hpp"

#include <cmath>

namespace causalkit::kernels {

namespace {

inline bool big_enough(long m, long k, long n) { return m * k * n >= kParallelFlopCutoff; }

inline void nn_row(const double* a, const double* b, double* c, int k, int n, int i, bool acc) {
  double* ci = c + static_cast<size_t>(i) * n;
  if (!acc)
    for (int j = 0; j < n; ++j) ci[j] = 0.0;
  const double* ai = a + static_cast<size_t>(i) * k;
  for (int l = 0; l < k; ++l) {
    const double ail = ai[l];
    const double* bl = b + static_cast<size_t>(l) * n;
    for (int j = 0; j < n; ++j) ci[j] += ail * bl[j];
  }
}

inline void nt_row(const double* a, const double* b, double* c, int k, int n, int i, bool acc) {
  const double* ai = a + static_cast<size_t>(i) * k;
  double* ci = c + static_cast<size_t>(i) * n;
  for (int j = 0; j < n; ++j) {
    const double* bj = b + static_cast<size_t>(j) * k;
    double s = 0.0;
    for (int l = 0; l < k; ++l) s += ai[l] * bj[l];
    ci[j] = acc ? ci[j] + s : s;
  }
}

inline void tn_row(const double* a, const double* b, double* c, int m, int k, int n, int i, bool acc) {
  double* ci = c + static_cast<size_t>(i) * n;
  if (!acc)
    for (int j = 0; j < n; ++j) ci[j] = 0.0;
  for (int l = 0; l < k; ++l) {
    const double ali = a[static_cast<size_t>(l) * m + i];
    const double* bl = b + static_cast<size_t>(l) * n;
    for (int j = 0; j < n; ++j) ci[j] += ali * bl[j];
  }
}

inline void softmax_row(const double* x, double* y, int cols, int r) {
  const double* xr = x + static_cast<size_t>(r) * cols;
  double* yr = y + static_cast<size_t>(r) * cols;
  double mx = xr[0];
  for (int j = 1; j < cols; ++j)
    if (xr[j] > mx) mx = xr[j];
  double z = 0.0;
  for (int j = 0; j < cols; ++j) {
    yr[j] = std::exp(xr[j] - mx);
    z += yr[j];
  }
  const double inv = 1.0 / z;
  for (int j = 0; j < cols; ++j) yr[j] *= inv;
}

inline void layer_norm_row(const double* x, const double* gain, const double* bias, double* y,
                           double* mean, double* rstd, int cols, double eps, int r) {
  const double* xr = x + static_cast<size_t>(r) * cols;
  double* yr = y + static_cast<size_t>(r) * cols;
  double mu = 0.0;
  for (int j = 0; j < cols; ++j) mu += xr[j];
  mu /= cols;
  double var = 0.0;
  for (int j = 0; j < cols; ++j) {
    const double d = xr[j] - mu;
    var += d * d;
  }
  var /= cols;
  const double rs = 1.0 / std::sqrt(var + eps);
  mean[r] = mu;
  rstd[r] = rs;
  for (int j = 0; j < cols; ++j) yr[j] = (xr[j] - mu) * rs * gain[j] + bias[j];
}

inline void layer_norm_backward_row(const double* gy, const double* x, const double* gain,
                                    const double* mean, const double* rstd, double* gx,
                                    int cols, int r) {
  const double* gyr = gy + static_cast<size_t>(r) * cols;
  const double* xr = x + static_cast<size_t>(r) * cols;
  double* gxr = gx + static_cast<size_t>(r) * cols;
  const double mu = mean[r];
  const double rs = rstd[r];
  // d/dx of y = (x - mu) * rs * gain + bias with mu, rs functions of x.
  double sum_g = 0.0, sum_gx = 0.0;
  for (int j = 0; j < cols; ++j) {
    const double gj = gyr[j] * gain[j];
    sum_g += gj;
    sum_gx += gj * (xr[j] - mu);
  }
  const double inv_n = 1.0 / cols;
  for (int j = 0; j < cols; ++j) {
    const double gj = gyr[j] * gain[j];
    const double xc = xr[j] - mu;
    gxr[j] += rs * (gj - inv_n * sum_g - xc * rs * rs * inv_n * sum_gx);
  }
}

inline void softmax_backward_row(const double* gy, const double* y, double* gx, int cols, int r) {
  const double* gyr = gy + static_cast<size_t>(r) * cols;
  const double* yr = y + static_cast<size_t>(r) * cols;
  double* gxr = gx + static_cast<size_t>(r) * cols;
  double dot = 0.0;
  for (int j = 0; j < cols; ++j) dot += gyr[j] * yr[j];
  for (int j = 0; j < cols; ++j) gxr[j] += (gyr[j] - dot) * yr[j];
}

}  // namespace

void matmul_nn_serial(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) nn_row(a, b, c, k, n, i, acc);
}

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  const bool par = big_enough(m, k, n);
#pragma omp parallel for schedule(static) if (par)
  for (int i = 0; i < m; ++i) nn_row(a, b, c, k, n, i, acc);
}

void matmul_nt_serial(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) nt_row(a, b, c, k, n, i, acc);
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  const bool par = big_enough(m, k, n);
#pragma omp parallel for schedule(static) if (par)
  for (int i = 0; i < m; ++i) nt_row(a, b, c, k, n, i, acc);
}

void matmul_tn_serial(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  for (int i = 0; i < m; ++i) tn_row(a, b, c, m, k, n, i, acc);
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
  const bool par = big_enough(m, k, n);
#pragma omp parallel for schedule(static) if (par)
  for (int i = 0; i < m; ++i) tn_row(a, b, c, m, k, n, i, acc);
}

void softmax_rows_serial(const double* x, double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) softmax_row(x, y, cols, r);
}

void softmax_rows(const double* x, double* y, int rows, int cols) {
  const bool par = static_cast<long>(rows) * cols >= kParallelFlopCutoff;
#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < rows; ++r) softmax_row(x, y, cols, r);
}

void layer_norm_rows_serial(const double* x, const double* gain, const double* bias, double* y,
                            double* mean, double* rstd, int rows, int cols, double eps) {
  for (int r = 0; r < rows; ++r) layer_norm_row(x, gain, bias, y, mean, rstd, cols, eps, r);
}

void layer_norm_rows(const double* x, const double* gain, const double* bias, double* y,
                     double* mean, double* rstd, int rows, int cols, double eps) {
  const bool par = static_cast<long>(rows) * cols >= kParallelFlopCutoff;
#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < rows; ++r) layer_norm_row(x, gain, bias, y, mean, rstd, cols, eps, r);
}

void layer_norm_backward_rows_serial(const double* gy, const double* x, const double* gain,
                                     const double* mean, const double* rstd, double* gx,
                                     int rows, int cols) {
  for (int r = 0; r < rows; ++r) layer_norm_backward_row(gy, x, gain, mean, rstd, gx, cols, r);
}

void layer_norm_backward_rows(const double* gy, const double* x, const double* gain,
                              const double* mean, const double* rstd, double* gx,
                              int rows, int cols) {
  const bool par = static_cast<long>(rows) * cols >= kParallelFlopCutoff;
#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < rows; ++r) layer_norm_backward_row(gy, x, gain, mean, rstd, gx, cols, r);
}

void softmax_backward_rows_serial(const double* gy, const double* y, double* gx, int rows, int cols) {
  for (int r = 0; r < rows; ++r) softmax_backward_row(gy, y, gx, cols, r);
}

void softmax_backward_rows(const double* gy, const double* y, double* gx, int rows, int cols) {
  const bool par = static_cast<long>(rows) * cols >= kParallelFlopCutoff;
#pragma omp parallel for schedule(static) if (par)
  for (int r = 0; r < rows; ++r) softmax_backward_row(gy, y, gx, cols, r);
}

}  // namespace causalkit::kernels
