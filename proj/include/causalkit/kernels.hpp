#pragma once

#include <cstddef>

// Numeric kernels used by the autograd layer. Every kernel exists twice: a
// plain serial reference (*_serial) and an OpenMP variant that parallelizes
// across independent output rows. Each output element is computed by exactly
// one thread with the same inner-loop order as the reference, so the parallel
// results are bitwise identical to the serial ones for any thread count; the
// unit tests assert that and tools/bench_kernels compares their throughput.
// All matrices are dense row-major doubles.
namespace causalkit::kernels {

// Work sizes below this many flops skip the OpenMP team entirely.
inline constexpr long kParallelFlopCutoff = 1 << 16;

// c (m x n) = a (m x k) * b (k x n); accumulates into c when acc is set.
void matmul_nn_serial(const double* a, const double* b, double* c, int m, int k, int n, bool acc = false);
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc = false);

// c (m x n) = a (m x k) * b^T with b stored (n x k).
void matmul_nt_serial(const double* a, const double* b, double* c, int m, int k, int n, bool acc = false);
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc = false);

// c (m x n) = a^T * b with a stored (k x m), b stored (k x n).
void matmul_tn_serial(const double* a, const double* b, double* c, int m, int k, int n, bool acc = false);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc = false);

// Row-wise softmax with max subtraction.
void softmax_rows_serial(const double* x, double* y, int rows, int cols);
void softmax_rows(const double* x, double* y, int rows, int cols);

// Row-wise layer normalization; mean and rstd (1/sqrt(var+eps)) are stored
// per row for the backward pass.
void layer_norm_rows_serial(const double* x, const double* gain, const double* bias, double* y,
                            double* mean, double* rstd, int rows, int cols, double eps);
void layer_norm_rows(const double* x, const double* gain, const double* bias, double* y,
                     double* mean, double* rstd, int rows, int cols, double eps);

// Input gradient of layer_norm_rows (gain/bias gradients are cheap column
// reductions and stay with the caller).
void layer_norm_backward_rows_serial(const double* gy, const double* x, const double* gain,
                                     const double* mean, const double* rstd, double* gx,
                                     int rows, int cols);
void layer_norm_backward_rows(const double* gy, const double* x, const double* gain,
                              const double* mean, const double* rstd, double* gx,
                              int rows, int cols);

// Input gradient of softmax_rows given forward output y.
void softmax_backward_rows_serial(const double* gy, const double* y, double* gx, int rows, int cols);
void softmax_backward_rows(const double* gy, const double* y, double* gx, int rows, int cols);

}  // namespace causalkit::kernels
