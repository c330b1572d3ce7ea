// Timing comparison between the serial reference kernels and their
// OpenMP-parallel counterparts, plus a bitwise equality check on each shape.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "causalkit/kernels.hpp"
#include "causalkit/nn.hpp"
#include "causalkit/rng.hpp"

namespace {

using namespace causalkit;
using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto start = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto stop = Clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void fill(std::vector<double>& v, Rng& rng) {
  for (double& x : v) x = rng.gaussian();
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 5;
  if (argc > 1) reps = std::max(1, std::atoi(argv[1]));
  Rng rng(7);

  std::printf("%-28s %10s %10s %8s %s\n", "kernel", "serial ms", "openmp ms", "speedup",
              "bitwise");
  bool all_equal = true;

  for (const int n : {64, 128, 256}) {
    std::vector<double> a(static_cast<size_t>(n) * n), b(static_cast<size_t>(n) * n);
    std::vector<double> c1(static_cast<size_t>(n) * n), c2(static_cast<size_t>(n) * n);
    fill(a, rng);
    fill(b, rng);

    const double ts = time_ms([&] { kernels::matmul_nn_serial(a.data(), b.data(), c1.data(), n, n, n); }, reps);
    const double tp = time_ms([&] { kernels::matmul_nn(a.data(), b.data(), c2.data(), n, n, n); }, reps);
    const bool eq = c1 == c2;
    all_equal = all_equal && eq;
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n",
                ("matmul " + std::to_string(n) + "x" + std::to_string(n)).c_str(), ts, tp,
                ts / tp, eq ? "equal" : "DIFFER");
  }

  for (const int rows : {512, 2048}) {
    const int cols = 128;
    std::vector<double> x(static_cast<size_t>(rows) * cols), y1(x.size()), y2(x.size());
    fill(x, rng);
    const double ts = time_ms([&] { kernels::softmax_rows_serial(x.data(), y1.data(), rows, cols); }, reps);
    const double tp = time_ms([&] { kernels::softmax_rows(x.data(), y2.data(), rows, cols); }, reps);
    const bool eq = y1 == y2;
    all_equal = all_equal && eq;
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n",
                ("softmax " + std::to_string(rows) + "x" + std::to_string(cols)).c_str(), ts, tp,
                ts / tp, eq ? "equal" : "DIFFER");
  }

  for (const int rows : {512, 2048}) {
    const int cols = 128;
    std::vector<double> x(static_cast<size_t>(rows) * cols), y1(x.size()), y2(x.size());
    std::vector<double> gain(cols, 1.0), bias(cols, 0.0);
    std::vector<double> mean1(rows), rstd1(rows), mean2(rows), rstd2(rows);
    fill(x, rng);
    const double ts = time_ms(
        [&] {
          kernels::layer_norm_rows_serial(x.data(), gain.data(), bias.data(), y1.data(),
                                          mean1.data(), rstd1.data(), rows, cols, 1e-5);
        },
        reps);
    const double tp = time_ms(
        [&] {
          kernels::layer_norm_rows(x.data(), gain.data(), bias.data(), y2.data(), mean2.data(),
                                   rstd2.data(), rows, cols, 1e-5);
        },
        reps);
    const bool eq = y1 == y2 && mean1 == mean2 && rstd1 == rstd2;
    all_equal = all_equal && eq;
    std::printf("%-28s %10.3f %10.3f %7.2fx %s\n",
                ("layer_norm " + std::to_string(rows) + "x" + std::to_string(cols)).c_str(), ts,
                tp, ts / tp, eq ? "equal" : "DIFFER");
  }

  std::printf("\n%s\n", all_equal ? "all kernels bitwise-identical to the serial reference"
                                  : "MISMATCH between serial and parallel kernels");
  return all_equal ? 0 : 1;
}
