#ifndef HORODRIFT_PARALLEL_HPP
#define HORODRIFT_PARALLEL_HPP

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace horodrift {

// threads == 0 picks the OpenMP default; threads == 1 forces serial.
inline int resolve_threads(int threads) {
#ifdef _OPENMP
  if (threads <= 0) return omp_get_max_threads();
  return threads;
#else
  (void)threads;
  return 1;
#endif
}

// Parallel map over [0, n): each index writes only its own slot, so the
// result is identical for any worker count. Reductions over the returned
// vector must be done serially in index order to keep outputs byte-stable.
template <typename F>
std::vector<double> par_map(std::size_t n, int threads, F&& f) {
  std::vector<double> out(n);
  const int nt = resolve_threads(threads);
#ifdef _OPENMP
  if (nt > 1) {
#pragma omp parallel for schedule(static) num_threads(nt)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    return out;
  }
#endif
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

// Serial reference version, kept for testing the OpenMP path bit-exactly.
template <typename F>
std::vector<double> par_map_serial(std::size_t n, F&& f) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Index-order reduction; stderr = sample sd / sqrt(n).
inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n == 0) return {};
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(n);
  if (n < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

}  // namespace horodrift

#endif
