#ifndef PHONONFLUX_ENSEMBLE_HPP
#define PHONONFLUX_ENSEMBLE_HPP

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace phononflux {

/// Worker count: explicit argument wins, then PHONONFLUX_THREADS, then the
/// hardware concurrency.
int resolve_thread_count(int requested = 0);

/// Evaluates f(i) for i in [0, count) with a static partition over threads.
/// Each slot is written exactly once, so any later reduction runs in sample
/// order and results do not depend on the thread count.
template <class T, class F>
std::vector<T> ensemble_map(std::size_t count, int threads, F&& f) {
  std::vector<T> values(count);
  int workers = resolve_thread_count(threads);
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) values[i] = f(i);
    return values;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (std::size_t i = w; i < count; i += workers) values[i] = f(i);
    });
  }
  for (auto& th : pool) th.join();
  return values;
}

/// Mean with delete-one jackknife standard error (equals the classic SEM for
/// the mean; kept for uniformity with the higher moments).
struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};
MeanEstimate jackknife_mean(const std::vector<double>& x);

/// Sample moments of one scalar observable with jackknife standard errors.
struct MomentStats {
  std::size_t count = 0;
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;
  double skewness = 0.0;
  double skewness_se = 0.0;
  double kurtosis_excess = 0.0;
  double kurtosis_se = 0.0;
};
MomentStats moment_stats(const std::vector<double>& x);

}  // namespace phononflux

#endif
