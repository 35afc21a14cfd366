#include "phononflux/ensemble.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace phononflux {

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PHONONFLUX_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

MeanEstimate jackknife_mean(const std::vector<double>& x) {
  const std::size_t m = x.size();
  if (m < 2) throw std::invalid_argument("jackknife_mean: need >= 2 samples");
  double sum = 0.0;
  for (double v : x) sum += v;
  double mean = sum / m;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  MeanEstimate e;
  e.mean = mean;
  e.se = std::sqrt(ss / (static_cast<double>(m) * (m - 1)));
  return e;
}

namespace {

struct PowerSums {
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  std::size_t n = 0;
};

struct Moments {
  double mean, var, skew, kurt;
};

Moments from_sums(const PowerSums& p) {
  double n = static_cast<double>(p.n);
  double mu = p.s1 / n;
  double m2 = p.s2 / n - mu * mu;
  double m3 = (p.s3 - 3.0 * mu * p.s2 + 2.0 * n * mu * mu * mu) / n;
  double m4 = (p.s4 - 4.0 * mu * p.s3 + 6.0 * mu * mu * p.s2 -
               3.0 * n * mu * mu * mu * mu) /
              n;
  Moments r;
  r.mean = mu;
  r.var = m2;
  r.skew = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  r.kurt = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return r;
}

}  // namespace

MomentStats moment_stats(const std::vector<double>& x) {
  const std::size_t m = x.size();
  if (m < 8) throw std::invalid_argument("moment_stats: need >= 8 samples");
  PowerSums full;
  full.n = m;
  for (double v : x) {
    full.s1 += v;
    double v2 = v * v;
    full.s2 += v2;
    full.s3 += v2 * v;
    full.s4 += v2 * v2;
  }
  Moments all = from_sums(full);

  // Delete-one replicates from the shared power sums.
  double mv = 0, ms = 0, mk = 0, mm = 0;
  std::vector<Moments> reps(m);
  for (std::size_t j = 0; j < m; ++j) {
    PowerSums p = full;
    double v = x[j];
    p.s1 -= v;
    p.s2 -= v * v;
    p.s3 -= v * v * v;
    p.s4 -= v * v * v * v;
    p.n = m - 1;
    reps[j] = from_sums(p);
    mm += reps[j].mean;
    mv += reps[j].var;
    ms += reps[j].skew;
    mk += reps[j].kurt;
  }
  mm /= m;
  mv /= m;
  ms /= m;
  mk /= m;
  double sm = 0, sv = 0, sk = 0, sku = 0;
  for (std::size_t j = 0; j < m; ++j) {
    sm += (reps[j].mean - mm) * (reps[j].mean - mm);
    sv += (reps[j].var - mv) * (reps[j].var - mv);
    sk += (reps[j].skew - ms) * (reps[j].skew - ms);
    sku += (reps[j].kurt - mk) * (reps[j].kurt - mk);
  }
  double factor = static_cast<double>(m - 1) / m;
  MomentStats r;
  r.count = m;
  r.mean = all.mean;
  r.mean_se = std::sqrt(factor * sm);
  r.variance = all.var;
  r.variance_se = std::sqrt(factor * sv);
  r.skewness = all.skew;
  r.skewness_se = std::sqrt(factor * sk);
  r.kurtosis_excess = all.kurt;
  r.kurtosis_se = std::sqrt(factor * sku);
  return r;
}

}  // namespace phononflux
