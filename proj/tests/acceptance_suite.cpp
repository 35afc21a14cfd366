// Acceptance runner: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in the checks themselves.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "phononflux/cli_runner.hpp"
#include "phononflux/covariance_lab.hpp"
#include "phononflux/energy_current.hpp"

using namespace phononflux;

namespace {

int g_failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

void record(int criterion, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%s] criterion %d: %s  %s\n", pass ? "PASS" : "FAIL", criterion,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

FieldState random_state(const TorusGrid& grid, int n, std::uint64_t seed) {
  FieldState y(grid, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (int c = 0; c < n; ++c) {
      y.u(i, c) = normal(rng);
      y.v(i, c) = normal(rng);
    }
  return y;
}

// ---------------------------------------------------------------------------
// 1. Propagator exactness: group law, reversibility, energy conservation.
void criterion_1() {
  Timer timer;
  double worst_group = 0.0, worst_reverse = 0.0, worst_drift = 0.0;
  for (int d : {1, 2}) {
    int n_axis = d == 1 ? 256 : 128;
    InteractionMatrix model = InteractionMatrix::elastic(d, 1.0);
    TorusGrid grid(d, n_axis);
    DispersionData data(model, grid);
    FieldState y0 = random_state(grid, 1, 2026 + d);
    double h0 = hamiltonian(y0, model);
    double scale = std::max(y0.u.cwiseAbs().maxCoeff(),
                            y0.v.cwiseAbs().maxCoeff());

    PropagatorSymbol g30(data, 30.0), g70(data, 70.0), g100(data, 100.0);
    FieldState a = evolve(evolve(y0, g30), g70);
    FieldState b = evolve(y0, g100);
    worst_group = std::max(worst_group,
                           std::max((a.u - b.u).cwiseAbs().maxCoeff(),
                                    (a.v - b.v).cwiseAbs().maxCoeff()) /
                               scale);

    PropagatorSymbol gm100(data, -100.0);
    FieldState back = evolve(b, gm100);
    worst_reverse = std::max(worst_reverse,
                             std::max((back.u - y0.u).cwiseAbs().maxCoeff(),
                                      (back.v - y0.v).cwiseAbs().maxCoeff()) /
                                 scale);

    for (double t : {10.0, 40.0, 100.0}) {
      PropagatorSymbol g(data, t);
      double h = hamiltonian(evolve(y0, g), model);
      worst_drift = std::max(worst_drift, std::abs(h - h0) / h0);
    }
  }
  double secs = timer.seconds();
  bool pass = worst_group < 1e-9 && worst_reverse < 1e-9 &&
              worst_drift < 1e-10 && secs < 10.0;
  record(1, "propagator exactness (group law, reversibility, H drift)", pass,
         fmt("group=%.2e reverse=%.2e drift=%.2e time=%.1fs", worst_group,
             worst_reverse, worst_drift, secs));
}

// ---------------------------------------------------------------------------
// 2. Gibbs algebra identities.
void criterion_2() {
  Timer timer;
  InteractionMatrix model = InteractionMatrix::elastic(1, 1.0);
  TorusGrid grid(1, 256);
  DispersionData data(model, grid);
  double t_plus = 2.0, t_minus = 1.0;
  double t_bar = 1.5, delta_t = 0.5;

  SpectralDensity qp = gibbs_spectral_density(data, t_plus);
  SpectralDensity qm = gibbs_spectral_density(data, t_minus);
  LimitCovariance lim = limit_covariance(data, qp, qm);
  double worst_closed = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    double th = kTwoPi * node / grid.extent();
    double w2 = 3.0 - 2.0 * std::cos(th);
    double w = std::sqrt(w2);
    double sd = std::sin(th);
    double sgn = (node == 0 || node == grid.size() / 2)
                     ? 0.0
                     : (sd > 0 ? 1.0 : (sd < 0 ? -1.0 : 0.0));
    Eigen::MatrixXcd expect(2, 2);
    expect << Complex(t_bar / w2, 0), Complex(0, delta_t * sgn / w),
        Complex(0, -delta_t * sgn / w), Complex(t_bar, 0);
    worst_closed = std::max(
        worst_closed,
        (lim.total.at(node) - expect).cwiseAbs().maxCoeff());
  }

  SpectralDensity q1 = gibbs_spectral_density(data, 1.0);
  SpectralDensity qt = evolve_covariance_spectral(q1, data, 41.25);
  double worst_stationary = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node)
    worst_stationary =
        std::max(worst_stationary,
                 (qt.at(node) - q1.at(node)).cwiseAbs().maxCoeff());

  double secs = timer.seconds();
  bool pass = worst_closed < 1e-10 && worst_stationary < 1e-10 && secs < 5.0;
  record(2, "Gibbs algebra (limit covariance closed form, stationarity)",
         pass,
         fmt("closed=%.2e stationary=%.2e time=%.1fs", worst_closed,
             worst_stationary, secs));
}

// ---------------------------------------------------------------------------
// 3. Equilibrium convergence of the quadratic form.
void criterion_3() {
  Timer timer;
  InteractionMatrix model = InteractionMatrix::elastic(1, 1.0);
  TorusGrid grid(1, 512);
  DispersionData data(model, grid);
  SpectralDensity tri = triangular_density(grid, 3, 1.0);

  Eigen::VectorXd center(1);
  center << kTwoPi / 4.0;  // theta_0 = pi/2
  TestFunction psi = make_test_function(data, center, kTwoPi / 16.0);
  bool certified = psi.d0_certified;

  LimitCovariance lim = limit_covariance(data, tri, tri);
  double q_inf = quadratic_form(lim.total, psi);
  auto q_at = [&](double t) {
    return quadratic_form(evolve_covariance_spectral(tri, data, t), psi);
  };
  double rel80 = std::abs(q_at(80.0) - q_inf) / std::abs(q_inf);

  auto envelope = [&](double t_lo) {
    double worst = 0.0;
    for (double t = t_lo; t <= 2.0 * t_lo + 1e-9; t += 1.0)
      worst = std::max(worst, std::abs(q_at(t) - q_inf));
    return worst;
  };
  double e20 = envelope(20.0), e40 = envelope(40.0), e80 = envelope(80.0);
  double secs = timer.seconds();
  bool pass = certified && rel80 < 0.03 && e40 <= 0.5 * e20 &&
              e80 <= 0.5 * e40 && secs < 30.0;
  record(3, "equilibrium convergence of Q_t(Psi,Psi)", pass,
         fmt("rel@80=%.2e envelopes %.2e -> %.2e -> %.2e time=%.1fs", rel80,
             e20, e40, e80, secs));
}

// ---------------------------------------------------------------------------
// 4. Second Law in d = 1: MC current against the closed-form limit.
void criterion_4() {
  Timer timer;
  InteractionMatrix model = InteractionMatrix::elastic(1, 1.0);
  TorusGrid grid(1, 1024);
  DispersionData data(model, grid);
  double t_plus = 2.0, t_minus = 1.0, delta_t = 0.5;
  double target = -delta_t * (std::sqrt(5.0) - 1.0) / (kTwoPi / 2.0);

  // Quadrature oracle confirms the closed form before the MC run.
  Eigen::VectorXd j_quad = gibbs_limit_current(data, t_plus, t_minus);
  double quad_err = std::abs(j_quad[0] - target);

  SpectralDensity qp = gibbs_spectral_density(data, t_plus);
  SpectralDensity qm = gibbs_spectral_density(data, t_minus);
  Eigen::VectorXd j_generic =
      limit_current(limit_covariance(data, qp, qm), model);
  double route_gap = std::abs(j_generic[0] - j_quad[0]);

  TwoTemperatureSampler sampler({qm, qp, 0});
  SampleDraw draw = [&](std::uint64_t seed) { return sampler.sample(seed); };
  CurrentEstimate mc =
      mc_mean_current(draw, model, 40.0, {0}, 0, 2000, 20260401);

  double band = std::max(2.0 * mc.stderr_value, 0.05 * std::abs(target));
  double secs = timer.seconds();
  bool pass = quad_err < 1e-5 && route_gap < 1e-8 &&
              std::abs(mc.value - target) < band && mc.value < 0.0 &&
              secs < 300.0;
  record(4, "Second Law d=1 (MC current at the seam vs limit)", pass,
         fmt("mc=%.5f target=%.5f band=%.2e routes=%.1e time=%.0fs", mc.value,
             target, band, route_gap, secs));
}

// ---------------------------------------------------------------------------
// 5. Transverse null current in d = 2.
void criterion_5() {
  Timer timer;
  InteractionMatrix model = InteractionMatrix::elastic(2, 1.0);
  TorusGrid grid(2, 128);
  DispersionData data(model, grid);
  double t_plus = 2.0, t_minus = 1.0;

  Eigen::VectorXd j = gibbs_limit_current(data, t_plus, t_minus);
  double transverse_quad = std::abs(j[0]);

  SpectralDensity qp = gibbs_spectral_density(data, t_plus);
  SpectralDensity qm = gibbs_spectral_density(data, t_minus);
  TwoTemperatureSampler sampler({qm, qp, 0});
  SampleDraw draw = [&](std::uint64_t seed) { return sampler.sample(seed); };
  CurrentEstimate mc =
      mc_mean_current(draw, model, 30.0, {0, 0}, 0, 500, 8891);

  double secs = timer.seconds();
  bool pass = transverse_quad < 1e-9 &&
              std::abs(mc.value) < 3.0 * mc.stderr_value && secs < 600.0;
  record(5, "transverse null current d=2", pass,
         fmt("quad=%.1e mc=%.4f se=%.4f time=%.0fs", transverse_quad, mc.value,
             mc.stderr_value, secs));
}

// ---------------------------------------------------------------------------
// 6. CLT: clipped initial data relaxes to the Gaussian limit.
void criterion_6() {
  Timer timer;
  InteractionMatrix model = InteractionMatrix::elastic(1, 1.0);
  TorusGrid grid(1, 256);
  DispersionData data(model, grid);
  double clip = 1.0;

  SpectralDensity white = triangular_density(grid, 1, 1.0);
  GaussianSampler sampler(white);
  SampleDraw draw = [&](std::uint64_t seed) {
    return nongaussian_transform(sampler.sample(seed), clip);
  };

  std::vector<std::pair<std::vector<int>, Eigen::VectorXd>> sites;
  const double weights[5] = {1.0, 3.0, 0.0, -3.0, -1.0};
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd w(2);
    w << weights[i], 0.0;
    sites.push_back({{i}, w});
  }
  TestFunction psi =
      test_function_from_values(grid, 1, sites, data.near_critical());

  double eff = clipped_gaussian_variance(1.0, clip);
  SpectralDensity q_eff = triangular_density(grid, 1, eff);
  LimitCovariance lim = limit_covariance(data, q_eff, q_eff);
  double q_inf = quadratic_form(lim.total, psi);

  // t = 0: the 5-site sum of clipped iid values is visibly platykurtic.
  std::vector<double> at0 = ensemble_map<double>(40000, 0, [&](std::size_t i) {
    return psi.pair_with(draw(sample_seed(60601, i)));
  });
  MomentStats s0 = moment_stats(at0);
  double z0 = std::abs(s0.kurtosis_excess) / s0.kurtosis_se;

  CltReport rep = clt_diagnostics(draw, model, psi, 60.0, 4000, 60602, q_inf);
  double z60 = std::abs(rep.stats.kurtosis_excess) / rep.stats.kurtosis_se;
  double worst_ecf = 0.0;
  for (const auto& row : rep.ecf) {
    worst_ecf = std::max(worst_ecf,
                         std::abs(row.ecf_re - row.target) / row.se_re);
    worst_ecf = std::max(worst_ecf, std::abs(row.ecf_im) / row.se_im);
  }

  double secs = timer.seconds();
  bool pass = psi.d0_certified && z0 > 5.0 && z60 < 5.0 && worst_ecf < 5.0 &&
              secs < 600.0;
  record(6, "CLT for clipped non-Gaussian initial data", pass,
         fmt("kurt z(0)=%.1f z(60)=%.2f ecf(max z)=%.2f Qinf=%.3f time=%.0fs",
             z0, z60, worst_ecf, q_inf, secs));
}

// ---------------------------------------------------------------------------
// 7. Stationary-phase decay of the conjugate flow.
void criterion_7() {
  Timer timer;
  bool pass = true;
  std::string detail;
  {
    InteractionMatrix model = InteractionMatrix::elastic(1, 1.0);
    TorusGrid grid(1, 4096);
    DispersionData data(model, grid);
    TestFunction psi = default_decay_function(data, model);
    std::vector<double> times;
    for (double t = 10.0; t <= 100.0; t += 10.0) times.push_back(t);
    DecayReport rep = decay_probe(data, psi, times);
    pass = pass && psi.d0_certified && std::abs(rep.slope + 0.5) < 0.15 &&
           rep.tail_ratio < 1e-6;
    detail += fmt("d1 slope=%.3f tail=%.1e  ", rep.slope, rep.tail_ratio);
  }
  {
    InteractionMatrix model = InteractionMatrix::elastic(2, 1.0);
    TorusGrid grid(2, 512);
    DispersionData data(model, grid);
    TestFunction psi = default_decay_function(data, model);
    // Disperse window inside the horizon (~181); early transient < 30.
    std::vector<double> times;
    for (double t = 30.0; t <= 180.0 + 1e-9; t += 12.5) times.push_back(t);
    DecayReport rep = decay_probe(data, psi, times);
    pass = pass && psi.d0_certified && std::abs(rep.slope + 1.0) < 0.15 &&
           rep.tail_ratio < 1e-6;
    detail += fmt("d2 slope=%.3f tail=%.1e", rep.slope, rep.tail_ratio);
  }
  double secs = timer.seconds();
  pass = pass && secs < 120.0;
  record(7, "stationary-phase sup-norm decay t^{-d/2}", pass,
         detail + fmt("  time=%.0fs", secs));
}

// ---------------------------------------------------------------------------
// 8. Sampler fidelity: spectral chi^2 bands and equipartition.
void criterion_8() {
  Timer timer;
  InteractionMatrix model = InteractionMatrix::elastic(1, 1.0);
  TorusGrid grid(1, 64);
  DispersionData data(model, grid);
  double temperature = 1.3;
  SpectralDensity q = gibbs_spectral_density(data, temperature);
  GaussianSampler sampler(q);

  // Five random probe nodes away from the self-conjugate pair {0, N/2}.
  std::mt19937_64 rng(314159);
  std::vector<std::size_t> probes;
  while (probes.size() < 5) {
    std::size_t node = rng() % grid.size();
    if (node == 0 || node == grid.size() / 2) continue;
    probes.push_back(node);
  }

  const int m = 20000;
  std::vector<double> sum_u(probes.size(), 0.0), sum_v(probes.size(), 0.0);
  double velocity_sq = 0.0;
  for (int i = 0; i < m; ++i) {
    FieldState y = sampler.sample(sample_seed(512, i));
    Eigen::VectorXcd uh = fourier_forward_real(grid, y.u.col(0));
    Eigen::VectorXcd vh = fourier_forward_real(grid, y.v.col(0));
    for (std::size_t p = 0; p < probes.size(); ++p) {
      sum_u[p] += std::norm(uh[probes[p]]) /
                  (q.at(probes[p])(0, 0).real() * grid.size());
      sum_v[p] += std::norm(vh[probes[p]]) /
                  (q.at(probes[p])(1, 1).real() * grid.size());
    }
    velocity_sq += y.v.squaredNorm() / grid.size();
  }
  // |Yhat|^2 / (N^d qhat) ~ Exp(1): the m-sum has mean m and sd sqrt(m).
  double worst_band = 0.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    worst_band = std::max(worst_band, std::abs(sum_u[p] - m) / std::sqrt(m));
    worst_band = std::max(worst_band, std::abs(sum_v[p] - m) / std::sqrt(m));
  }
  velocity_sq /= m;
  double equi_se = temperature * std::sqrt(2.0 / (m * grid.size()));
  double equi_z = std::abs(velocity_sq - temperature) / equi_se;

  double secs = timer.seconds();
  bool pass = worst_band < 5.0 && equi_z < 5.0 && secs < 60.0;
  record(8, "sampler fidelity (chi^2 bands, equipartition)", pass,
         fmt("band(max z)=%.2f equi z=%.2f time=%.0fs", worst_band, equi_z,
             secs));
}

}  // namespace

int main() {
  std::printf("phononflux acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("%d of 8 criteria passed\n", 8 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
