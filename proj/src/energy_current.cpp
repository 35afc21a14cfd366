#include "phononflux/energy_current.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace phononflux {

namespace {

// Enumerates the nonzero terms of the current sums: offsets m <= -1, p >= 0
// (first sum) and m >= 0, p <= -1 (second), transverse offset y' - x'
// bounded by the support radius. Emits (x-site, y-site, V(z), sign).
template <class F>
void for_current_terms(const InteractionMatrix& model,
                       const std::vector<int>& site, int k, F&& emit) {
  const int d = model.dim();
  const int r = model.support_radius();
  std::vector<int> x(d), y(d), z(d);
  // Transverse offsets of y' around x' (axis k fixed by the m/p split).
  std::vector<int> offset(d, -r);
  offset[k] = 0;
  while (true) {
    for (int m = -r; m <= r; ++m) {
      for (int p = -r; p <= r; ++p) {
        bool first = m <= -1 && p >= 0;
        bool second = m >= 0 && p <= -1;
        if (!first && !second) continue;
        for (int a = 0; a < d; ++a) {
          x[a] = site[a];
          y[a] = site[a] + offset[a];
          z[a] = x[a] - y[a];
        }
        x[k] += m;
        y[k] += p;
        z[k] = m - p;
        Eigen::MatrixXd V = model.at(z);
        if (V.cwiseAbs().maxCoeff() == 0.0) continue;
        emit(x, y, V, first ? 1.0 : -1.0);
      }
    }
    int a = 0;
    while (a < d) {
      if (a == k) {
        ++a;
        continue;
      }
      if (++offset[a] <= r) break;
      offset[a++] = -r;
    }
    if (a == d) break;
  }
}

}  // namespace

double local_current(const FieldState& y, const InteractionMatrix& model,
                     const std::vector<int>& site, int k) {
  if (k < 0 || k >= y.grid.dim())
    throw std::invalid_argument("local_current: direction out of range");
  double acc = 0.0;
  for_current_terms(
      model, site, k,
      [&](const std::vector<int>& xs, const std::vector<int>& ys,
          const Eigen::MatrixXd& V, double sign) {
        std::size_t xi = y.grid.index(xs);
        std::size_t yi = y.grid.index(ys);
        acc += sign * (y.v.row(xi) * V).dot(y.u.row(yi));
      });
  return 0.5 * acc;
}

std::vector<SitePair> current_pairs(const InteractionMatrix& model,
                                    const std::vector<int>& site, int k) {
  std::vector<SitePair> pairs;
  for_current_terms(model, site, k,
                    [&](const std::vector<int>& xs, const std::vector<int>& ys,
                        const Eigen::MatrixXd&, double) {
                      for (const auto& p : pairs)
                        if (p.x == xs && p.y == ys) return;
                      pairs.push_back({xs, ys});
                    });
  return pairs;
}

CurrentEstimate mean_current_from_covariance(const CovarianceEstimate& q,
                                             const InteractionMatrix& model,
                                             const std::vector<int>& site,
                                             int k) {
  const int n = q.comps;
  CurrentEstimate est;
  est.direction = k;
  est.site = site;
  est.t = q.t;
  est.method = q.method;
  est.horizon_warning = q.horizon_warning;
  double value = 0.0, err = 0.0;
  for_current_terms(
      model, site, k,
      [&](const std::vector<int>& xs, const std::vector<int>& ys,
          const Eigen::MatrixXd& V, double sign) {
        const Eigen::MatrixXd* block = q.find(xs, ys);
        if (!block)
          throw std::out_of_range(
              "mean_current_from_covariance: covariance window insufficient");
        std::size_t idx = 0;
        for (; idx < q.pairs.size(); ++idx)
          if (q.pairs[idx].x == xs && q.pairs[idx].y == ys) break;
        for (int a = 0; a < n; ++a) {
          for (int b = 0; b < n; ++b) {
            value += sign * V(a, b) * (*block)(n + a, b);
            err += std::abs(V(a, b)) * q.stderrs[idx](n + a, b);
          }
        }
      });
  est.value = 0.5 * value;
  est.stderr_value = 0.5 * err;
  return est;
}

CurrentEstimate mc_mean_current(const SampleDraw& draw,
                                const InteractionMatrix& model, double t,
                                const std::vector<int>& site, int k, int M,
                                std::uint64_t master_seed, int threads) {
  if (M < 2) throw std::invalid_argument("mc_mean_current: M >= 2");
  FieldState probe = draw(sample_seed(master_seed, 0));
  DispersionData data(model, probe.grid);
  PropagatorSymbol symbol(data, t);
  auto one = [&](std::size_t i) {
    FieldState y = evolve(draw(sample_seed(master_seed, i)), symbol);
    return local_current(y, model, site, k);
  };
  std::vector<double> vals = ensemble_map<double>(M, threads, one);
  auto est = jackknife_mean(vals);
  CurrentEstimate out;
  out.direction = k;
  out.site = site;
  out.t = t;
  out.value = est.mean;
  out.stderr_value = est.se;
  out.method = "mc";
  out.horizon_warning = t > no_wraparound_horizon(data);
  return out;
}

Eigen::VectorXd limit_current(const LimitCovariance& q_inf,
                              const InteractionMatrix& model) {
  const TorusGrid& grid = q_inf.total.grid();
  const int n = q_inf.total.components();
  const int d = grid.dim();
  if (model.dim() != d || model.components() != n)
    throw std::invalid_argument("limit_current: model mismatch");
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(d);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::MatrixXcd q10 = q_inf.total.block(node, 1, 0);
    if (q10.cwiseAbs().maxCoeff() == 0.0) continue;
    Eigen::VectorXd th = grid.theta(node);
    for (int k = 0; k < d; ++k) {
      Eigen::MatrixXcd dv = model.symbol_derivative(th, k);
      acc[k] += (q10.array() * dv.array().conjugate()).sum();
    }
  }
  acc *= Complex(0.0, -0.5) / static_cast<double>(grid.size());
  double scale = std::max(acc.cwiseAbs().maxCoeff(), 1e-300);
  if (acc.imag().cwiseAbs().maxCoeff() > 1e-9 * std::max(scale, 1.0))
    throw std::runtime_error("limit_current: Hermiticity violation");
  return acc.real();
}

Eigen::VectorXd gibbs_limit_current(const DispersionData& data, double t_plus,
                                    double t_minus, double sgn_tol) {
  const TorusGrid& grid = data.grid();
  const int d = grid.dim();
  const double delta_t = 0.5 * (t_plus - t_minus);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    if (data.is_near_critical(node)) continue;
    for (const BranchCluster& c : data.clusters(node)) {
      int sgn = DispersionData::velocity_sign(c, d - 1, sgn_tol);
      if (sgn == 0) continue;
      acc += static_cast<double>(sgn * c.rank) * c.velocity;
    }
  }
  return (-delta_t / static_cast<double>(grid.size())) * acc;
}

SecondLawVerdict second_law_check(double t_plus, double t_minus,
                                  const Eigen::VectorXd& j_inf, double tol) {
  SecondLawVerdict v;
  v.current_d = j_inf[j_inf.size() - 1];
  double dt = t_plus - t_minus;
  std::ostringstream os;
  if (std::abs(dt) <= tol) {
    v.pass = std::abs(v.current_d) <= tol;
    v.conductivity = 0.0;
    os << "equal temperatures, |j_d| = " << std::abs(v.current_d);
  } else {
    v.conductivity = -v.current_d / dt;
    v.pass = v.conductivity > 0.0;
    os << "j_d = " << v.current_d << ", C = " << v.conductivity;
  }
  v.detail = os.str();
  return v;
}

}  // namespace phononflux
