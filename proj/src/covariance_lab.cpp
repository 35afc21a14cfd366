#include "phononflux/covariance_lab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace phononflux {

double TestFunction::pair_with(const FieldState& y) const {
  if (y.grid != grid || y.components() != comps)
    throw std::invalid_argument("test function / field grid mismatch");
  double acc = 0.0;
  for (std::size_t node : support) {
    for (int c = 0; c < comps; ++c) {
      acc += y.u(node, c) * values(node, c);
      acc += y.v(node, c) * values(node, comps + c);
    }
  }
  return acc;
}

namespace {

double torus_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double r2 = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    double d = std::fmod(std::abs(a[k] - b[k]), kTwoPi);
    d = std::min(d, kTwoPi - d);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

void finalize_spectrum(TestFunction& psi,
                       const std::vector<std::uint8_t>& mask) {
  const TorusGrid& grid = psi.grid;
  psi.support.clear();
  for (std::size_t node = 0; node < grid.size(); ++node)
    if (psi.values.row(node).cwiseAbs().maxCoeff() > 0.0)
      psi.support.push_back(node);
  for (int c = 0; c < 2 * psi.comps; ++c)
    psi.spectrum.col(c) = fourier_forward_real(grid, psi.values.col(c));
  double peak = psi.spectrum.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node)
    if (mask[node])
      worst = std::max(worst, psi.spectrum.row(node).cwiseAbs().maxCoeff());
  psi.leak = peak > 0.0 ? worst / peak : 0.0;
  psi.d0_certified = peak > 0.0 && psi.leak < TestFunction::certify_tol;
}

}  // namespace

TestFunction make_test_function(const DispersionData& data,
                                const Eigen::VectorXd& theta0, double width,
                                int support_radius, int component) {
  const TorusGrid& grid = data.grid();
  const int n = data.components();
  if (theta0.size() != grid.dim())
    throw std::invalid_argument("make_test_function: theta0 dimension");
  if (component < 0 || component >= 2 * n)
    throw std::invalid_argument("make_test_function: component index");
  if (!(width > 0.0))
    throw std::invalid_argument("make_test_function: width must be > 0");

  const auto& mask = data.near_critical();
  Eigen::VectorXd minus_theta0 = -theta0;

  // Pre-check: bump balls around +-theta0 must avoid the masked nodes.
  std::vector<Eigen::VectorXd> masked;
  for (std::size_t node = 0; node < grid.size(); ++node)
    if (mask[node]) masked.push_back(grid.theta(node));
  auto clearance_of = [&](const Eigen::VectorXd& center) {
    double dist = std::numeric_limits<double>::infinity();
    Eigen::VectorXd minus_center = -center;
    for (const auto& th : masked)
      dist = std::min(dist, std::min(torus_distance(th, center),
                                     torus_distance(th, minus_center)));
    return dist;
  };
  double nearest_hit = clearance_of(theta0);
  if (nearest_hit <= width) {
    // Suggest the admissible grid node closest to theta0.
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd suggestion = theta0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
      Eigen::VectorXd th = grid.theta(node);
      if (clearance_of(th) > width && torus_distance(th, theta0) < best) {
        best = torus_distance(th, theta0);
        suggestion = th;
      }
    }
    std::ostringstream os;
    os << "make_test_function: bump intersects the critical mask (clearance "
       << nearest_hit << " <= width " << width << "); nearest admissible "
       << "center:";
    for (int k = 0; k < suggestion.size(); ++k) os << " " << suggestion[k];
    throw std::invalid_argument(os.str());
  }

  TestFunction psi(grid, n);
  // Cosine taper at +-theta0 summed; real and even, so Psi is real.
  Eigen::VectorXcd profile(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::VectorXd th = grid.theta(node);
    double b = 0.0;
    for (const Eigen::VectorXd* center :
         std::initializer_list<const Eigen::VectorXd*>{&theta0,
                                                       &minus_theta0}) {
      double r = torus_distance(th, *center);
      if (r < width) b += 0.5 * (1.0 + std::cos(kTwoPi / 2.0 * r / width));
    }
    profile[node] = Complex(b, 0.0);
  }
  double resid = 0.0;
  Eigen::VectorXd spatial = fourier_inverse_real(grid, profile, &resid);
  if (resid > 1e-9)
    throw std::runtime_error("make_test_function: asymmetric profile");

  std::vector<int> c(grid.dim());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    if (support_radius >= 0) {
      grid.coords(node, c.data());
      int linf = 0;
      for (int a = 0; a < grid.dim(); ++a)
        linf = std::max(linf, std::abs(grid.signed_coordinate(c[a])));
      if (linf > support_radius) continue;
    }
    psi.values(node, component) = spatial[node];
  }
  finalize_spectrum(psi, mask);
  return psi;
}

TestFunction test_function_from_values(
    const TorusGrid& grid, int comps,
    const std::vector<std::pair<std::vector<int>, Eigen::VectorXd>>& sites,
    const std::vector<std::uint8_t>& mask) {
  TestFunction psi(grid, comps);
  for (const auto& [coords, value] : sites) {
    if (value.size() != 2 * comps)
      throw std::invalid_argument("test_function_from_values: value size");
    psi.values.row(grid.index(coords)) += value.transpose();
  }
  finalize_spectrum(psi, mask);
  return psi;
}

double quadratic_form(const NodeBlockField& qhat, const TestFunction& psi) {
  if (qhat.grid() != psi.grid || qhat.components() != psi.comps)
    throw std::invalid_argument("quadratic_form: grid mismatch");
  Complex acc(0.0, 0.0);
  for (std::size_t node = 0; node < psi.grid.size(); ++node) {
    Eigen::VectorXcd p = psi.spectrum.row(node).transpose();
    acc += (p.adjoint() * qhat.at(node) * p).value();
  }
  acc /= static_cast<double>(psi.grid.size());
  double scale = std::max(1e-300, std::abs(acc));
  if (std::abs(acc.imag()) > 1e-9 * scale)
    throw std::runtime_error("quadratic_form: non-Hermitian kernel");
  return acc.real();
}

const Eigen::MatrixXd* CovarianceEstimate::find(
    const std::vector<int>& x, const std::vector<int>& y) const {
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].x == x && pairs[i].y == y) return &blocks[i];
  return nullptr;
}

Eigen::MatrixXd CovarianceEstimate::block_ij(const std::vector<int>& x,
                                             const std::vector<int>& y, int i,
                                             int j) const {
  const Eigen::MatrixXd* b = find(x, y);
  if (!b) throw std::out_of_range("covariance window does not contain pair");
  return b->block(i * comps, j * comps, comps, comps);
}

double quadratic_form(const CovarianceEstimate& q, const TestFunction& psi) {
  double acc = 0.0;
  std::vector<int> cx(psi.grid.dim()), cy(psi.grid.dim());
  for (std::size_t a : psi.support) {
    psi.grid.coords(a, cx.data());
    for (int k = 0; k < psi.grid.dim(); ++k)
      cx[k] = psi.grid.signed_coordinate(cx[k]);
    for (std::size_t b : psi.support) {
      psi.grid.coords(b, cy.data());
      for (int k = 0; k < psi.grid.dim(); ++k)
        cy[k] = psi.grid.signed_coordinate(cy[k]);
      const Eigen::MatrixXd* block = q.find(cx, cy);
      if (!block)
        throw std::out_of_range(
            "quadratic_form: covariance window misses a support pair");
      acc += psi.values.row(a) * (*block) * psi.values.row(b).transpose();
    }
  }
  return acc;
}

LimitCovariance limit_covariance(const DispersionData& data,
                                 const SpectralDensity& q_plus,
                                 const SpectralDensity& q_minus,
                                 double sgn_tol) {
  const TorusGrid& grid = data.grid();
  const int n = data.components();
  if (q_plus.grid() != grid || q_minus.grid() != grid ||
      q_plus.components() != n || q_minus.components() != n)
    throw std::invalid_argument("limit_covariance: grid mismatch");

  LimitCovariance out(grid, n);
  const int d = grid.dim();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::MatrixXcd qp = 0.5 * (q_plus.at(node) + q_minus.at(node));
    Eigen::MatrixXcd qm = 0.5 * (q_plus.at(node) - q_minus.at(node));
    double load = qp.cwiseAbs().maxCoeff() + qm.cwiseAbs().maxCoeff();
    if (load == 0.0) continue;

    bool singular = false;
    for (const BranchCluster& c : data.clusters(node))
      singular = singular || c.singular;
    if (singular) {
      std::ostringstream os;
      os << "limit_covariance: Omega^{-1} undefined at node " << node
         << " with nonvanishing density";
      throw std::domain_error(os.str());
    }

    Eigen::MatrixXcd omega_inv = Eigen::MatrixXcd::Zero(n, n);
    Eigen::MatrixXcd omega = Eigen::MatrixXcd::Zero(n, n);
    for (const BranchCluster& c : data.clusters(node)) {
      omega_inv += (1.0 / c.omega) * c.projection;
      omega += c.omega * c.projection;
    }
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    C.block(0, n, n, n) = omega_inv;
    C.block(n, 0, n, n) = -omega;

    Eigen::MatrixXcd m_plus = 0.5 * (qp + C * qp * C.adjoint());
    Eigen::MatrixXcd m_minus = 0.5 * (C * qm - qm * C.adjoint());

    auto even = out.even.at(node);
    auto odd = out.odd.at(node);
    for (const BranchCluster& c : data.clusters(node)) {
      int sgn = data.is_near_critical(node)
                    ? 0
                    : DispersionData::velocity_sign(c, d - 1, sgn_tol);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          Eigen::MatrixXcd pm =
              c.projection * m_plus.block(i * n, j * n, n, n) * c.projection;
          even.block(i * n, j * n, n, n) += pm;
          if (sgn != 0) {
            Eigen::MatrixXcd om = c.projection *
                                  m_minus.block(i * n, j * n, n, n) *
                                  c.projection;
            odd.block(i * n, j * n, n, n) += Complex(0.0, sgn) * om;
          }
        }
      }
    }
    out.total.at(node) = even + odd;
  }
  return out;
}

namespace {

// (a * b)(u) = sum_x a(x) b(u - x) on the torus, direct real-space sum.
Eigen::VectorXd torus_convolve(const TorusGrid& grid,
                               const Eigen::VectorXd& a,
                               const Eigen::VectorXd& b) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(grid.size());
  std::vector<int> cx(grid.dim()), cy(grid.dim()), cu(grid.dim());
  for (std::size_t x = 0; x < grid.size(); ++x) {
    if (a[x] == 0.0) continue;  // exploit finite-range kernels
    grid.coords(x, cx.data());
    for (std::size_t y = 0; y < grid.size(); ++y) {
      grid.coords(y, cy.data());
      for (int k = 0; k < grid.dim(); ++k) cu[k] = cx[k] + cy[k];
      c[grid.index(cu)] += a[x] * b[y];
    }
  }
  return c;
}

// (-Delta + m^2) u with the nearest-neighbour stencil.
Eigen::VectorXd klein_gordon_apply(const TorusGrid& grid, double m,
                                   const Eigen::VectorXd& u) {
  Eigen::VectorXd r = (2.0 * grid.dim() + m * m) * u;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    for (int a = 0; a < grid.dim(); ++a) {
      r[node] -= u[grid.shift(node, a, 1)];
      r[node] -= u[grid.shift(node, a, -1)];
    }
  }
  return r;
}

}  // namespace

ScalarLimitBlocks scalar_limit_covariance(double m,
                                          const SpectralDensity& q_plus,
                                          const SpectralDensity& q_minus) {
  if (q_plus.components() != 1 || q_minus.components() != 1)
    throw std::invalid_argument("scalar_limit_covariance: n must be 1");
  const TorusGrid& grid = q_plus.grid();
  if (q_minus.grid() != grid)
    throw std::invalid_argument("scalar_limit_covariance: grid mismatch");

  // Lattice dispersion of the elastic model.
  Eigen::VectorXd omega2(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::VectorXd th = grid.theta(node);
    double w2 = m * m;
    for (int a = 0; a < grid.dim(); ++a) w2 += 2.0 * (1.0 - std::cos(th[a]));
    omega2[node] = w2;
  }
  if (omega2.minCoeff() <= 0.0)
    throw std::domain_error(
        "scalar_limit_covariance: omega vanishes on the grid (E6)");

  Eigen::VectorXcd buf(grid.size());
  for (std::size_t node = 0; node < grid.size(); ++node)
    buf[node] = Complex(1.0 / omega2[node], 0.0);
  Eigen::VectorXd kernel_e = fourier_inverse_real(grid, buf);

  const int dax = grid.dim() - 1;
  std::vector<int> c(grid.dim());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.coords(node, c.data());
    double sd = std::sin(kTwoPi * c[dax] / grid.extent());
    double sgn = sd > 0 ? 1.0 : (sd < 0 ? -1.0 : 0.0);
    buf[node] = Complex(0.0, -1.0) * Complex(sgn / std::sqrt(omega2[node]), 0);
  }
  Eigen::VectorXd kernel_p = fourier_inverse_real(grid, buf);

  auto kp = real_space_kernel(q_plus);
  auto km = real_space_kernel(q_minus);
  auto pick = [&](int i, int j, double sign_minus) {
    Eigen::VectorXd r(grid.size());
    for (std::size_t node = 0; node < grid.size(); ++node)
      r[node] = 0.5 * (kp[node](i, j) + sign_minus * km[node](i, j));
    return r;
  };
  Eigen::VectorXd qp00 = pick(0, 0, 1.0), qp01 = pick(0, 1, 1.0),
                  qp10 = pick(1, 0, 1.0), qp11 = pick(1, 1, 1.0);
  Eigen::VectorXd qm00 = pick(0, 0, -1.0), qm01 = pick(0, 1, -1.0),
                  qm10 = pick(1, 0, -1.0), qm11 = pick(1, 1, -1.0);

  ScalarLimitBlocks out(grid);
  Eigen::VectorXd podd = torus_convolve(grid, qm01 - qm10, kernel_p);
  out.q00 =
      0.5 * (qp00 + torus_convolve(grid, qp11, kernel_e) + podd);
  out.q10 = 0.5 * (qp10 - qp01 +
                   torus_convolve(grid, qm11 + klein_gordon_apply(grid, m, qm00),
                                  kernel_p));
  out.q11 = 0.5 * (qp11 + klein_gordon_apply(grid, m, qp00 + podd));
  return out;
}

CovarianceEstimate mc_covariance(const SampleDraw& draw,
                                 const InteractionMatrix& model, double t,
                                 const std::vector<SitePair>& pairs, int M,
                                 std::uint64_t master_seed, int threads) {
  if (M < 2) throw std::invalid_argument("mc_covariance: M >= 2");
  FieldState probe = draw(sample_seed(master_seed, 0));
  const TorusGrid grid = probe.grid;
  const int n = probe.components();
  const int bs = 2 * n;
  DispersionData data(model, grid);
  PropagatorSymbol symbol(data, t);

  std::vector<std::size_t> xi(pairs.size()), yi(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    xi[p] = grid.index(pairs[p].x);
    yi[p] = grid.index(pairs[p].y);
  }

  const std::size_t per = pairs.size() * bs * bs;
  auto one = [&](std::size_t i) {
    FieldState y = evolve(draw(sample_seed(master_seed, i)), symbol);
    Eigen::VectorXd row(per);
    Eigen::VectorXd ax(bs), ay(bs);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      ax << y.u.row(xi[p]).transpose(), y.v.row(xi[p]).transpose();
      ay << y.u.row(yi[p]).transpose(), y.v.row(yi[p]).transpose();
      Eigen::Map<Eigen::MatrixXd>(row.data() + p * bs * bs, bs, bs) =
          ax * ay.transpose();
    }
    return row;
  };
  std::vector<Eigen::VectorXd> rows =
      ensemble_map<Eigen::VectorXd>(M, threads, one);

  CovarianceEstimate est;
  est.dim = grid.dim();
  est.comps = n;
  est.t = t;
  est.ensemble = M;
  est.method = "mc";
  est.horizon_warning = t > no_wraparound_horizon(data);
  est.pairs = pairs;
  est.blocks.assign(pairs.size(), Eigen::MatrixXd::Zero(bs, bs));
  est.stderrs.assign(pairs.size(), Eigen::MatrixXd::Zero(bs, bs));

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(per);
  for (const auto& r : rows) mean += r;
  mean /= M;
  Eigen::VectorXd ss = Eigen::VectorXd::Zero(per);
  for (const auto& r : rows) ss += (r - mean).cwiseAbs2();
  Eigen::VectorXd se = (ss / (static_cast<double>(M) * (M - 1))).cwiseSqrt();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    est.blocks[p] = Eigen::Map<Eigen::MatrixXd>(mean.data() + p * bs * bs, bs, bs);
    est.stderrs[p] = Eigen::Map<Eigen::MatrixXd>(se.data() + p * bs * bs, bs, bs);
  }
  return est;
}

InitialKernel InitialKernel::translation_invariant(const SpectralDensity& q) {
  InitialKernel k;
  k.terms.push_back({real_space_kernel(q), Profile::All});
  return k;
}

InitialKernel InitialKernel::two_temperature(const TwoTempSpec& spec) {
  if (spec.minus.grid() != spec.plus.grid())
    throw std::invalid_argument("two_temperature kernel: grid mismatch");
  InitialKernel k;
  k.cutoff_a = spec.cutoff_a;
  k.terms.push_back({real_space_kernel(spec.minus), Profile::Minus});
  k.terms.push_back({real_space_kernel(spec.plus), Profile::Plus});
  return k;
}

CovarianceEstimate exact_covariance_propagation(
    const InitialKernel& q0, const InteractionMatrix& model, double t,
    const std::vector<SitePair>& pairs, const TorusGrid& grid,
    double tail_drop) {
  DispersionData data(model, grid);
  if (t > no_wraparound_horizon(data) * 2.0)
    throw std::domain_error(
        "exact_covariance_propagation: t too large for this torus");
  const int n = data.components();
  const int bs = 2 * n;
  const int d = grid.dim();

  GreenFunction green(data, t, grid.extent() / 2 - 1);
  // Effective window: smallest radius whose outer shells all fall below
  // tail_drop relative to the peak block norm.
  double peak = 0.0;
  for (std::size_t i = 0; i < green.count(); ++i)
    peak = std::max(peak, green.at_flat(i).cwiseAbs().maxCoeff());
  std::vector<double> shell(green.window_radius() + 1, 0.0);
  for (std::size_t i = 0; i < green.count(); ++i) {
    auto z = green.offset_flat(i);
    int linf = 0;
    for (int c : z) linf = std::max(linf, std::abs(c));
    shell[linf] =
        std::max(shell[linf], green.at_flat(i).cwiseAbs().maxCoeff());
  }
  int radius = green.window_radius();
  while (radius > 0 && shell[radius] < tail_drop * peak) --radius;
  radius = std::min(radius + 1, green.window_radius());

  // Enumerate window offsets once.
  std::vector<std::vector<int>> offsets;
  std::vector<const Eigen::MatrixXd*> gblocks;
  for (std::size_t i = 0; i < green.count(); ++i) {
    auto z = green.offset_flat(i);
    int linf = 0;
    for (int c : z) linf = std::max(linf, std::abs(c));
    if (linf <= radius) {
      offsets.push_back(z);
      gblocks.push_back(&green.at_flat(i));
    }
  }

  CutoffProfile cutoff{q0.cutoff_a};
  auto weight = [&](InitialKernel::Profile p, int s) {
    switch (p) {
      case InitialKernel::Profile::All: return 1.0;
      case InitialKernel::Profile::Minus: return cutoff.minus(s);
      default: return cutoff.plus(s);
    }
  };

  CovarianceEstimate est;
  est.dim = d;
  est.comps = n;
  est.t = t;
  est.ensemble = 0;
  est.method = "exact";
  est.horizon_warning = t > no_wraparound_horizon(data);
  est.pairs = pairs;
  est.blocks.assign(pairs.size(), Eigen::MatrixXd::Zero(bs, bs));
  est.stderrs.assign(pairs.size(), Eigen::MatrixXd::Zero(bs, bs));

  std::vector<int> xp(d), yp(d), diff(d);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(bs, bs);
    for (const auto& term : q0.terms) {
      // Pre-contract over y': R(z) = sum_w q((x-z)-(y-w)) zeta((y-w)_d) G(w)^T
      // then acc += sum_z zeta((x-z)_d) G(z) R(z).
      for (std::size_t zi = 0; zi < offsets.size(); ++zi) {
        for (int k = 0; k < d; ++k) xp[k] = pairs[p].x[k] - offsets[zi][k];
        int sx = grid.signed_coordinate(xp[d - 1]);
        double wx = weight(term.profile, sx);
        if (wx == 0.0) continue;
        Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(bs, bs);
        for (std::size_t wi = 0; wi < offsets.size(); ++wi) {
          for (int k = 0; k < d; ++k) yp[k] = pairs[p].y[k] - offsets[wi][k];
          int sy = grid.signed_coordinate(yp[d - 1]);
          double wy = weight(term.profile, sy);
          if (wy == 0.0) continue;
          for (int k = 0; k < d; ++k) diff[k] = xp[k] - yp[k];
          const Eigen::MatrixXd& qz = term.kernel[grid.index(diff)];
          inner.noalias() += wy * qz * gblocks[wi]->transpose();
        }
        acc.noalias() += wx * (*gblocks[zi]) * inner;
      }
    }
    est.blocks[p] = acc;
  }
  return est;
}

CltReport clt_diagnostics(const SampleDraw& draw,
                          const InteractionMatrix& model,
                          const TestFunction& psi, double t, int M,
                          std::uint64_t master_seed, double q_infinity,
                          int threads) {
  if (!psi.d0_certified)
    throw std::invalid_argument(
        "clt_diagnostics: test function is not d0-certified");
  if (M < 1000) throw std::invalid_argument("clt_diagnostics: M >= 1000");
  DispersionData data(model, psi.grid);
  PropagatorSymbol symbol(data, t);

  auto one = [&](std::size_t i) {
    FieldState y = evolve(draw(sample_seed(master_seed, i)), symbol);
    return psi.pair_with(y);
  };
  std::vector<double> vals = ensemble_map<double>(M, threads, one);

  CltReport rep;
  rep.t = t;
  rep.ensemble = M;
  rep.q_infinity = q_infinity;
  rep.stats = moment_stats(vals);
  for (double mult : {0.5, 1.0, 2.0}) {
    double lambda = q_infinity > 0 ? mult / std::sqrt(q_infinity) : mult;
    std::vector<double> cr(vals.size()), ci(vals.size());
    for (std::size_t j = 0; j < vals.size(); ++j) {
      cr[j] = std::cos(lambda * vals[j]);
      ci[j] = std::sin(lambda * vals[j]);
    }
    auto mr = jackknife_mean(cr);
    auto mi = jackknife_mean(ci);
    rep.ecf.push_back({lambda, mr.mean, mi.mean, mr.se, mi.se,
                       std::exp(-0.5 * lambda * lambda * q_infinity)});
  }
  return rep;
}

std::vector<SitePair> pair_window(const std::vector<int>& base_x, int radius,
                                  int dim) {
  std::vector<std::vector<int>> sites;
  std::vector<int> offset(dim, -radius);
  while (true) {
    std::vector<int> s = base_x;
    for (int k = 0; k < dim; ++k) s[k] += offset[k];
    sites.push_back(s);
    int k = 0;
    while (k < dim && ++offset[k] > radius) offset[k++] = -radius;
    if (k == dim) break;
  }
  std::vector<SitePair> pairs;
  for (const auto& x : sites)
    for (const auto& y : sites) pairs.push_back({x, y});
  return pairs;
}

}  // namespace phononflux
