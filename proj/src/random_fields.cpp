#include "phononflux/random_fields.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace phononflux {

double SpectralDensity::hermiticity_defect() const {
  double worst = 0.0;
  for (std::size_t node = 0; node < grid().size(); ++node) {
    auto m = at(node);
    worst = std::max(worst, (m - m.adjoint().eval()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double SpectralDensity::conjugate_symmetry_defect() const {
  double worst = 0.0;
  for (std::size_t node = 0; node < grid().size(); ++node) {
    Eigen::MatrixXcd diff =
        at(grid().negate(node)) - at(node).transpose().eval();
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return worst;
}

double SpectralDensity::min_eigenvalue() const {
  double lo = 0.0;
  for (std::size_t node = 0; node < grid().size(); ++node) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        at(node), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

std::vector<Eigen::MatrixXd> real_space_kernel(const SpectralDensity& q,
                                               double imag_tol) {
  const TorusGrid& grid = q.grid();
  const int bs = q.block_size();
  std::vector<Eigen::MatrixXd> kernel(grid.size(),
                                      Eigen::MatrixXd::Zero(bs, bs));
  Eigen::VectorXcd buf(grid.size());
  for (int r = 0; r < bs; ++r) {
    for (int c = 0; c < bs; ++c) {
      for (std::size_t node = 0; node < grid.size(); ++node)
        buf[node] = q.at(node)(r, c);
      double resid = 0.0;
      Eigen::VectorXd entry = fourier_inverse_real(grid, buf, &resid);
      if (resid > imag_tol)
        throw std::runtime_error(
            "real_space_kernel: density is not conjugate-symmetric");
      for (std::size_t node = 0; node < grid.size(); ++node)
        kernel[node](r, c) = entry[node];
    }
  }
  return kernel;
}

SpectralDensity gibbs_spectral_density(const DispersionData& data, double T) {
  if (T < 0.0)
    throw std::invalid_argument("gibbs_spectral_density: T must be >= 0");
  const int n = data.components();
  std::ostringstream label;
  label << "gibbs(T=" << T << ")";
  SpectralDensity q(data.grid(), n, -1.0, label.str());
  if (T == 0.0) return q;
  for (std::size_t node = 0; node < data.grid().size(); ++node) {
    auto m = q.at(node);
    for (const BranchCluster& c : data.clusters(node)) {
      if (c.singular) {
        std::ostringstream os;
        os << "gibbs_spectral_density: Vhat singular at node " << node
           << " (condition E6 violated for T > 0)";
        throw std::domain_error(os.str());
      }
      m.block(0, 0, n, n) += (T / (c.omega * c.omega)) * c.projection;
    }
    m.block(n, n, n, n) = T * Eigen::MatrixXcd::Identity(n, n);
  }
  return q;
}

namespace {

// (1 - cos n0 x)/(1 - cos x) in the stable Fejer form (sin ratios squared).
double fejer_factor(double x, int n0) {
  double s = std::sin(0.5 * x);
  if (std::abs(s) < 1e-8) return static_cast<double>(n0) * n0;
  double r = std::sin(0.5 * n0 * x) / s;
  return r * r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

SpectralDensity triangular_density(const TorusGrid& grid, int n0,
                                   double scale) {
  if (n0 < 1) throw std::invalid_argument("triangular_density: N0 >= 1");
  std::ostringstream label;
  label << "triangular(N0=" << n0 << ",scale=" << scale << ")";
  SpectralDensity q(grid, 1, static_cast<double>(n0) * grid.dim(),
                    label.str());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::VectorXd th = grid.theta(node);
    double f = scale;
    for (int a = 0; a < grid.dim(); ++a) f *= fejer_factor(th[a], n0);
    auto m = q.at(node);
    m(0, 0) = f;
    m(1, 1) = f;
  }
  return q;
}

std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^
                    (0x9E3779B97F4A7C15ULL * (index + 1)));
}

GaussianSampler::GaussianSampler(const SpectralDensity& density,
                                 double psd_tol)
    : grid_(density.grid()), comps_(density.components()) {
  const int bs = 2 * comps_;
  const std::size_t nodes = grid_.size();
  const double volume = static_cast<double>(nodes);

  double scale = 0.0;
  for (std::size_t node = 0; node < nodes; ++node)
    scale = std::max(scale, density.at(node).cwiseAbs().maxCoeff());

  // Split nodes into self-conjugate ones and one representative per
  // {theta, -theta} pair; the partner spectrum is derived by conjugation.
  std::vector<std::size_t> selfs, pairs;
  for (std::size_t node = 0; node < nodes; ++node) {
    std::size_t neg = grid_.negate(node);
    if (neg == node)
      selfs.push_back(node);
    else if (node < neg)
      pairs.push_back(node);
  }
  self_count_ = selfs.size();
  canonical_ = selfs;
  canonical_.insert(canonical_.end(), pairs.begin(), pairs.end());

  factors_.assign(nodes * bs * bs, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < canonical_.size(); ++i) {
    std::size_t node = canonical_[i];
    Eigen::MatrixXcd q = density.at(node);
    Eigen::MatrixXcd s(bs, bs);
    if (i < self_count_) {
      // Self-conjugate node: the block is real symmetric; build a real
      // factor so that S S^T = qhat N^d holds for the real draw.
      Eigen::MatrixXd qr = q.real();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qr);
      Eigen::VectorXd lam = es.eigenvalues();
      for (int k = 0; k < bs; ++k) {
        if (lam[k] < -psd_tol * (1.0 + scale))
          throw std::domain_error(
              "gaussian sampler: density not positive semidefinite");
        lam[k] = std::sqrt(std::max(lam[k], 0.0) * volume);
      }
      s = (es.eigenvectors() * lam.asDiagonal() *
           es.eigenvectors().transpose())
              .cast<Complex>();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(q);
      Eigen::VectorXd lam = es.eigenvalues();
      for (int k = 0; k < bs; ++k) {
        if (lam[k] < -psd_tol * (1.0 + scale))
          throw std::domain_error(
              "gaussian sampler: density not positive semidefinite");
        lam[k] = std::sqrt(std::max(lam[k], 0.0) * volume);
      }
      s = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    }
    Eigen::Map<Eigen::MatrixXcd>(factors_.data() + node * bs * bs, bs, bs) = s;
  }
}

FieldState GaussianSampler::sample(std::uint64_t seed) const {
  const int n = comps_;
  const int bs = 2 * n;
  const std::size_t nodes = grid_.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Eigen::VectorXcd> hat(bs, Eigen::VectorXcd::Zero(nodes));
  Eigen::VectorXcd xi(bs), yhat(bs);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < canonical_.size(); ++i) {
    std::size_t node = canonical_[i];
    Eigen::Map<const Eigen::MatrixXcd> s(factors_.data() + node * bs * bs, bs,
                                         bs);
    if (i < self_count_) {
      for (int c = 0; c < bs; ++c) xi[c] = Complex(normal(rng), 0.0);
      yhat = s * xi;
      for (int c = 0; c < bs; ++c) hat[c][node] = yhat[c];
    } else {
      for (int c = 0; c < bs; ++c)
        xi[c] = Complex(normal(rng), normal(rng)) * inv_sqrt2;
      yhat = s * xi;
      std::size_t neg = grid_.negate(node);
      for (int c = 0; c < bs; ++c) {
        hat[c][node] = yhat[c];
        hat[c][neg] = std::conj(yhat[c]);
      }
    }
  }

  FieldState y(grid_, n);
  for (int c = 0; c < bs; ++c) {
    double resid = 0.0;
    Eigen::VectorXd field = fourier_inverse_real(grid_, hat[c], &resid);
    if (resid > 1e-8)
      throw std::runtime_error("gaussian sampler: imaginary residue");
    if (c < n)
      y.u.col(c) = field;
    else
      y.v.col(c - n) = field;
  }
  return y;
}

double CutoffProfile::plus(int s) const {
  if (a == 0) return s >= 0 ? 1.0 : 0.0;
  if (s > a) return 1.0;
  if (s < -a) return 0.0;
  return (s + a) / (2.0 * a);
}

double CutoffProfile::minus(int s) const {
  if (a == 0) return s < 0 ? 1.0 : 0.0;
  if (s < -a) return 1.0;
  if (s > a) return 0.0;
  return (a - s) / (2.0 * a);
}

TwoTemperatureSampler::TwoTemperatureSampler(const TwoTempSpec& spec)
    : minus_(spec.minus), plus_(spec.plus), cutoff_{spec.cutoff_a} {
  if (spec.minus.grid() != spec.plus.grid() ||
      spec.minus.components() != spec.plus.components())
    throw std::invalid_argument("two-temperature spec: grid mismatch");
  if (spec.cutoff_a < 0)
    throw std::invalid_argument("two-temperature spec: cutoff a >= 0");
}

FieldState TwoTemperatureSampler::sample(std::uint64_t seed) const {
  FieldState ym = minus_.sample(splitmix64(seed ^ 0x517CC1B727220A95ULL));
  FieldState yp = plus_.sample(splitmix64(seed ^ 0x2545F4914F6CDD1DULL));
  const TorusGrid& grid = ym.grid;
  const int d = grid.dim();
  FieldState y(grid, ym.components());
  std::vector<int> c(d);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.coords(node, c.data());
    int s = grid.signed_coordinate(c[d - 1]);
    double zm = cutoff_.minus(s);
    double zp = cutoff_.plus(s);
    y.u.row(node) = zm * ym.u.row(node) + zp * yp.u.row(node);
    y.v.row(node) = zm * ym.v.row(node) + zp * yp.v.row(node);
  }
  return y;
}

FieldState nongaussian_transform(const FieldState& y, double clip) {
  if (!(clip > 0.0))
    throw std::invalid_argument("nongaussian_transform: clip must be > 0");
  FieldState out = y;
  auto clamp = [clip](double x) { return std::clamp(x, -clip, clip); };
  out.u = out.u.unaryExpr(clamp);
  out.v = out.v.unaryExpr(clamp);
  return out;
}

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

}  // namespace

double clipped_gaussian_variance(double sigma2, double c) {
  double sigma = std::sqrt(sigma2);
  double a = c / sigma;
  double inner = (2.0 * std_normal_cdf(a) - 1.0) - 2.0 * a * std_normal_pdf(a);
  double tails = 2.0 * a * a * (1.0 - std_normal_cdf(a));
  return sigma2 * (inner + tails);
}

double clipped_gaussian_fourth_moment(double sigma2, double c) {
  double sigma = std::sqrt(sigma2);
  double a = c / sigma;
  double inner = 3.0 * (2.0 * std_normal_cdf(a) - 1.0) -
                 2.0 * std_normal_pdf(a) * (a * a * a + 3.0 * a);
  double tails = 2.0 * a * a * a * a * (1.0 - std_normal_cdf(a));
  return sigma2 * sigma2 * (inner + tails);
}

}  // namespace phononflux
