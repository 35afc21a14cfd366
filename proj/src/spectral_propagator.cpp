#include "phononflux/spectral_propagator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace phononflux {

double sinc_scaled(double omega, double t) {
  double x = omega * t;
  if (std::abs(x) < 1e-4) {
    double x2 = x * x;
    return t * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  }
  return std::sin(x) / omega;
}

PropagatorSymbol::PropagatorSymbol(const DispersionData& data, double t)
    : NodeBlockField(data.grid(), data.components()), time_(t) {
  const int n = data.components();
  for (std::size_t node = 0; node < grid().size(); ++node) {
    auto g = at(node);
    for (const BranchCluster& c : data.clusters(node)) {
      double cs = std::cos(c.omega * t);
      double sn_over = sinc_scaled(c.omega, t);
      double sn_times = std::sin(c.omega * t) * c.omega;
      g.block(0, 0, n, n) += cs * c.projection;
      g.block(0, n, n, n) += sn_over * c.projection;
      g.block(n, 0, n, n) -= sn_times * c.projection;
      g.block(n, n, n, n) += cs * c.projection;
    }
  }
}

namespace {

void check_grid(const FieldState& y, const NodeBlockField& f) {
  if (y.grid != f.grid() || y.components() != f.components())
    throw std::invalid_argument("field/symbol grid mismatch");
}

FieldState apply_symbol(const FieldState& y0, const PropagatorSymbol& symbol,
                        bool conjugate, double imag_tol) {
  check_grid(y0, symbol);
  if (!y0.all_finite())
    throw std::domain_error("evolve: non-finite input state");
  const TorusGrid& grid = y0.grid;
  const int n = y0.components();
  const std::size_t nodes = grid.size();

  std::vector<Eigen::VectorXcd> hat(2 * n);
  for (int c = 0; c < n; ++c) {
    hat[c] = fourier_forward_real(grid, y0.u.col(c));
    hat[n + c] = fourier_forward_real(grid, y0.v.col(c));
  }

  std::vector<Eigen::VectorXcd> out(2 * n, Eigen::VectorXcd(nodes));
  Eigen::VectorXcd in_vec(2 * n), out_vec(2 * n);
  for (std::size_t node = 0; node < nodes; ++node) {
    for (int c = 0; c < 2 * n; ++c) in_vec[c] = hat[c][node];
    auto g = symbol.at(node);
    out_vec = conjugate ? (g.adjoint() * in_vec).eval() : (g * in_vec).eval();
    for (int c = 0; c < 2 * n; ++c) out[c][node] = out_vec[c];
  }

  FieldState y(grid, n);
  y.time = y0.time + symbol.time();
  for (int c = 0; c < 2 * n; ++c) {
    double resid = 0.0;
    Eigen::VectorXd field = fourier_inverse_real(grid, out[c], &resid);
    if (resid > imag_tol) {
      std::ostringstream os;
      os << "evolve: imaginary residue " << resid << " exceeds " << imag_tol;
      throw std::runtime_error(os.str());
    }
    if (c < n)
      y.u.col(c) = field;
    else
      y.v.col(c - n) = field;
  }
  return y;
}

}  // namespace

FieldState evolve(const FieldState& y0, const PropagatorSymbol& symbol,
                  double imag_tol) {
  return apply_symbol(y0, symbol, false, imag_tol);
}

FieldState evolve(const FieldState& y0, const InteractionMatrix& model,
                  double t) {
  DispersionData data(model, y0.grid);
  return evolve(y0, PropagatorSymbol(data, t));
}

FieldState conjugate_evolve(const FieldState& phi0,
                            const PropagatorSymbol& symbol, double imag_tol) {
  // Ghat*_t = S Ghat_t S with S the component swap, so the conjugate flow is
  // swap -> evolve -> swap; applying the adjoint symbol directly is the same.
  return apply_symbol(phi0, symbol, true, imag_tol);
}

GreenFunction::GreenFunction(const DispersionData& data, double t,
                             int window_radius, double imag_tol)
    : dim_(data.grid().dim()),
      radius_(window_radius),
      block_size_(2 * data.components()),
      time_(t) {
  const TorusGrid& grid = data.grid();
  if (2 * window_radius >= grid.extent())
    throw std::invalid_argument(
        "green_function: window_radius must be < N/2 (torus aliasing)");
  PropagatorSymbol symbol(data, t);
  const std::size_t nodes = grid.size();

  // Inverse transform each entry of the symbol over the full torus.
  std::vector<Eigen::VectorXd> entries(block_size_ * block_size_);
  Eigen::VectorXcd buf(nodes);
  for (int r = 0; r < block_size_; ++r) {
    for (int c = 0; c < block_size_; ++c) {
      for (std::size_t node = 0; node < nodes; ++node)
        buf[node] = symbol.at(node)(r, c);
      double resid = 0.0;
      entries[r * block_size_ + c] = fourier_inverse_real(grid, buf, &resid);
      if (resid > imag_tol)
        throw std::runtime_error("green_function: imaginary residue");
    }
  }

  int side = 2 * radius_ + 1;
  std::size_t count = 1;
  for (int a = 0; a < dim_; ++a) count *= side;
  blocks_.assign(count, Eigen::MatrixXd::Zero(block_size_, block_size_));
  std::vector<int> z(dim_);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rest = i;
    for (int a = 0; a < dim_; ++a) {
      z[a] = static_cast<int>(rest % side) - radius_;
      rest /= side;
    }
    std::size_t node = grid.index(z);
    for (int r = 0; r < block_size_; ++r)
      for (int c = 0; c < block_size_; ++c)
        blocks_[i](r, c) = entries[r * block_size_ + c][node];
  }
}

std::size_t GreenFunction::flat_index(const std::vector<int>& z) const {
  int side = 2 * radius_ + 1;
  std::size_t idx = 0, mult = 1;
  for (int a = 0; a < dim_; ++a) {
    if (std::abs(z[a]) > radius_)
      throw std::out_of_range("green_function: offset outside window");
    idx += static_cast<std::size_t>(z[a] + radius_) * mult;
    mult *= side;
  }
  return idx;
}

const Eigen::MatrixXd& GreenFunction::at(const std::vector<int>& z) const {
  return blocks_[flat_index(z)];
}

std::vector<int> GreenFunction::offset_flat(std::size_t i) const {
  int side = 2 * radius_ + 1;
  std::vector<int> z(dim_);
  for (int a = 0; a < dim_; ++a) {
    z[a] = static_cast<int>(i % side) - radius_;
    i /= side;
  }
  return z;
}

Eigen::MatrixXd GreenFunction::window_sum() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(block_size_, block_size_);
  for (const auto& b : blocks_) s += b;
  return s;
}

double GreenFunction::boundary_norm() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    auto z = offset_flat(i);
    int linf = 0;
    for (int c : z) linf = std::max(linf, std::abs(c));
    if (linf == radius_)
      worst = std::max(worst, blocks_[i].cwiseAbs().maxCoeff());
  }
  return worst;
}

GreenFunction green_function(const DispersionData& data, double t,
                             int window_radius) {
  return GreenFunction(data, t, window_radius);
}

double hamiltonian(const FieldState& y, const InteractionMatrix& model) {
  if (model.components() != y.components())
    throw std::invalid_argument("hamiltonian: component mismatch");
  if (model.dim() != y.grid.dim())
    throw std::invalid_argument("hamiltonian: dimension mismatch");
  const TorusGrid& grid = y.grid;
  double kinetic = 0.5 * y.v.squaredNorm();
  double potential = 0.0;
  std::vector<int> c(grid.dim()), cz(grid.dim());
  for (const auto& e : model.entries()) {
    // sum_x u(x)^T V(z) u(x - z)
    double acc = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
      grid.coords(node, c.data());
      for (int a = 0; a < grid.dim(); ++a) cz[a] = c[a] - e.z[a];
      std::size_t other = grid.index(cz);
      acc += (y.u.row(node) * e.V).dot(y.u.row(other));
    }
    potential += acc;
  }
  return kinetic + 0.5 * potential;
}

double phase_space_norm(const FieldState& y, double alpha) {
  const TorusGrid& grid = y.grid;
  double acc = 0.0;
  std::vector<int> c(grid.dim());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.coords(node, c.data());
    double r2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      double s = grid.signed_coordinate(c[a]);
      r2 += s * s;
    }
    double w = std::pow(1.0 + r2, alpha);
    acc += w * (y.u.row(node).squaredNorm() + y.v.row(node).squaredNorm());
  }
  return acc;
}

SpectralDensity evolve_covariance_spectral(const SpectralDensity& q,
                                           const PropagatorSymbol& symbol) {
  if (q.grid() != symbol.grid() || q.components() != symbol.components())
    throw std::invalid_argument("evolve_covariance_spectral: grid mismatch");
  SpectralDensity out(q.grid(), q.components(), q.correlation_range(),
                      q.label());
  for (std::size_t node = 0; node < q.grid().size(); ++node) {
    auto g = symbol.at(node);
    out.at(node) = g * q.at(node) * g.adjoint();
  }
  return out;
}

SpectralDensity evolve_covariance_spectral(const SpectralDensity& q,
                                           const DispersionData& data,
                                           double t) {
  return evolve_covariance_spectral(q, PropagatorSymbol(data, t));
}

double no_wraparound_horizon(const DispersionData& data) {
  double vbar = data.max_group_velocity();
  if (vbar <= 0.0) return std::numeric_limits<double>::infinity();
  return data.grid().extent() / (4.0 * vbar);
}

}  // namespace phononflux
