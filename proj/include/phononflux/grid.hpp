#ifndef PHONONFLUX_GRID_HPP
#define PHONONFLUX_GRID_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace phononflux {

using Complex = std::complex<double>;

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Discretization of the d-torus: nodes theta_m = 2*pi*m/N, m in {0..N-1}^d.
/// The same index set doubles as the spatial torus of extent N per axis.
/// Flattened index convention: axis 0 is fastest, idx = sum_a m_a * N^a.
class TorusGrid {
 public:
  TorusGrid(int dim, int extent);

  int dim() const { return dim_; }
  int extent() const { return extent_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  Eigen::VectorXd theta(std::size_t node) const;
  void coords(std::size_t node, int* out) const;
  std::vector<int> coords(std::size_t node) const;

  /// Flatten coordinates, wrapping each into [0, N).
  std::size_t index(const int* c) const;
  std::size_t index(const std::vector<int>& c) const { return index(c.data()); }
  std::size_t index(std::initializer_list<int> c) const {
    return index(c.begin());
  }

  /// Node of -theta_m (mod 2*pi), equally the site -x on the spatial torus.
  std::size_t negate(std::size_t node) const;

  std::size_t shift(std::size_t node, int axis, int delta) const;

  /// Representative of c in (-N/2, N/2]; used for seam-relative positions.
  int signed_coordinate(int c) const {
    int r = c % extent_;
    if (r < 0) r += extent_;
    return r < extent_ / 2 ? r : r - extent_;
  }

  /// True when theta_m == -theta_m mod 2*pi (every coordinate 0 or N/2).
  bool self_conjugate(std::size_t node) const { return node == negate(node); }

  bool operator==(const TorusGrid& o) const {
    return dim_ == o.dim_ && extent_ == o.extent_;
  }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }

 private:
  int dim_;
  int extent_;
  std::size_t size_;
  std::vector<std::size_t> strides_;
};

/// Forward transform with the kernel e^{+i theta.x}:
///   out[m] = sum_x in[x] e^{+i theta_m . x}
void fourier_forward(const TorusGrid& grid, Eigen::VectorXcd& data);

/// Inverse of fourier_forward:
///   out[x] = N^{-d} sum_m in[m] e^{-i theta_m . x}
void fourier_inverse(const TorusGrid& grid, Eigen::VectorXcd& data);

/// Forward transform of a real field, returned as a complex spectrum.
Eigen::VectorXcd fourier_forward_real(const TorusGrid& grid,
                                      const Eigen::VectorXd& data);

/// Inverse transform expected to land on a real field. Returns the maximum
/// imaginary residue relative to the field scale via `imag_residue`.
Eigen::VectorXd fourier_inverse_real(const TorusGrid& grid,
                                     const Eigen::VectorXcd& data,
                                     double* imag_residue = nullptr);

}  // namespace phononflux

#endif
