#ifndef PHONONFLUX_SPECTRAL_DENSITY_HPP
#define PHONONFLUX_SPECTRAL_DENSITY_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phononflux/grid.hpp"

namespace phononflux {

/// Per-node complex matrix field of block size 2n x 2n, stored contiguously.
class NodeBlockField {
 public:
  NodeBlockField(const TorusGrid& grid, int components)
      : grid_(grid),
        comps_(components),
        block_size_(2 * components),
        data_(grid.size() * static_cast<std::size_t>(block_size_) *
                  block_size_,
              Complex(0.0, 0.0)) {}

  const TorusGrid& grid() const { return grid_; }
  int components() const { return comps_; }
  int block_size() const { return block_size_; }

  Eigen::Map<Eigen::MatrixXcd> at(std::size_t node) {
    return {data_.data() + node * block_size_ * block_size_, block_size_,
            block_size_};
  }
  Eigen::Map<const Eigen::MatrixXcd> at(std::size_t node) const {
    return {data_.data() + node * block_size_ * block_size_, block_size_,
            block_size_};
  }

  /// n x n sub-block (i, j), i,j in {0,1}, of the node matrix.
  Eigen::MatrixXcd block(std::size_t node, int i, int j) const {
    return at(node).block(i * comps_, j * comps_, comps_, comps_);
  }

 private:
  TorusGrid grid_;
  int comps_;
  int block_size_;
  std::vector<Complex> data_;
};

/// Translation-invariant covariance symbol qhat^{ij}(theta): the full
/// 2n x 2n block matrix per node. Hermitian PSD at every node and
/// conjugate-symmetric in theta so real-space correlations are real.
class SpectralDensity : public NodeBlockField {
 public:
  SpectralDensity(const TorusGrid& grid, int components,
                  double correlation_range = -1.0, std::string label = {})
      : NodeBlockField(grid, components),
        correlation_range_(correlation_range),
        label_(std::move(label)) {}

  /// Correlation range r0 (q(z) = 0 for |z| >= r0); negative = unbounded.
  double correlation_range() const { return correlation_range_; }
  const std::string& label() const { return label_; }

  double hermiticity_defect() const;
  double conjugate_symmetry_defect() const;
  /// Most negative eigenvalue across nodes (0 when PSD).
  double min_eigenvalue() const;

 private:
  double correlation_range_;
  std::string label_;
};

/// Real-space correlation kernel q(z): inverse transform of every entry of
/// the density blocks. Throws if the imaginary residue exceeds imag_tol.
std::vector<Eigen::MatrixXd> real_space_kernel(const SpectralDensity& q,
                                               double imag_tol = 1e-9);

}  // namespace phononflux

#endif
