#include "phononflux/grid.hpp"

#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace phononflux {

TorusGrid::TorusGrid(int dim, int extent) : dim_(dim), extent_(extent) {
  if (dim < 1) throw std::invalid_argument("TorusGrid: dim must be >= 1");
  if (extent < 2 || extent % 2 != 0)
    throw std::invalid_argument("TorusGrid: extent must be even and >= 2");
  size_ = 1;
  strides_.resize(dim_);
  for (int a = 0; a < dim_; ++a) {
    strides_[a] = size_;
    size_ *= static_cast<std::size_t>(extent_);
  }
}

Eigen::VectorXd TorusGrid::theta(std::size_t node) const {
  Eigen::VectorXd th(dim_);
  for (int a = 0; a < dim_; ++a) {
    int c = static_cast<int>((node / strides_[a]) % extent_);
    th[a] = kTwoPi * c / extent_;
  }
  return th;
}

void TorusGrid::coords(std::size_t node, int* out) const {
  for (int a = 0; a < dim_; ++a)
    out[a] = static_cast<int>((node / strides_[a]) % extent_);
}

std::vector<int> TorusGrid::coords(std::size_t node) const {
  std::vector<int> c(dim_);
  coords(node, c.data());
  return c;
}

std::size_t TorusGrid::index(const int* c) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    int r = c[a] % extent_;
    if (r < 0) r += extent_;
    idx += static_cast<std::size_t>(r) * strides_[a];
  }
  return idx;
}

std::size_t TorusGrid::negate(std::size_t node) const {
  std::size_t idx = 0;
  for (int a = 0; a < dim_; ++a) {
    int c = static_cast<int>((node / strides_[a]) % extent_);
    int r = (extent_ - c) % extent_;
    idx += static_cast<std::size_t>(r) * strides_[a];
  }
  return idx;
}

std::size_t TorusGrid::shift(std::size_t node, int axis, int delta) const {
  int c = static_cast<int>((node / strides_[axis]) % extent_);
  int r = (c + delta) % extent_;
  if (r < 0) r += extent_;
  return node + (static_cast<std::size_t>(r) - static_cast<std::size_t>(c)) *
                    strides_[axis];
}

namespace {

Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

// Unnormalized DFT with kernel e^{-i 2 pi k n / N} applied along every axis.
void dft_all_axes(const TorusGrid& grid, Eigen::VectorXcd& data) {
  const int n = grid.extent();
  auto& fft = fft_engine();
  Eigen::VectorXcd line(n), out(n);
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const std::size_t stride = grid.stride(axis);
    const std::size_t lines = grid.size() / static_cast<std::size_t>(n);
    for (std::size_t l = 0; l < lines; ++l) {
      // Base index of the l-th line orthogonal to `axis`.
      std::size_t low = l % stride;
      std::size_t high = l / stride;
      std::size_t base = low + high * stride * static_cast<std::size_t>(n);
      for (int k = 0; k < n; ++k) line[k] = data[base + k * stride];
      fft.fwd(out, line);
      for (int k = 0; k < n; ++k) data[base + k * stride] = out[k];
    }
  }
}

}  // namespace

void fourier_forward(const TorusGrid& grid, Eigen::VectorXcd& data) {
  // sum_x f(x) e^{+i theta x} = conj(DFT(conj(f)))
  data = data.conjugate();
  dft_all_axes(grid, data);
  data = data.conjugate();
}

void fourier_inverse(const TorusGrid& grid, Eigen::VectorXcd& data) {
  dft_all_axes(grid, data);
  data /= static_cast<double>(grid.size());
}

Eigen::VectorXcd fourier_forward_real(const TorusGrid& grid,
                                      const Eigen::VectorXd& data) {
  Eigen::VectorXcd z = data.cast<Complex>();
  fourier_forward(grid, z);
  return z;
}

Eigen::VectorXd fourier_inverse_real(const TorusGrid& grid,
                                     const Eigen::VectorXcd& data,
                                     double* imag_residue) {
  Eigen::VectorXcd z = data;
  fourier_inverse(grid, z);
  double scale = z.real().cwiseAbs().maxCoeff();
  double resid = z.imag().cwiseAbs().maxCoeff();
  if (imag_residue) *imag_residue = scale > 0 ? resid / scale : resid;
  return z.real();
}

}  // namespace phononflux
