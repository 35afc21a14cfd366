#ifndef PHONONFLUX_RANDOM_FIELDS_HPP
#define PHONONFLUX_RANDOM_FIELDS_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "phononflux/field_state.hpp"
#include "phononflux/lattice_model.hpp"
#include "phononflux/spectral_density.hpp"

namespace phononflux {

/// Gibbs density at temperature T:
///   qhat^{00} = T Vhat^{-1},  qhat^{11} = T I,  cross blocks zero.
/// Throws when a branch frequency sits below the floor with T > 0.
SpectralDensity gibbs_spectral_density(const DispersionData& data, double T);

/// Separable finite-range density qhat^{00} = qhat^{11} =
/// scale * prod_k (1 - cos N0 theta_k)/(1 - cos theta_k), evaluated in the
/// stable Fejer form. Real-space kernel is the product of triangles of
/// half-width N0; components n = 1.
SpectralDensity triangular_density(const TorusGrid& grid, int n0,
                                   double scale);

/// Deterministic per-sample seed stream (order-independent ensembles).
std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t index);

/// Draws zero-mean Gaussian fields whose covariance is exactly the grid
/// periodization of the density: per node Yhat = S xi with S S* = qhat N^d,
/// conjugate symmetry enforced by generating on a half grid.
class GaussianSampler {
 public:
  explicit GaussianSampler(const SpectralDensity& density,
                           double psd_tol = 1e-9);

  FieldState sample(std::uint64_t seed) const;

  const TorusGrid& grid() const { return grid_; }
  int components() const { return comps_; }

 private:
  TorusGrid grid_;
  int comps_;
  std::vector<Complex> factors_;  // S per node, (2n)^2 each
  std::vector<std::size_t> canonical_;  // self-conjugate first, then pairs
  std::size_t self_count_;
};

/// Cutoff profiles zeta_+-(s): 1 for +-s > a, 0 for +-s < -a, linear ramp in
/// between; the sharp default a = 0 gives zeta_+ = 1_{s>=0}, zeta_- = 1_{s<0}.
struct CutoffProfile {
  int a = 0;
  double plus(int s) const;
  double minus(int s) const;
};

struct TwoTempSpec {
  SpectralDensity minus;
  SpectralDensity plus;
  int cutoff_a = 0;
};

/// Glues independent samples Y0(x) = zeta_-(x_d) Y_-(x) + zeta_+(x_d) Y_+(x)
/// with x_d measured as the signed offset from the seam plane x_d = 0.
class TwoTemperatureSampler {
 public:
  explicit TwoTemperatureSampler(const TwoTempSpec& spec);
  FieldState sample(std::uint64_t seed) const;
  const TorusGrid& grid() const { return minus_.grid(); }
  int components() const { return minus_.components(); }

 private:
  GaussianSampler minus_;
  GaussianSampler plus_;
  CutoffProfile cutoff_;
};

/// Componentwise odd clipping u -> clamp(u, -c, c), same for v.
FieldState nongaussian_transform(const FieldState& y, double clip);

/// E X^2 for X = clamp(Z, -c, c), Z ~ N(0, sigma^2).
double clipped_gaussian_variance(double sigma2, double c);
/// E X^4 for the same X.
double clipped_gaussian_fourth_moment(double sigma2, double c);

}  // namespace phononflux

#endif
