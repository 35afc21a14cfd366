#ifndef PHONONFLUX_SPECTRAL_PROPAGATOR_HPP
#define PHONONFLUX_SPECTRAL_PROPAGATOR_HPP

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "phononflux/field_state.hpp"
#include "phononflux/lattice_model.hpp"
#include "phononflux/spectral_density.hpp"

namespace phononflux {

/// Fourier symbol of the exact flow at time t, assembled clusterwise:
///   Ghat_t = [ cos(Omega t)        sin(Omega t) Omega^{-1} ]
///            [ -sin(Omega t) Omega cos(Omega t)            ]
/// with sin(Omega t) Omega^{-1} extended by t at omega = 0.
class PropagatorSymbol : public NodeBlockField {
 public:
  PropagatorSymbol(const DispersionData& data, double t);
  double time() const { return time_; }

 private:
  double time_;
};

inline PropagatorSymbol propagator_symbol(const DispersionData& data,
                                          double t) {
  return PropagatorSymbol(data, t);
}

/// sin(w t)/w with the limit t at w = 0.
double sinc_scaled(double omega, double t);

/// Exact spectral evolution Yhat(t) = Ghat_t Yhat(0). The imaginary residue
/// of the returned fields must stay below imag_tol relative, else throws.
FieldState evolve(const FieldState& y0, const PropagatorSymbol& symbol,
                  double imag_tol = 1e-10);

/// Convenience overload that builds dispersion data and the symbol itself.
FieldState evolve(const FieldState& y0, const InteractionMatrix& model,
                  double t);

/// Flow of the conjugate equation (components swapped relative to evolve);
/// its symbol is Ghat*_t.
FieldState conjugate_evolve(const FieldState& phi0,
                            const PropagatorSymbol& symbol,
                            double imag_tol = 1e-10);

/// Real-space Green function restricted to |z|_inf <= window_radius.
class GreenFunction {
 public:
  GreenFunction(const DispersionData& data, double t, int window_radius,
                double imag_tol = 1e-9);

  int dim() const { return dim_; }
  int window_radius() const { return radius_; }
  int block_size() const { return block_size_; }
  double time() const { return time_; }

  /// G_t(z); throws when |z|_inf exceeds the window.
  const Eigen::MatrixXd& at(const std::vector<int>& z) const;

  /// Sum over the stored window (equals Ghat_t(0) when the window covers the
  /// torus).
  Eigen::MatrixXd window_sum() const;

  /// Iteration support: flattened offsets are enumerated in lexicographic
  /// order over {-R..R}^d.
  std::size_t count() const { return blocks_.size(); }
  const Eigen::MatrixXd& at_flat(std::size_t i) const { return blocks_[i]; }
  std::vector<int> offset_flat(std::size_t i) const;

  /// Largest block norm on the outermost shell; a tail gauge.
  double boundary_norm() const;

 private:
  std::size_t flat_index(const std::vector<int>& z) const;
  int dim_;
  int radius_;
  int block_size_;
  double time_;
  std::vector<Eigen::MatrixXd> blocks_;
};

GreenFunction green_function(const DispersionData& data, double t,
                             int window_radius);

/// H(Y) = 1/2 sum |v|^2 + 1/2 sum (V(x-y) u(y), u(x)) with periodic wrap.
double hamiltonian(const FieldState& y, const InteractionMatrix& model);

/// Q_t(theta) = Ghat_t(theta) qhat(theta) Ghat_t^*(theta) nodewise.
SpectralDensity evolve_covariance_spectral(const SpectralDensity& q,
                                           const PropagatorSymbol& symbol);
SpectralDensity evolve_covariance_spectral(const SpectralDensity& q,
                                           const DispersionData& data,
                                           double t);

/// Torus evolution matches the infinite lattice inside the observation
/// window for t <= L / (4 vbar).
double no_wraparound_horizon(const DispersionData& data);

}  // namespace phononflux

#endif
