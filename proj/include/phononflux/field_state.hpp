#ifndef PHONONFLUX_FIELD_STATE_HPP
#define PHONONFLUX_FIELD_STATE_HPP

#include <Eigen/Dense>

#include "phononflux/grid.hpp"

namespace phononflux {

/// Displacement/velocity pair Y = (u, v) on the finite periodic lattice.
/// Columns index the n field components, rows the flattened torus sites.
struct FieldState {
  TorusGrid grid;
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
  double time = 0.0;

  FieldState(const TorusGrid& g, int components)
      : grid(g),
        u(Eigen::MatrixXd::Zero(g.size(), components)),
        v(Eigen::MatrixXd::Zero(g.size(), components)) {}

  int components() const { return static_cast<int>(u.cols()); }

  bool all_finite() const { return u.allFinite() && v.allFinite(); }
};

/// Weighted phase-space norm  sum_x (|u|^2 + |v|^2) (1 + |x|^2)^alpha  with
/// |x| measured through the signed torus representative.
double phase_space_norm(const FieldState& y, double alpha);

}  // namespace phononflux

#endif
