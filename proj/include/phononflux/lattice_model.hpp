#ifndef PHONONFLUX_LATTICE_MODEL_HPP
#define PHONONFLUX_LATTICE_MODEL_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phononflux/grid.hpp"

namespace phononflux {

struct InteractionEntry {
  std::vector<int> z;
  Eigen::MatrixXd V;
};

/// Finite-support force kernel z -> V(z) of the crystal. Entries are kept
/// sorted lexicographically in z so identical kernels compare and iterate
/// identically regardless of construction order.
class InteractionMatrix {
 public:
  InteractionMatrix(int dim, int components,
                    std::vector<InteractionEntry> entries);

  /// Nearest-neighbour elastic lattice: V(0) = 2d + m^2, V(+-e_k) = -1.
  static InteractionMatrix elastic(int dim, double m);

  int dim() const { return dim_; }
  int components() const { return comps_; }
  int support_radius() const { return support_radius_; }
  const std::vector<InteractionEntry>& entries() const { return entries_; }

  /// Largest |V(-z) - V(z)^T| over the support; 0 for a symmetric kernel.
  double symmetry_defect() const;
  void require_symmetric(double tol = 1e-12) const;

  /// V(z), zero matrix when z is outside the support.
  Eigen::MatrixXd at(const std::vector<int>& z) const;

  /// Fourier symbol  Vhat(theta) = sum_z V(z) e^{i z.theta}.
  Eigen::MatrixXcd symbol(const Eigen::VectorXd& theta) const;

  /// d/dtheta_axis Vhat(theta) = sum_z i z_axis V(z) e^{i z.theta}.
  Eigen::MatrixXcd symbol_derivative(const Eigen::VectorXd& theta,
                                     int axis) const;

  InteractionMatrix scaled(double factor) const;

  std::string to_json() const;
  static InteractionMatrix from_json(const std::string& text);

 private:
  int dim_;
  int comps_;
  int support_radius_;
  std::vector<InteractionEntry> entries_;
  std::map<std::vector<int>, std::size_t> lookup_;
};

/// One eigenvalue cluster of Omega(theta) at a grid node: the common branch
/// frequency, its multiplicity, the spectral projection and the
/// Hellmann-Feynman group velocity. `singular` marks omega below the floor.
struct BranchCluster {
  double omega = 0.0;
  int rank = 0;
  Eigen::MatrixXcd projection;
  Eigen::VectorXd velocity;
  bool singular = false;
};

struct DispersionOptions {
  double cluster_tol_rel = 1e-8;   // relative to max omega on the grid
  double psd_tol = 1e-9;           // E3: eigenvalues below -tol*scale fail
  double omega_floor = 1e-12;      // below this a branch is singular
};

/// Per-node dispersion data: branch frequencies sorted ascending, eigenvalue
/// clusters with projections, group velocities, and the near-critical mask.
class DispersionData {
 public:
  DispersionData(const InteractionMatrix& model, const TorusGrid& grid,
                 const DispersionOptions& opt = {});

  const TorusGrid& grid() const { return grid_; }
  int components() const { return comps_; }
  const DispersionOptions& options() const { return opt_; }

  double omega(std::size_t node, int branch) const {
    return omega_[node * comps_ + branch];
  }
  /// Group velocity component of a branch (0 when the branch is singular).
  double velocity(std::size_t node, int branch, int axis) const {
    return velocity_[(node * comps_ + branch) * grid_.dim() + axis];
  }
  bool branch_singular(std::size_t node, int branch) const {
    return singular_[node * comps_ + branch] != 0;
  }

  const std::vector<BranchCluster>& clusters(std::size_t node) const {
    return clusters_[node];
  }

  double max_omega() const { return max_omega_; }
  double max_group_velocity() const { return max_velocity_; }
  double min_symbol_eigenvalue() const { return min_eigenvalue_; }

  /// Finite-difference Hessian determinant of omega_branch at a node.
  double hessian_determinant(std::size_t node, int branch) const;

  const std::vector<std::uint8_t>& near_critical() const { return mask_; }
  bool is_near_critical(std::size_t node) const { return mask_[node] != 0; }

  /// sgn(d omega / d theta_d) of a cluster, 0 within tol of zero or when the
  /// node is masked.
  static int velocity_sign(const BranchCluster& c, int axis, double tol);

 private:
  friend std::vector<std::uint8_t> critical_set(const DispersionData&, double);
  TorusGrid grid_;
  int comps_;
  DispersionOptions opt_;
  std::vector<double> omega_;     // nodes x n
  std::vector<double> velocity_;  // nodes x n x d
  std::vector<std::uint8_t> singular_;
  std::vector<std::vector<BranchCluster>> clusters_;
  std::vector<std::uint8_t> mask_;
  double max_omega_ = 0.0;
  double max_velocity_ = 0.0;
  double min_eigenvalue_ = 0.0;
};

inline DispersionData dispersion(const InteractionMatrix& model,
                                 const TorusGrid& grid,
                                 const DispersionOptions& opt = {}) {
  return DispersionData(model, grid, opt);
}

/// Nodes where some branch has omega < tol, |d omega/d theta_d| < tol,
/// |det Hess omega| < tol, or sits within cluster_tol of a cluster boundary.
std::vector<std::uint8_t> critical_set(const DispersionData& data, double tol);

enum class ConditionStatus { Pass, Fail, NotApplicable };

struct ConditionCheck {
  ConditionStatus status = ConditionStatus::NotApplicable;
  double value = 0.0;
  std::string witness;
};

struct ConditionReport {
  ConditionCheck e1, e2, e3, e4, e5, e6;
  double critical_fraction = 0.0;
  bool all_pass() const;
};

struct ConditionTolerances {
  double symmetry_tol = 1e-12;
  double psd_tol = 1e-9;
  double hessian_tol = 1e-10;     // |D_k| below this counts as zero for E4
  double hessian_fail_fraction = 0.99;
  double e5_range_tol = 1e-9;     // omega_k +- omega_l constant across grid
  double e5_const_tol = 1e-9;
  double singular_tol = 1e-12;    // node excluded from the E6 average
  double e6_growth_factor = 1.1;  // N -> 2N average growth marking divergence
};

ConditionReport check_conditions(const InteractionMatrix& model,
                                 const DispersionData& data,
                                 const ConditionTolerances& tol = {});

std::string to_string(ConditionStatus s);

}  // namespace phononflux

#endif
