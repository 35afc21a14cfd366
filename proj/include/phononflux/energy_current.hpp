#ifndef PHONONFLUX_ENERGY_CURRENT_HPP
#define PHONONFLUX_ENERGY_CURRENT_HPP

#include <string>
#include <vector>

#include "phononflux/covariance_lab.hpp"

namespace phononflux {

struct CurrentEstimate {
  int direction = 0;            // k, 0-based axis
  std::vector<int> site;        // x' with x'_k = 0 convention
  double t = 0.0;               // ignored for method "limit"
  double value = 0.0;
  double stderr_value = 0.0;
  std::string method;           // "mc" | "exact" | "limit"
  bool horizon_warning = false;
};

/// Energy current density across the plane x_k = x'_k:
///   j^k(x') = 1/2 sum_{y'} [ sum_{m<=-1, p>=0} (v(x'+m e_k), V(.) u(y'+p e_k))
///                          - sum_{m>=0, p<=-1} (...) ],
/// index ranges truncated by the interaction support.
double local_current(const FieldState& y, const InteractionMatrix& model,
                     const std::vector<int>& site, int k);

/// Site pairs whose Q^{10} blocks the mean-current formula consumes.
std::vector<SitePair> current_pairs(const InteractionMatrix& model,
                                    const std::vector<int>& site, int k);

/// E j^k(x', t) from the Q^{10} blocks of a covariance estimate; standard
/// errors propagated linearly across the sum.
CurrentEstimate mean_current_from_covariance(const CovarianceEstimate& q,
                                             const InteractionMatrix& model,
                                             const std::vector<int>& site,
                                             int k);

/// Ensemble mean of per-sample local currents with jackknife SE.
CurrentEstimate mc_mean_current(const SampleDraw& draw,
                                const InteractionMatrix& model, double t,
                                const std::vector<int>& site, int k, int M,
                                std::uint64_t master_seed, int threads = 0);

/// Limit mean current:
///   j_inf^k = -(i/2) (2 pi)^{-d} Integral (qhat_inf^{10})_{ab}
///             d_k conj(Vhat_{ab})  dtheta,
/// by grid quadrature; the imaginary residue must stay below 1e-9 relative.
Eigen::VectorXd limit_current(const LimitCovariance& q_inf,
                              const InteractionMatrix& model);

/// Gibbs-measure closed form:
///   j_inf^k = -(DeltaT/(2 pi)^d) sum_branches Integral
///             sgn(d omega/d theta_d) d omega/d theta_k  dtheta,
/// DeltaT = (T_plus - T_minus)/2; sgn = 0 on the critical mask.
Eigen::VectorXd gibbs_limit_current(const DispersionData& data, double t_plus,
                                    double t_minus, double sgn_tol = 1e-6);

struct SecondLawVerdict {
  bool pass = false;
  double current_d = 0.0;        // j_inf^d
  double conductivity = 0.0;     // C = -j_inf^d / (T_plus - T_minus)
  std::string detail;
};

/// PASS iff sign(j_inf^d) = -sign(T_plus - T_minus) (both zero within tol
/// also passes); C > 0 asserted when the temperatures differ.
SecondLawVerdict second_law_check(double t_plus, double t_minus,
                                  const Eigen::VectorXd& j_inf,
                                  double tol = 1e-12);

}  // namespace phononflux

#endif
