#ifndef PHONONFLUX_COVARIANCE_LAB_HPP
#define PHONONFLUX_COVARIANCE_LAB_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phononflux/ensemble.hpp"
#include "phononflux/random_fields.hpp"
#include "phononflux/spectral_propagator.hpp"

namespace phononflux {

/// Finitely supported field pair Psi = (Psi^0, Psi^1) with cached spectrum.
/// d0_certified means the spectrum is numerically vanishing on the critical
/// mask (relative leak below certify_tol).
struct TestFunction {
  TorusGrid grid;
  int comps = 1;
  Eigen::MatrixXd values;          // nodes x 2n, zero outside the support
  std::vector<std::size_t> support;
  Eigen::MatrixXcd spectrum;       // nodes x 2n
  bool d0_certified = false;
  double leak = 0.0;
  static constexpr double certify_tol = 1e-8;

  TestFunction(const TorusGrid& g, int components)
      : grid(g),
        comps(components),
        values(Eigen::MatrixXd::Zero(g.size(), 2 * components)),
        spectrum(Eigen::MatrixXcd::Zero(g.size(), 2 * components)) {}

  /// <Y, Psi> = sum_x (u(x).Psi^0(x) + v(x).Psi^1(x)).
  double pair_with(const FieldState& y) const;
};

/// Spectral bump at +-theta0 (compact cosine taper of the given radial
/// width), placed in one of the 2n components, inverse-transformed and
/// truncated to |x|_inf <= support_radius (negative radius keeps the full
/// torus). Certification is re-checked after truncation. Throws when the
/// bump ball intersects the critical mask, naming the nearest admissible
/// center.
TestFunction make_test_function(const DispersionData& data,
                                const Eigen::VectorXd& theta0, double width,
                                int support_radius = -1, int component = 0);

/// Test function from explicit site values; certification measured against
/// the supplied mask.
TestFunction test_function_from_values(
    const TorusGrid& grid, int comps,
    const std::vector<std::pair<std::vector<int>, Eigen::VectorXd>>& sites,
    const std::vector<std::uint8_t>& mask);

/// Q(Psi,Psi) = N^{-d} sum_m Psihat^* qhat Psihat; the imaginary residue
/// must stay below 1e-9 relative.
double quadratic_form(const NodeBlockField& qhat, const TestFunction& psi);

struct SitePair {
  std::vector<int> x, y;
};

/// Covariance values on an explicit list of site pairs. Blocks are the full
/// 2n x 2n matrices [Q^{ij}(x,y)]_{i,j=0,1} with Q^{ij} = E Y^i(x) (x) Y^j(y).
struct CovarianceEstimate {
  int dim = 1;
  int comps = 1;
  double t = 0.0;
  std::size_t ensemble = 0;
  std::string method;  // "mc" | "exact" | "spectral"
  bool horizon_warning = false;
  std::vector<SitePair> pairs;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<Eigen::MatrixXd> stderrs;

  const Eigen::MatrixXd* find(const std::vector<int>& x,
                              const std::vector<int>& y) const;
  /// Q^{ij}(x,y) sub-block; throws when the pair is not in the window.
  Eigen::MatrixXd block_ij(const std::vector<int>& x,
                           const std::vector<int>& y, int i, int j) const;
};

/// Real-space quadratic form over the pair window; every support pair of
/// psi must be present in the estimate.
double quadratic_form(const CovarianceEstimate& q, const TestFunction& psi);

/// Limit covariance  qhat_inf = qhat_inf^+ + qhat_inf^-  assembled from the
/// cluster projections:
///   M0^+ = (q^+ + C q^+ C^*)/2,  M0^- = (C q^- - q^- C^*)/2,
///   qhat_inf^+ = sum_s P_s M0^+ P_s   (blockwise),
///   qhat_inf^- = sum_s i sgn(d omega_s / d theta_d) P_s M0^- P_s,
/// with sgn = 0 on the critical mask.
struct LimitCovariance {
  NodeBlockField total;
  NodeBlockField even;
  NodeBlockField odd;
  LimitCovariance(const TorusGrid& g, int n) : total(g, n), even(g, n), odd(g, n) {}
};

LimitCovariance limit_covariance(const DispersionData& data,
                                 const SpectralDensity& q_plus,
                                 const SpectralDensity& q_minus,
                                 double sgn_tol = 1e-6);

/// n = 1 closed-form route of the limit covariance via the lattice kernels
/// E = F^{-1}(omega^{-2}) and P = -i F^{-1}(sgn(sin theta_d)/omega) and
/// real-space circular convolutions.
struct ScalarLimitBlocks {
  TorusGrid grid;
  Eigen::VectorXd q00, q10, q11;  // q01 = -q10
  explicit ScalarLimitBlocks(const TorusGrid& g)
      : grid(g),
        q00(Eigen::VectorXd::Zero(g.size())),
        q10(Eigen::VectorXd::Zero(g.size())),
        q11(Eigen::VectorXd::Zero(g.size())) {}
};

ScalarLimitBlocks scalar_limit_covariance(double m,
                                          const SpectralDensity& q_plus,
                                          const SpectralDensity& q_minus);

using SampleDraw = std::function<FieldState(std::uint64_t)>;

/// Ensemble-mean covariance at time t on the pair list, jackknife standard
/// errors, deterministic for fixed (seed, M).
CovarianceEstimate mc_covariance(const SampleDraw& draw,
                                 const InteractionMatrix& model, double t,
                                 const std::vector<SitePair>& pairs, int M,
                                 std::uint64_t master_seed, int threads = 0);

/// Initial kernel for the noise-free real-space propagation: one or two
/// translation-invariant kernels with the seam profiles of Eq-style gluing.
struct InitialKernel {
  enum class Profile { All, Minus, Plus };
  struct Term {
    std::vector<Eigen::MatrixXd> kernel;  // real-space q(z) on the torus
    Profile profile = Profile::All;
  };
  std::vector<Term> terms;
  int cutoff_a = 0;

  static InitialKernel translation_invariant(const SpectralDensity& q);
  static InitialKernel two_temperature(const TwoTempSpec& spec);
};

/// Noise-free Q_t(x, y) by double convolution with the windowed real-space
/// Green function (tail below tail_drop of the peak discarded).
CovarianceEstimate exact_covariance_propagation(
    const InitialKernel& q0, const InteractionMatrix& model, double t,
    const std::vector<SitePair>& pairs, const TorusGrid& grid,
    double tail_drop = 1e-8);

struct CltReport {
  double t = 0.0;
  std::size_t ensemble = 0;
  double q_infinity = 0.0;
  MomentStats stats;
  struct EcfRow {
    double lambda;
    double ecf_re, ecf_im;
    double se_re, se_im;
    double target;
  };
  std::vector<EcfRow> ecf;
};

/// Draws M realizations of <Y(t), Psi>, via one exact evolution each, and
/// compares moments and the empirical characteristic function against the
/// Gaussian limit with variance q_infinity. Refuses uncertified Psi.
CltReport clt_diagnostics(const SampleDraw& draw,
                          const InteractionMatrix& model,
                          const TestFunction& psi, double t, int M,
                          std::uint64_t master_seed, double q_infinity,
                          int threads = 0);

/// All (x, y) pairs with x - y ranging over the inf-ball of the given radius
/// around base (useful seam windows for covariance dumps).
std::vector<SitePair> pair_window(const std::vector<int>& base_x, int radius,
                                  int dim);

}  // namespace phononflux

#endif
