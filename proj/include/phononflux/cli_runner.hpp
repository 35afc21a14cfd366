#ifndef PHONONFLUX_CLI_RUNNER_HPP
#define PHONONFLUX_CLI_RUNNER_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "phononflux/covariance_lab.hpp"
#include "phononflux/energy_current.hpp"

namespace phononflux {

struct ConfigError : std::runtime_error {
  std::string pointer;
  ConfigError(const std::string& message, std::string json_pointer)
      : std::runtime_error(message), pointer(std::move(json_pointer)) {}
};

struct ExperimentConfig {
  nlohmann::json raw;
  std::optional<InteractionMatrix> model;
  int grid_n = 64;
  int ensemble_m = 100;
  std::uint64_t master_seed = 1;
  double t_plus = 1.0;
  double t_minus = 1.0;
  int cutoff_a = 0;
  nlohmann::json density_spec;        // single translation-invariant density
  nlohmann::json test_function_spec;  // {"type":"bump"|...}
  std::vector<double> times;
  std::vector<std::string> observables;
  std::string out_dir = "out";
  int precision = 17;
  int threads = 0;
  bool assert_mode = false;
  double clip = 0.0;      // 0 disables the non-Gaussian transform
  int window_radius = 2;  // covariance pair window around the seam
};

/// Validates and normalizes a config; throws ConfigError with the JSON
/// pointer of the offending field.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

SpectralDensity density_from_spec(const nlohmann::json& spec,
                                  const DispersionData& data);

TestFunction test_function_from_spec(const nlohmann::json& spec,
                                     const DispersionData& data);

/// Broadband test function with exact spectral zeros on the critical
/// structures of the elastic lattice (d <= 2); used by the decay probe.
TestFunction default_decay_function(const DispersionData& data,
                                    const InteractionMatrix& model);

/// Builds a TestFunction from an explicit spectrum (inverse transform,
/// entries below support_cut zeroed, certification re-measured).
TestFunction test_function_from_spectrum(const DispersionData& data,
                                         const Eigen::MatrixXcd& spectrum,
                                         double support_cut = 1e-12);

struct DecayReport {
  std::vector<double> times;
  std::vector<double> sup_norms;
  double slope = 0.0;
  double intercept = 0.0;
  double tail_ratio = 0.0;   // beyond 1.5 vbar t at the largest time
  double max_velocity = 0.0;
  bool certified = false;
};

/// Evolves Psi under the conjugate flow, records sup-norms, fits the
/// log-log slope and measures the light-cone tail. Refuses uncertified Psi.
DecayReport decay_probe(const DispersionData& data, const TestFunction& psi,
                        const std::vector<double>& times);

/// Executes the configured observables in dependency order, writing one CSV
/// per observable plus manifest.json. Returns the process exit code
/// (0 ok, 3 numeric failure, 4 acceptance failure in assert mode).
int run_experiment(const ExperimentConfig& config);

}  // namespace phononflux

#endif
