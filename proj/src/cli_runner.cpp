#include "phononflux/cli_runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "phononflux/io.hpp"

namespace phononflux {

namespace {

const std::set<std::string> kKnownObservables = {
    "dispersion", "check",      "evolve", "covariance", "limit-cov",
    "current",    "second-law", "clt",    "decay"};

template <class T>
T fetch(const nlohmann::json& j, const std::string& pointer, T fallback) {
  const nlohmann::json* cur = &j;
  std::istringstream path(pointer);
  std::string key;
  while (std::getline(path, key, '/')) {
    if (key.empty()) continue;
    if (!cur->contains(key)) return fallback;
    cur = &(*cur)[key];
  }
  try {
    return cur->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("invalid type", pointer);
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;

  if (!j.contains("model")) throw ConfigError("missing model spec", "/model");
  try {
    cfg.model = InteractionMatrix::from_json(j["model"].dump());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bad model: ") + e.what(), "/model");
  }

  cfg.grid_n = fetch<int>(j, "/grid/N", 64);
  if (cfg.grid_n < 2 || cfg.grid_n % 2 != 0)
    throw ConfigError("N must be even and >= 2", "/grid/N");

  cfg.ensemble_m = fetch<int>(j, "/ensemble/M", 100);
  if (cfg.ensemble_m < 1) throw ConfigError("M must be >= 1", "/ensemble/M");
  cfg.master_seed = fetch<std::uint64_t>(j, "/ensemble/master_seed", 1);

  cfg.t_plus = fetch<double>(j, "/temperatures/T_plus", 1.0);
  cfg.t_minus = fetch<double>(j, "/temperatures/T_minus", 1.0);
  if (cfg.t_plus < 0.0)
    throw ConfigError("temperature must be >= 0", "/temperatures/T_plus");
  if (cfg.t_minus < 0.0)
    throw ConfigError("temperature must be >= 0", "/temperatures/T_minus");
  cfg.cutoff_a = fetch<int>(j, "/temperatures/cutoff_a", 0);
  if (cfg.cutoff_a < 0)
    throw ConfigError("cutoff_a must be >= 0", "/temperatures/cutoff_a");

  cfg.density_spec = j.contains("density")
                         ? j["density"]
                         : nlohmann::json{{"type", "gibbs"}, {"T", 1.0}};
  cfg.test_function_spec =
      j.contains("test_function") ? j["test_function"] : nlohmann::json();

  cfg.times = fetch<std::vector<double>>(j, "/times", {0.0});
  if (cfg.times.empty()) throw ConfigError("times must be nonempty", "/times");

  cfg.observables = fetch<std::vector<std::string>>(j, "/observables", {});
  for (const auto& obs : cfg.observables)
    if (!kKnownObservables.count(obs))
      throw ConfigError("unknown observable: " + obs, "/observables");

  cfg.out_dir = fetch<std::string>(j, "/output/dir", "out");
  cfg.precision = fetch<int>(j, "/output/precision", 17);
  if (cfg.precision < 1 || cfg.precision > 17)
    throw ConfigError("precision in [1,17]", "/output/precision");
  cfg.threads = fetch<int>(j, "/threads", 0);
  cfg.assert_mode = fetch<bool>(j, "/assert", false);
  cfg.clip = fetch<double>(j, "/clip", 0.0);
  if (cfg.clip < 0.0) throw ConfigError("clip must be >= 0", "/clip");
  cfg.window_radius = fetch<int>(j, "/window_radius", 2);
  return cfg;
}

SpectralDensity density_from_spec(const nlohmann::json& spec,
                                  const DispersionData& data) {
  std::string type = spec.value("type", "gibbs");
  if (type == "gibbs")
    return gibbs_spectral_density(data, spec.value("T", 1.0));
  if (type == "triangular") {
    if (data.components() != 1)
      throw ConfigError("triangular density requires n = 1", "/density/type");
    return triangular_density(data.grid(), spec.value("N0", 1),
                              spec.value("scale", 1.0));
  }
  throw ConfigError("unknown density type: " + type, "/density/type");
}

TestFunction test_function_from_spectrum(const DispersionData& data,
                                         const Eigen::MatrixXcd& spectrum,
                                         double support_cut) {
  const TorusGrid& grid = data.grid();
  const int bs = static_cast<int>(spectrum.cols());
  std::vector<std::pair<std::vector<int>, Eigen::VectorXd>> sites;
  Eigen::MatrixXd values(grid.size(), bs);
  for (int c = 0; c < bs; ++c) {
    double resid = 0.0;
    values.col(c) = fourier_inverse_real(grid, spectrum.col(c), &resid);
    if (resid > 1e-9)
      throw std::invalid_argument(
          "test_function_from_spectrum: spectrum not conjugate-symmetric");
  }
  double peak = values.cwiseAbs().maxCoeff();
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::VectorXd row = values.row(node).transpose();
    if (row.cwiseAbs().maxCoeff() > support_cut * peak)
      sites.push_back({grid.coords(node), row});
  }
  return test_function_from_values(grid, bs / 2, sites,
                                   data.near_critical());
}

TestFunction test_function_from_spec(const nlohmann::json& spec,
                                     const DispersionData& data) {
  std::string type = spec.value("type", "bump");
  if (type == "bump") {
    std::vector<double> theta0 =
        spec.value("theta0", std::vector<double>(data.grid().dim(),
                                                 kTwoPi / 4.0));
    if (static_cast<int>(theta0.size()) != data.grid().dim())
      throw ConfigError("theta0 dimension mismatch", "/test_function/theta0");
    Eigen::VectorXd th(theta0.size());
    for (std::size_t i = 0; i < theta0.size(); ++i) th[i] = theta0[i];
    return make_test_function(data, th, spec.value("width", kTwoPi / 16.0),
                              spec.value("support_radius", -1),
                              spec.value("component", 0));
  }
  if (type == "sites") {
    std::vector<std::pair<std::vector<int>, Eigen::VectorXd>> sites;
    for (const auto& s : spec.at("sites")) {
      auto x = s.at("x").get<std::vector<int>>();
      auto v = s.at("value").get<std::vector<double>>();
      Eigen::VectorXd val(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) val[i] = v[i];
      sites.push_back({x, val});
    }
    return test_function_from_values(data.grid(), data.components(), sites,
                                     data.near_critical());
  }
  throw ConfigError("unknown test_function type: " + type,
                    "/test_function/type");
}

TestFunction default_decay_function(const DispersionData& data,
                                    const InteractionMatrix& model) {
  const TorusGrid& grid = data.grid();
  const int d = grid.dim();
  if (model.components() != 1)
    throw std::invalid_argument("default_decay_function: n = 1 only");
  // Mass read off the elastic symbol at theta = 0.
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
  double m2 = model.symbol(zero)(0, 0).real();

  Eigen::MatrixXcd spectrum =
      Eigen::MatrixXcd::Zero(grid.size(), 2 * model.components());
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::VectorXd th = grid.theta(node);
    double sd = std::sin(th[d - 1]);
    double factor;
    if (d == 1) {
      // cos theta* of the inflection of omega: c^2 - (m^2+2) c + 1 = 0.
      double b = m2 + 2.0;
      double cstar = 0.5 * (b - std::sqrt(b * b - 4.0));
      factor = std::cos(th[0]) - cstar;
    } else if (d == 2) {
      double c1 = std::cos(th[0]), c2 = std::cos(th[1]);
      double s1 = std::sin(th[0]), s2 = std::sin(th[1]);
      double lam = m2 + 4.0 - 2.0 * c1 - 2.0 * c2;
      // lam^2 det Hess(omega) for the elastic symbol; exact zeros on the
      // degenerate curves keep the probe off the caustics.
      factor = c1 * c2 * lam - s1 * s1 * c2 - s2 * s2 * c1;
    } else {
      factor = 1.0;
    }
    spectrum(node, 0) = Complex(0.0, sd * factor);
  }
  return test_function_from_spectrum(data, spectrum);
}

DecayReport decay_probe(const DispersionData& data, const TestFunction& psi,
                        const std::vector<double>& times) {
  if (!psi.d0_certified)
    throw std::invalid_argument("decay_probe: test function not certified");
  if (times.size() < 2)
    throw std::invalid_argument("decay_probe: need at least two times");
  const TorusGrid& grid = data.grid();
  const int n = data.components();

  DecayReport rep;
  rep.certified = true;
  rep.max_velocity = data.max_group_velocity();

  FieldState phi0(grid, n);
  for (std::size_t node : psi.support) {
    for (int c = 0; c < n; ++c) {
      phi0.u(node, c) = psi.values(node, c);
      phi0.v(node, c) = psi.values(node, n + c);
    }
  }

  double horizon = no_wraparound_horizon(data);
  std::vector<int> coords(grid.dim());
  double last_t = 0.0;
  FieldState last = phi0;
  for (double t : times) {
    if (t > horizon)
      std::cerr << "decay_probe: warning, t = " << t
                << " exceeds the no-wraparound horizon " << horizon << "\n";
    PropagatorSymbol symbol(data, t);
    FieldState phi = conjugate_evolve(phi0, symbol);
    double sup = 0.0;
    for (std::size_t node = 0; node < grid.size(); ++node) {
      double a2 =
          phi.u.row(node).squaredNorm() + phi.v.row(node).squaredNorm();
      sup = std::max(sup, a2);
    }
    sup = std::sqrt(sup);
    rep.times.push_back(t);
    rep.sup_norms.push_back(sup);
    if (t >= last_t) {
      last_t = t;
      last = phi;
    }
  }

  // Least-squares slope of log sup vs log t.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::size_t m = rep.times.size();
  for (std::size_t i = 0; i < m; ++i) {
    double x = std::log(rep.times[i]);
    double y = std::log(rep.sup_norms[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  rep.intercept = (sy - rep.slope * sx) / m;

  // Light-cone tail at the largest probe time.
  double radius = 1.5 * rep.max_velocity * last_t;
  double peak = 0.0, tail = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    grid.coords(node, coords.data());
    double r2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      double s = grid.signed_coordinate(coords[a]);
      r2 += s * s;
    }
    double amp = std::sqrt(last.u.row(node).squaredNorm() +
                           last.v.row(node).squaredNorm());
    peak = std::max(peak, amp);
    if (r2 > radius * radius) tail = std::max(tail, amp);
  }
  rep.tail_ratio = peak > 0 ? tail / peak : 0.0;
  return rep;
}

namespace {

struct TaskContext {
  const ExperimentConfig& cfg;
  const InteractionMatrix& model;
  DispersionData data;
  std::vector<std::string> outputs;
  std::filesystem::path dir;

  TaskContext(const ExperimentConfig& c)
      : cfg(c),
        model(*c.model),
        data(model, TorusGrid(c.model->dim(), c.grid_n)),
        dir(c.out_dir) {}

  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (dir / name).string();
  }
};

void run_dispersion(TaskContext& ctx) {
  const TorusGrid& grid = ctx.data.grid();
  std::vector<std::string> header;
  for (int a = 0; a < grid.dim(); ++a)
    header.push_back("theta_" + std::to_string(a + 1));
  header.push_back("branch");
  header.push_back("omega");
  for (int a = 0; a < grid.dim(); ++a)
    header.push_back("vel_" + std::to_string(a + 1));
  header.push_back("critical");
  CsvWriter csv(ctx.path("dispersion.csv"), header, ctx.cfg.precision);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::VectorXd th = grid.theta(node);
    for (int k = 0; k < ctx.data.components(); ++k) {
      for (int a = 0; a < grid.dim(); ++a) csv.field(th[a]);
      csv.field(k + 1);
      csv.field(ctx.data.omega(node, k));
      for (int a = 0; a < grid.dim(); ++a)
        csv.field(ctx.data.velocity(node, k, a));
      csv.field(ctx.data.is_near_critical(node) ? 1 : 0);
      csv.end_row();
    }
  }
}

void run_check(TaskContext& ctx) {
  ConditionReport rep = check_conditions(ctx.model, ctx.data);
  CsvWriter csv(ctx.path("conditions.csv"),
                {"condition", "status", "value", "witness"},
                ctx.cfg.precision);
  auto row = [&](const std::string& name, const ConditionCheck& c) {
    csv.field(name).field(to_string(c.status)).field(c.value).field(c.witness);
    csv.end_row();
  };
  row("E1", rep.e1);
  row("E2", rep.e2);
  row("E3", rep.e3);
  row("E4", rep.e4);
  row("E5", rep.e5);
  row("E6", rep.e6);
  csv.field("critical_fraction").field("info").field(rep.critical_fraction);
  csv.field("fraction of masked nodes");
  csv.end_row();
}

SampleDraw make_draw(const ExperimentConfig& cfg, const TaskContext& ctx,
                     bool two_temperature) {
  if (two_temperature) {
    TwoTempSpec spec{gibbs_spectral_density(ctx.data, cfg.t_minus),
                     gibbs_spectral_density(ctx.data, cfg.t_plus),
                     cfg.cutoff_a};
    auto sampler = std::make_shared<TwoTemperatureSampler>(spec);
    return [sampler](std::uint64_t seed) { return sampler->sample(seed); };
  }
  SpectralDensity q = density_from_spec(cfg.density_spec, ctx.data);
  auto sampler = std::make_shared<GaussianSampler>(q);
  double clip = cfg.clip;
  return [sampler, clip](std::uint64_t seed) {
    FieldState y = sampler->sample(seed);
    return clip > 0.0 ? nongaussian_transform(y, clip) : y;
  };
}

void run_evolve(TaskContext& ctx) {
  SampleDraw draw = make_draw(ctx.cfg, ctx, false);
  FieldState y0 = draw(sample_seed(ctx.cfg.master_seed, 0));
  double horizon = no_wraparound_horizon(ctx.data);
  CsvWriter summary(ctx.path("evolve_summary.csv"),
                    {"t", "hamiltonian", "norm_alpha", "flag"},
                    ctx.cfg.precision);
  double alpha = -ctx.data.grid().dim();
  for (double t : ctx.cfg.times) {
    PropagatorSymbol symbol(ctx.data, t);
    FieldState y = evolve(y0, symbol);
    std::ostringstream name;
    name << "field_t" << t << ".csv";
    write_field_csv((ctx.dir / name.str()).string(), y, ctx.cfg.precision);
    ctx.outputs.push_back(name.str());
    summary.field(t)
        .field(hamiltonian(y, ctx.model))
        .field(phase_space_norm(y, alpha))
        .field(t > horizon ? 1 : 0);
    summary.end_row();
  }
}

void write_covariance_rows(CsvWriter& csv, const CovarianceEstimate& est,
                           int dim, int comps) {
  for (std::size_t p = 0; p < est.pairs.size(); ++p) {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        for (int r = 0; r < comps; ++r) {
          for (int c = 0; c < comps; ++c) {
            csv.field(est.t).field(i).field(j);
            for (int a = 0; a < dim; ++a) csv.field(est.pairs[p].x[a]);
            for (int a = 0; a < dim; ++a) csv.field(est.pairs[p].y[a]);
            csv.field(r + 1).field(c + 1);
            csv.field(est.blocks[p](i * comps + r, j * comps + c));
            csv.field(est.stderrs[p](i * comps + r, j * comps + c));
            csv.field(est.method);
            csv.field(est.horizon_warning ? 1 : 0);
            csv.end_row();
          }
        }
      }
    }
  }
}

void run_covariance(TaskContext& ctx) {
  const int dim = ctx.data.grid().dim();
  SampleDraw draw = make_draw(ctx.cfg, ctx, true);
  std::vector<SitePair> pairs =
      pair_window(std::vector<int>(dim, 0), ctx.cfg.window_radius, dim);
  std::vector<std::string> header = {"t", "i", "j"};
  for (int a = 0; a < dim; ++a) header.push_back("x_" + std::to_string(a + 1));
  for (int a = 0; a < dim; ++a) header.push_back("y_" + std::to_string(a + 1));
  for (const char* s : {"row", "col", "value", "stderr", "method", "flag"})
    header.push_back(s);
  CsvWriter csv(ctx.path("covariance.csv"), header, ctx.cfg.precision);
  for (double t : ctx.cfg.times) {
    CovarianceEstimate est =
        mc_covariance(draw, ctx.model, t, pairs, ctx.cfg.ensemble_m,
                      ctx.cfg.master_seed, ctx.cfg.threads);
    write_covariance_rows(csv, est, dim, ctx.data.components());
  }
}

LimitCovariance gibbs_limit(TaskContext& ctx) {
  SpectralDensity qm = gibbs_spectral_density(ctx.data, ctx.cfg.t_minus);
  SpectralDensity qp = gibbs_spectral_density(ctx.data, ctx.cfg.t_plus);
  return limit_covariance(ctx.data, qp, qm);
}

void run_limit_cov(TaskContext& ctx) {
  LimitCovariance lim = gibbs_limit(ctx);
  const TorusGrid& grid = ctx.data.grid();
  const int n = ctx.data.components();
  std::vector<std::string> header;
  for (int a = 0; a < grid.dim(); ++a)
    header.push_back("theta_" + std::to_string(a + 1));
  for (const char* s : {"i", "j", "row", "col", "re", "im"})
    header.push_back(s);
  CsvWriter csv(ctx.path("limit_covariance.csv"), header, ctx.cfg.precision);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::VectorXd th = grid.theta(node);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        Eigen::MatrixXcd b = lim.total.block(node, i, j);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < n; ++c) {
            for (int a = 0; a < grid.dim(); ++a) csv.field(th[a]);
            csv.field(i).field(j).field(r + 1).field(c + 1);
            csv.field(b(r, c).real()).field(b(r, c).imag());
            csv.end_row();
          }
        }
      }
    }
  }
}

int run_currents(TaskContext& ctx, bool second_law) {
  const int dim = ctx.data.grid().dim();
  const int dax = dim - 1;
  std::vector<std::string> header = {"method", "k",      "t",      "x_offset",
                                     "value",  "stderr", "verdict", "flag"};
  CsvWriter csv(ctx.path(second_law ? "second_law.csv" : "current.csv"),
                header, ctx.cfg.precision);

  Eigen::VectorXd j_inf =
      gibbs_limit_current(ctx.data, ctx.cfg.t_plus, ctx.cfg.t_minus);
  Eigen::VectorXd j_inf_generic = limit_current(gibbs_limit(ctx), ctx.model);
  SecondLawVerdict verdict =
      second_law_check(ctx.cfg.t_plus, ctx.cfg.t_minus, j_inf);

  for (int k = 0; k < dim; ++k) {
    csv.field("limit").field(k + 1).field("inf").field(0);
    csv.field(j_inf[k]).field(0.0);
    csv.field(k == dax ? (verdict.pass ? "PASS" : "FAIL") : "");
    csv.field(0);
    csv.end_row();
    csv.field("limit-generic").field(k + 1).field("inf").field(0);
    csv.field(j_inf_generic[k]).field(0.0).field("").field(0);
    csv.end_row();
  }

  SampleDraw draw = make_draw(ctx.cfg, ctx, true);
  double t = ctx.cfg.times.back();
  int l8 = ctx.data.grid().extent() / 8;
  for (int offset : {0, -l8, l8}) {
    std::vector<int> site(dim, 0);
    site[dax] = offset;
    CurrentEstimate mc =
        mc_mean_current(draw, ctx.model, t, site, dax, ctx.cfg.ensemble_m,
                        ctx.cfg.master_seed, ctx.cfg.threads);
    csv.field("mc").field(dax + 1).field(t).field(offset);
    csv.field(mc.value).field(mc.stderr_value).field("");
    csv.field(mc.horizon_warning ? 1 : 0);
    csv.end_row();
  }

  std::cout << (second_law ? "second-law" : "current") << ": j_inf_d = "
            << j_inf[dax] << ", verdict "
            << (verdict.pass ? "PASS" : "FAIL") << " (" << verdict.detail
            << ")\n";
  if (second_law && ctx.cfg.assert_mode && !verdict.pass) return 4;
  return 0;
}

void run_clt(TaskContext& ctx) {
  TestFunction psi =
      ctx.cfg.test_function_spec.is_null()
          ? default_decay_function(ctx.data, ctx.model)
          : test_function_from_spec(ctx.cfg.test_function_spec, ctx.data);

  // Effective initial covariance of the (possibly clipped) field.
  SpectralDensity q0 = density_from_spec(ctx.cfg.density_spec, ctx.data);
  SpectralDensity q_eff = q0;
  if (ctx.cfg.clip > 0.0) {
    std::string type = ctx.cfg.density_spec.value("type", "gibbs");
    int n0 = ctx.cfg.density_spec.value("N0", 1);
    if (type != "triangular" || n0 != 1)
      throw ConfigError(
          "clip > 0 requires the white density (triangular N0 = 1) so the "
          "transformed covariance stays white",
          "/clip");
    double scale = ctx.cfg.density_spec.value("scale", 1.0);
    double eff = clipped_gaussian_variance(scale, ctx.cfg.clip);
    q_eff = triangular_density(ctx.data.grid(), 1, eff);
  }
  LimitCovariance lim = limit_covariance(ctx.data, q_eff, q_eff);
  double q_inf = quadratic_form(lim.total, psi);

  SampleDraw draw = make_draw(ctx.cfg, ctx, false);
  double t = ctx.cfg.times.back();
  CltReport rep =
      clt_diagnostics(draw, ctx.model, psi, t, ctx.cfg.ensemble_m,
                      ctx.cfg.master_seed, q_inf, ctx.cfg.threads);

  CsvWriter csv(ctx.path("clt.csv"),
                {"row_type", "lambda", "value_re", "value_im", "target",
                 "se_re", "se_im"},
                ctx.cfg.precision);
  for (const auto& row : rep.ecf) {
    csv.field("ecf").field(row.lambda).field(row.ecf_re).field(row.ecf_im);
    csv.field(row.target).field(row.se_re).field(row.se_im);
    csv.end_row();
  }
  auto moment = [&](const std::string& name, double v, double se,
                    double target) {
    csv.field(name).field(0.0).field(v).field(0.0).field(target).field(se);
    csv.field(0.0);
    csv.end_row();
  };
  moment("variance", rep.stats.variance, rep.stats.variance_se, q_inf);
  moment("skewness", rep.stats.skewness, rep.stats.skewness_se, 0.0);
  moment("kurtosis_excess", rep.stats.kurtosis_excess, rep.stats.kurtosis_se,
         0.0);
}

void run_decay(TaskContext& ctx) {
  TestFunction psi =
      ctx.cfg.test_function_spec.is_null()
          ? default_decay_function(ctx.data, ctx.model)
          : test_function_from_spec(ctx.cfg.test_function_spec, ctx.data);
  DecayReport rep = decay_probe(ctx.data, psi, ctx.cfg.times);
  CsvWriter csv(ctx.path("decay.csv"),
                {"row_type", "t", "sup_norm", "slope", "tail_ratio", "vbar"},
                ctx.cfg.precision);
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    csv.field("sample").field(rep.times[i]).field(rep.sup_norms[i]);
    csv.field(0.0).field(0.0).field(0.0);
    csv.end_row();
  }
  csv.field("fit").field(0.0).field(0.0).field(rep.slope);
  csv.field(rep.tail_ratio).field(rep.max_velocity);
  csv.end_row();
  std::cout << "decay: slope = " << rep.slope
            << ", tail ratio = " << rep.tail_ratio << "\n";
}

}  // namespace

int run_experiment(const ExperimentConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  TaskContext ctx(config);
  int exit_code = 0;
  nlohmann::json errors = nlohmann::json::array();

  // Dependency order: dispersion/check first, then densities and evolution,
  // then covariance and current/CLT diagnostics.
  std::vector<std::string> order = {"dispersion", "check",      "evolve",
                                    "covariance", "limit-cov",  "current",
                                    "second-law", "clt",        "decay"};
  for (const std::string& task : order) {
    if (std::find(config.observables.begin(), config.observables.end(),
                  task) == config.observables.end())
      continue;
    try {
      if (task == "dispersion") run_dispersion(ctx);
      else if (task == "check") run_check(ctx);
      else if (task == "evolve") run_evolve(ctx);
      else if (task == "covariance") run_covariance(ctx);
      else if (task == "limit-cov") run_limit_cov(ctx);
      else if (task == "current") exit_code = std::max(exit_code, run_currents(ctx, false));
      else if (task == "second-law") exit_code = std::max(exit_code, run_currents(ctx, true));
      else if (task == "clt") run_clt(ctx);
      else if (task == "decay") run_decay(ctx);
    } catch (const std::exception& e) {
      std::cerr << "task " << task << " failed: " << e.what() << "\n";
      errors.push_back({{"task", task}, {"error", e.what()}});
      exit_code = std::max(exit_code, 3);
    }
  }

  nlohmann::json manifest;
  manifest["config"] = config.raw;
  manifest["config_hash"] = fnv1a_hash(config.raw.dump());
  manifest["master_seed"] = config.master_seed;
  manifest["version"] = "phononflux 1.0.0";
  manifest["outputs"] = ctx.outputs;
  manifest["errors"] = errors;
  manifest["timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  std::ofstream mout(std::filesystem::path(config.out_dir) / "manifest.json");
  mout << manifest.dump(2) << "\n";
  return exit_code;
}

}  // namespace phononflux
