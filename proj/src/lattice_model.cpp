#include "phononflux/lattice_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace phononflux {

InteractionMatrix::InteractionMatrix(int dim, int components,
                                     std::vector<InteractionEntry> entries)
    : dim_(dim), comps_(components) {
  if (dim < 1) throw std::invalid_argument("InteractionMatrix: dim >= 1");
  if (components < 1)
    throw std::invalid_argument("InteractionMatrix: components >= 1");
  std::map<std::vector<int>, Eigen::MatrixXd> merged;
  for (auto& e : entries) {
    if (static_cast<int>(e.z.size()) != dim_)
      throw std::invalid_argument("InteractionMatrix: entry dim mismatch");
    if (e.V.rows() != comps_ || e.V.cols() != comps_)
      throw std::invalid_argument("InteractionMatrix: entry block size");
    auto [it, fresh] = merged.emplace(e.z, e.V);
    if (!fresh) it->second += e.V;
  }
  support_radius_ = 0;
  entries_.reserve(merged.size());
  for (auto& [z, V] : merged) {
    if (V.cwiseAbs().maxCoeff() == 0.0) continue;
    int r = 0;
    for (int c : z) r = std::max(r, std::abs(c));
    support_radius_ = std::max(support_radius_, r);
    lookup_[z] = entries_.size();
    entries_.push_back({z, V});
  }
}

InteractionMatrix InteractionMatrix::elastic(int dim, double m) {
  std::vector<InteractionEntry> entries;
  Eigen::MatrixXd diag(1, 1), off(1, 1);
  diag(0, 0) = 2.0 * dim + m * m;
  off(0, 0) = -1.0;
  entries.push_back({std::vector<int>(dim, 0), diag});
  for (int a = 0; a < dim; ++a) {
    std::vector<int> z(dim, 0);
    z[a] = 1;
    entries.push_back({z, off});
    z[a] = -1;
    entries.push_back({z, off});
  }
  return InteractionMatrix(dim, 1, std::move(entries));
}

double InteractionMatrix::symmetry_defect() const {
  double worst = 0.0;
  for (const auto& e : entries_) {
    std::vector<int> mz(dim_);
    for (int a = 0; a < dim_; ++a) mz[a] = -e.z[a];
    Eigen::MatrixXd other = at(mz);
    worst = std::max(worst, (other - e.V.transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

void InteractionMatrix::require_symmetric(double tol) const {
  double defect = symmetry_defect();
  if (defect > tol) {
    std::ostringstream os;
    os << "interaction matrix violates V(-z) = V(z)^T, defect " << defect;
    throw std::invalid_argument(os.str());
  }
}

Eigen::MatrixXd InteractionMatrix::at(const std::vector<int>& z) const {
  auto it = lookup_.find(z);
  if (it == lookup_.end()) return Eigen::MatrixXd::Zero(comps_, comps_);
  return entries_[it->second].V;
}

Eigen::MatrixXcd InteractionMatrix::symbol(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(comps_, comps_);
  for (const auto& e : entries_) {
    double phase = 0.0;
    for (int a = 0; a < dim_; ++a) phase += e.z[a] * theta[a];
    s += Complex(std::cos(phase), std::sin(phase)) * e.V;
  }
  return s;
}

Eigen::MatrixXcd InteractionMatrix::symbol_derivative(
    const Eigen::VectorXd& theta, int axis) const {
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(comps_, comps_);
  for (const auto& e : entries_) {
    double phase = 0.0;
    for (int a = 0; a < dim_; ++a) phase += e.z[a] * theta[a];
    s += Complex(0.0, e.z[axis]) * Complex(std::cos(phase), std::sin(phase)) *
         e.V;
  }
  return s;
}

InteractionMatrix InteractionMatrix::scaled(double factor) const {
  std::vector<InteractionEntry> entries = entries_;
  for (auto& e : entries) e.V *= factor;
  return InteractionMatrix(dim_, comps_, std::move(entries));
}

std::string InteractionMatrix::to_json() const {
  nlohmann::json j;
  j["d"] = dim_;
  j["n"] = comps_;
  auto& arr = j["entries"] = nlohmann::json::array();
  for (const auto& e : entries_) {
    nlohmann::json row;
    row["z"] = e.z;
    std::vector<std::vector<double>> V(comps_, std::vector<double>(comps_));
    for (int r = 0; r < comps_; ++r)
      for (int c = 0; c < comps_; ++c) V[r][c] = e.V(r, c);
    row["V"] = V;
    arr.push_back(row);
  }
  return j.dump();
}

InteractionMatrix InteractionMatrix::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (j.contains("type")) {
    std::string type = j.at("type").get<std::string>();
    if (type != "elastic")
      throw std::invalid_argument("unknown model type: " + type);
    InteractionMatrix model =
        elastic(j.at("d").get<int>(), j.at("m").get<double>());
    if (j.contains("stiffness"))
      model = model.scaled(j.at("stiffness").get<double>());
    return model;
  }
  int d = j.at("d").get<int>();
  int n = j.at("n").get<int>();
  std::vector<InteractionEntry> entries;
  for (const auto& row : j.at("entries")) {
    InteractionEntry e;
    e.z = row.at("z").get<std::vector<int>>();
    auto V = row.at("V").get<std::vector<std::vector<double>>>();
    e.V.resize(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) e.V(r, c) = V.at(r).at(c);
    entries.push_back(std::move(e));
  }
  return InteractionMatrix(d, n, std::move(entries));
}

// ---------------------------------------------------------------------------

DispersionData::DispersionData(const InteractionMatrix& model,
                               const TorusGrid& grid,
                               const DispersionOptions& opt)
    : grid_(grid), comps_(model.components()), opt_(opt) {
  if (model.dim() != grid.dim())
    throw std::invalid_argument("dispersion: model/grid dimension mismatch");
  model.require_symmetric();

  const std::size_t nodes = grid_.size();
  const int n = comps_;
  const int d = grid_.dim();
  omega_.resize(nodes * n);
  velocity_.assign(nodes * n * d, 0.0);
  singular_.assign(nodes * n, 0);
  clusters_.resize(nodes);

  // Pass 1: eigenvalues, to fix the scale entering the cluster tolerance.
  std::vector<Eigen::VectorXd> eigs(nodes);
  std::vector<Eigen::MatrixXcd> vecs;
  if (n > 1) vecs.resize(nodes);
  min_eigenvalue_ = std::numeric_limits<double>::infinity();
  double max_lambda = 0.0;
  for (std::size_t node = 0; node < nodes; ++node) {
    Eigen::VectorXd th = grid_.theta(node);
    Eigen::MatrixXcd sym = model.symbol(th);
    if (n == 1) {
      eigs[node] = Eigen::VectorXd::Constant(1, sym(0, 0).real());
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
      eigs[node] = es.eigenvalues();
      vecs[node] = es.eigenvectors();
    }
    min_eigenvalue_ = std::min(min_eigenvalue_, eigs[node].minCoeff());
    max_lambda = std::max(max_lambda, eigs[node].maxCoeff());
  }
  double scale = 1.0 + max_lambda;
  if (min_eigenvalue_ < -opt_.psd_tol * scale) {
    std::ostringstream os;
    os << "condition E3 fails: Vhat has eigenvalue " << min_eigenvalue_;
    throw std::domain_error(os.str());
  }
  max_omega_ = std::sqrt(std::max(max_lambda, 0.0));
  const double cluster_tol = opt_.cluster_tol_rel * std::max(max_omega_, 1.0);

  // Pass 2: branch frequencies, clusters, projections, velocities.
  max_velocity_ = 0.0;
  for (std::size_t node = 0; node < nodes; ++node) {
    Eigen::VectorXd th = grid_.theta(node);
    std::vector<Eigen::MatrixXcd> dsym(d);
    for (int a = 0; a < d; ++a) dsym[a] = model.symbol_derivative(th, a);

    auto& nodeClusters = clusters_[node];
    for (int k = 0; k < n; ++k)
      omega_[node * n + k] = std::sqrt(std::max(eigs[node][k], 0.0));

    int k = 0;
    while (k < n) {
      int j = k + 1;
      while (j < n &&
             omega_[node * n + j] - omega_[node * n + j - 1] <= cluster_tol)
        ++j;
      BranchCluster c;
      c.rank = j - k;
      double acc = 0.0;
      for (int b = k; b < j; ++b) acc += omega_[node * n + b];
      c.omega = acc / c.rank;
      if (n == 1) {
        c.projection = Eigen::MatrixXcd::Identity(1, 1);
      } else {
        c.projection = Eigen::MatrixXcd::Zero(n, n);
        for (int b = k; b < j; ++b)
          c.projection += vecs[node].col(b) * vecs[node].col(b).adjoint();
      }
      c.singular = c.omega < opt_.omega_floor;
      c.velocity = Eigen::VectorXd::Zero(d);
      if (!c.singular) {
        for (int a = 0; a < d; ++a) {
          // Hellmann-Feynman: d omega = tr(P dVhat P) / (2 omega rank)
          double tr = (c.projection * dsym[a]).trace().real();
          c.velocity[a] = tr / (2.0 * c.omega * c.rank);
        }
        max_velocity_ = std::max(max_velocity_, c.velocity.norm());
      }
      for (int b = k; b < j; ++b) {
        for (int a = 0; a < d; ++a)
          velocity_[(node * n + b) * d + a] = c.velocity[a];
        singular_[node * n + b] = c.singular ? 1 : 0;
      }
      nodeClusters.push_back(std::move(c));
      k = j;
    }
  }

  mask_ = critical_set(*this, 1e-6);
}

double DispersionData::hessian_determinant(std::size_t node,
                                           int branch) const {
  const int d = grid_.dim();
  const double h = kTwoPi / grid_.extent();
  auto w = [&](int da, int a, int db, int b) {
    std::size_t m = grid_.shift(node, a, da);
    if (db != 0) m = grid_.shift(m, b, db);
    return omega_[m * comps_ + branch];
  };
  Eigen::MatrixXd H(d, d);
  double w0 = omega_[node * comps_ + branch];
  for (int a = 0; a < d; ++a) {
    H(a, a) = (w(1, a, 0, 0) - 2.0 * w0 + w(-1, a, 0, 0)) / (h * h);
    for (int b = a + 1; b < d; ++b) {
      double cross = (w(1, a, 1, b) - w(1, a, -1, b) - w(-1, a, 1, b) +
                      w(-1, a, -1, b)) /
                     (4.0 * h * h);
      H(a, b) = cross;
      H(b, a) = cross;
    }
  }
  return H.determinant();
}

int DispersionData::velocity_sign(const BranchCluster& c, int axis,
                                  double tol) {
  if (c.singular) return 0;
  double v = c.velocity[axis];
  if (std::abs(v) < tol) return 0;
  return v > 0 ? 1 : -1;
}

std::vector<std::uint8_t> critical_set(const DispersionData& data,
                                       double tol) {
  const TorusGrid& grid = data.grid();
  const int n = data.components();
  const int d = grid.dim();
  const double cluster_tol =
      data.options().cluster_tol_rel * std::max(data.max_omega(), 1.0);
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (std::size_t node = 0; node < grid.size(); ++node) {
    bool hit = false;
    for (int k = 0; k < n && !hit; ++k) {
      if (data.omega(node, k) < tol) hit = true;
      else if (std::abs(data.velocity(node, k, d - 1)) < tol) hit = true;
      else if (std::abs(data.hessian_determinant(node, k)) < tol) hit = true;
    }
    if (!hit && n > 1) {
      // Crossing proxy: distinct clusters approaching within 10x cluster_tol.
      const auto& cl = data.clusters(node);
      for (std::size_t c = 0; c + 1 < cl.size(); ++c)
        if (cl[c + 1].omega - cl[c].omega < 10.0 * cluster_tol) hit = true;
    }
    mask[node] = hit ? 1 : 0;
  }
  return mask;
}

bool ConditionReport::all_pass() const {
  for (const ConditionCheck* c : {&e1, &e2, &e3, &e4, &e5, &e6})
    if (c->status == ConditionStatus::Fail) return false;
  return true;
}

std::string to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::Pass: return "pass";
    case ConditionStatus::Fail: return "fail";
    default: return "not-applicable";
  }
}

namespace {

// Grid average of ||Vhat^{-1}|| (spectral norm) excluding singular nodes.
struct InverseNormAverage {
  double average = 0.0;
  double excluded_fraction = 0.0;
};

InverseNormAverage inverse_norm_average(const InteractionMatrix& model,
                                        const TorusGrid& grid,
                                        double singular_tol) {
  InverseNormAverage r;
  std::size_t excluded = 0;
  double acc = 0.0;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    Eigen::MatrixXcd sym = model.symbol(grid.theta(node));
    double lam_min;
    if (model.components() == 1) {
      lam_min = sym(0, 0).real();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
      lam_min = es.eigenvalues().minCoeff();
    }
    if (lam_min < singular_tol) {
      ++excluded;
      continue;
    }
    acc += 1.0 / lam_min;  // ||Vhat^{-1}|| = 1/lambda_min for PSD Vhat
  }
  std::size_t used = grid.size() - excluded;
  r.average = used > 0 ? acc / used : 0.0;
  r.excluded_fraction = static_cast<double>(excluded) / grid.size();
  return r;
}

}  // namespace

ConditionReport check_conditions(const InteractionMatrix& model,
                                 const DispersionData& data,
                                 const ConditionTolerances& tol) {
  ConditionReport rep;
  const TorusGrid& grid = data.grid();
  const int n = data.components();

  // E1: finite support, by construction of InteractionMatrix.
  rep.e1.status = ConditionStatus::Pass;
  rep.e1.value = model.support_radius();
  rep.e1.witness = "support radius";

  double defect = model.symmetry_defect();
  rep.e2.status = defect <= tol.symmetry_tol ? ConditionStatus::Pass
                                             : ConditionStatus::Fail;
  rep.e2.value = defect;
  rep.e2.witness = "max |V(-z) - V(z)^T|";

  double lam_min = data.min_symbol_eigenvalue();
  rep.e3.status = lam_min >= -tol.psd_tol * (1.0 + data.max_omega())
                      ? ConditionStatus::Pass
                      : ConditionStatus::Fail;
  rep.e3.value = lam_min;
  rep.e3.witness = "min eigenvalue of Vhat over grid";

  // E4: Hessian determinant identically zero is flagged when |D_k| < tol on
  // at least the configured fraction of nodes for some branch.
  double worst_zero_fraction = 0.0;
  for (int k = 0; k < n; ++k) {
    std::size_t zero = 0;
    for (std::size_t node = 0; node < grid.size(); ++node)
      if (std::abs(data.hessian_determinant(node, k)) < tol.hessian_tol)
        ++zero;
    worst_zero_fraction =
        std::max(worst_zero_fraction,
                 static_cast<double>(zero) / static_cast<double>(grid.size()));
  }
  rep.e4.status = worst_zero_fraction >= tol.hessian_fail_fraction
                      ? ConditionStatus::Fail
                      : ConditionStatus::Pass;
  rep.e4.value = worst_zero_fraction;
  rep.e4.witness = "max fraction of nodes with |D_k| < tol";

  // E5: omega_k +- omega_l constant across the grid with nonzero constant.
  if (n == 1) {
    rep.e5.status = ConditionStatus::NotApplicable;
    rep.e5.witness = "single branch";
  } else {
    rep.e5.status = ConditionStatus::Pass;
    rep.e5.value = 0.0;
    for (int k = 0; k < n; ++k) {
      for (int l = k + 1; l < n; ++l) {
        for (int sign = 0; sign < 2; ++sign) {
          double lo = std::numeric_limits<double>::infinity();
          double hi = -lo;
          for (std::size_t node = 0; node < grid.size(); ++node) {
            double v = sign == 0 ? data.omega(node, k) - data.omega(node, l)
                                 : data.omega(node, k) + data.omega(node, l);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
          }
          if (hi - lo < tol.e5_range_tol &&
              std::abs(0.5 * (hi + lo)) > tol.e5_const_tol) {
            rep.e5.status = ConditionStatus::Fail;
            rep.e5.value = 0.5 * (hi + lo);
            std::ostringstream os;
            os << "omega_" << k + 1 << (sign == 0 ? " - " : " + ") << "omega_"
               << l + 1 << " constant";
            rep.e5.witness = os.str();
          }
        }
      }
    }
    if (rep.e5.status == ConditionStatus::Pass)
      rep.e5.witness = "no constant branch sum/difference";
  }

  // E6: grid average of ||Vhat^{-1}||; divergence probed at doubled N.
  auto coarse = inverse_norm_average(model, grid, tol.singular_tol);
  rep.e6.value = coarse.average;
  if (coarse.excluded_fraction == 0.0) {
    rep.e6.status = ConditionStatus::Pass;
    std::ostringstream os;
    os << "average ||Vhat^{-1}|| = " << coarse.average << ", no singular nodes";
    rep.e6.witness = os.str();
  } else {
    TorusGrid fine(grid.dim(), 2 * grid.extent());
    auto refined = inverse_norm_average(model, fine, tol.singular_tol);
    bool divergent = refined.average > tol.e6_growth_factor * coarse.average;
    rep.e6.status =
        divergent ? ConditionStatus::Fail : ConditionStatus::Pass;
    std::ostringstream os;
    os << "singular fraction " << coarse.excluded_fraction << ", average "
       << coarse.average << " -> " << refined.average << " at 2N";
    rep.e6.witness = os.str();
  }

  std::size_t masked = 0;
  for (auto b : data.near_critical()) masked += b;
  rep.critical_fraction = static_cast<double>(masked) / grid.size();
  return rep;
}

}  // namespace phononflux
