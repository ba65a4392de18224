#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "mfga/error.hpp"
#include "mfga/json_io.hpp"
#include "mfga/model.hpp"

namespace mfga {

using io::json;

void CoefficientSet::check_consistency() const {
  require(dim_d >= 1 && dim_d <= kMaxDim, ErrorKind::configuration, "dim_d out of range");
  require(dim_d0 >= 1 && dim_d0 <= kMaxDim, ErrorKind::configuration, "dim_d0 out of range");
  require(horizon_T > 0.0 && std::isfinite(horizon_T), ErrorKind::configuration,
          "horizon_T must be positive");
  require(sigma.rows() == dim_d && sigma.cols() == dim_d, ErrorKind::configuration,
          "sigma must be d x d");
  require(action_space.dim() == dim_d, ErrorKind::configuration, "action box must have dim d");
  require(domain.dim() == dim_d, ErrorKind::configuration, "domain must have dim d");
  require(initial_law.dim() == dim_d, ErrorKind::configuration, "initial law must have dim d");
  require(bound_K > 0.0, ErrorKind::configuration, "bound_K must be positive");
  require(lipschitz_Lbar > 0.0, ErrorKind::configuration, "lipschitz_Lbar must be positive");
  require(drift_bbar.eval && integrand_w.eval && running_cost_f.eval && terminal_cost_F.eval,
          ErrorKind::configuration, "all coefficient functions must be set");
}

bool CoefficientSet::sigma_degenerate() const {
  Eigen::JacobiSVD<Mat> svd(sigma);
  const auto& s = svd.singularValues();
  return s.size() == 0 || s.minCoeff() < 1e-12;
}

double CoefficientSet::sigma_inverse_norm() const {
  Eigen::JacobiSVD<Mat> svd(sigma);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s.minCoeff() < 1e-12) return std::numeric_limits<double>::infinity();
  return 1.0 / s.minCoeff();
}

json to_json(const CoefficientSet& c) {
  return {{"dim_d", c.dim_d},
          {"dim_d0", c.dim_d0},
          {"horizon_T", io::real_to_json(c.horizon_T)},
          {"sigma", io::mat_to_json(c.sigma)},
          {"drift", {{"family", c.drift_bbar.family}, {"params", c.drift_bbar.params}}},
          {"w", {{"family", c.integrand_w.family}, {"params", c.integrand_w.params}}},
          {"f", {{"family", c.running_cost_f.family}, {"params", c.running_cost_f.params}}},
          {"F", {{"family", c.terminal_cost_F.family}, {"params", c.terminal_cost_F.params}}},
          {"gamma_box",
           {{"lower", io::vec_to_json(c.action_space.lower())},
            {"upper", io::vec_to_json(c.action_space.upper())}}},
          {"domain", c.domain.to_json()},
          {"initial_law", c.initial_law.to_json()},
          {"bound_K", io::real_to_json(c.bound_K)},
          {"lipschitz_Lbar", io::real_to_json(c.lipschitz_Lbar)}};
}

CoefficientSet coefficients_from_json(const json& j) {
  const std::string ctx = "model descriptor";
  CoefficientSet c;
  c.dim_d = io::at(j, "dim_d", ctx).get<int>();
  c.dim_d0 = j.contains("dim_d0") ? j.at("dim_d0").get<int>() : 1;
  require(c.dim_d >= 1 && c.dim_d <= kMaxDim && c.dim_d0 >= 1 && c.dim_d0 <= kMaxDim,
          ErrorKind::configuration, "dimensions out of range");
  c.horizon_T = io::real_from_json(io::at(j, "horizon_T", ctx));
  c.sigma = io::mat_from_json(io::at(j, "sigma", ctx));
  c.drift_bbar = make_drift(io::at(j, "drift", ctx), c.dim_d, c.dim_d0);
  c.integrand_w = make_integrand(io::at(j, "w", ctx), c.dim_d, c.dim_d0);
  c.running_cost_f = make_running_cost(io::at(j, "f", ctx), c.dim_d, c.dim_d0);
  c.terminal_cost_F = make_terminal_cost(io::at(j, "F", ctx), c.dim_d);
  const json& box = io::at(j, "gamma_box", ctx);
  c.action_space = ActionBox(io::vec_from_json(io::at(box, "lower", "gamma_box")),
                             io::vec_from_json(io::at(box, "upper", "gamma_box")));
  c.domain = AbsorbingDomain::from_json(io::at(j, "domain", ctx));
  c.initial_law = InitialLaw::from_json(io::at(j, "initial_law", ctx));
  c.bound_K = io::real_from_json(io::at(j, "bound_K", ctx));
  c.lipschitz_Lbar = io::real_from_json(io::at(j, "lipschitz_Lbar", ctx));
  c.check_consistency();
  return c;
}

CoefficientSet load_model(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::configuration, "cannot open model file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::configuration, "model file " + path + " is not valid JSON: " + e.what());
  }
  return coefficients_from_json(j);
}

void save_model(const CoefficientSet& coeffs, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::configuration, "cannot write model file " + path);
  out << to_json(coeffs).dump(2) << '\n';
}

Vec drift_full(const CoefficientSet& coeffs, double t, const Vec& x, const Vec& m,
               const Vec& gamma) {
  if (!coeffs.action_space.contains(gamma, 1e-12)) {
    fail(ErrorKind::contract_violation, "control action outside the action box");
  }
  if (!std::isfinite(t) || !x.allFinite() || !m.allFinite() || !gamma.allFinite()) {
    fail(ErrorKind::numeric, "non-finite input to drift");
  }
  Vec b = coeffs.drift_bbar.eval(t, x, m);
  b += gamma;
  return b;
}

}  // namespace mfga
