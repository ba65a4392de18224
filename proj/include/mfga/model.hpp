#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mfga/rng.hpp"
#include "mfga/types.hpp"

namespace mfga {

/// Compact convex action set: a box with possibly degenerate coordinates.
class ActionBox {
 public:
  ActionBox() = default;
  ActionBox(Vec lower, Vec upper);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  /// Coordinate k may vary (lower < upper).
  bool active(int k) const { return lower_[k] < upper_[k]; }
  std::vector<bool> active_mask() const;

  bool contains(const Vec& gamma, double tol = 1e-12) const;
  Vec project(const Vec& gamma) const;
  /// Largest Euclidean norm attained on the box.
  double max_norm() const;

 private:
  Vec lower_;
  Vec upper_;
};

enum class DomainKind { box, ball, halfspace_intersection, counterexample };

/// Bounded open set O of non-absorbing states.
class AbsorbingDomain {
 public:
  AbsorbingDomain() = default;

  static AbsorbingDomain box(Vec lower, Vec upper);
  static AbsorbingDomain ball(Vec center, double radius);
  /// {x : normals.row(i) . x < offsets[i] for all i}; the caller supplies a
  /// radius R with the set contained in {|x| < R}.
  static AbsorbingDomain halfspaces(Mat normals, Vec offsets, double bounding_radius);
  /// The piecewise-smooth set of the degenerate-noise example:
  /// -4 < x1, -2 < x2 < 2, -1 < x3 < 11/5, x1 < 1 + exp(x3 - 1).
  static AbsorbingDomain counterexample();

  DomainKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(bound_lower_.size()); }
  bool contains(const Vec& x) const;

  /// Axis-aligned box enclosing cl(O).
  const Vec& bound_lower() const { return bound_lower_; }
  const Vec& bound_upper() const { return bound_upper_; }
  /// Every x with |x| >= bounding_radius() lies outside O.
  double bounding_radius() const { return radius_bound_; }

  /// Box parameters (kind() == box only).
  const Vec& box_lower() const { return bound_lower_; }
  const Vec& box_upper() const { return bound_upper_; }

  nlohmann::json to_json() const;
  static AbsorbingDomain from_json(const nlohmann::json& j);

 private:
  DomainKind kind_ = DomainKind::box;
  Vec bound_lower_;
  Vec bound_upper_;
  double radius_bound_ = 0.0;
  Vec center_;
  double radius_ = 0.0;
  Mat normals_;
  Vec offsets_;
};

enum class InitialLawKind { dirac, product_of_atoms, uniform_on_box, gaussian_truncated };

struct AtomAxis {
  std::vector<double> values;
  std::vector<double> weights;
};

/// Initial law nu of a single player; N-player initial data are i.i.d. draws.
class InitialLaw {
 public:
  InitialLaw() = default;

  static InitialLaw dirac(Vec point);
  static InitialLaw product_of_atoms(std::vector<AtomAxis> axes);
  static InitialLaw uniform_on_box(Vec lower, Vec upper);
  /// Independent Gaussian coordinates conditioned on O (rejection sampling).
  static InitialLaw gaussian_truncated(Vec mean, Vec stddev);

  InitialLawKind kind() const { return kind_; }
  int dim() const;

  /// Draws one initial state from the stream's initial-state counters.
  Vec sample(const NoiseStream& stream, const AbsorbingDomain& domain) const;

  bool atomic() const {
    return kind_ == InitialLawKind::dirac || kind_ == InitialLawKind::product_of_atoms;
  }
  /// All atoms with their probabilities (atomic laws only).
  std::vector<std::pair<Vec, double>> atoms() const;
  /// Unnormalized Lebesgue density (continuous laws only; 0 outside support).
  double density(const Vec& x) const;

  nlohmann::json to_json() const;
  static InitialLaw from_json(const nlohmann::json& j);

 private:
  InitialLawKind kind_ = InitialLawKind::dirac;
  Vec a_;  // point / lower / mean
  Vec b_;  // upper / stddev
  std::vector<AtomAxis> axes_;
};

/// How the running cost depends on the control; selects the Hamiltonian
/// minimization rule.
enum class ControlStructure { independent, quadratic, separable_convex, general };

/// A member of the closed catalog of parametric coefficient families.
/// `family` and `params` are the serializable identity; `eval` the function.
struct Drift {
  std::string family;
  nlohmann::json params;
  std::function<Vec(double t, const Vec& x, const Vec& y)> eval;
  bool measure_dependent = false;
};

struct MeasureIntegrand {
  std::string family;
  nlohmann::json params;
  std::function<Vec(const Vec& x)> eval;
};

struct RunningCost {
  std::string family;
  nlohmann::json params;
  std::function<double(double t, const Vec& x, const Vec& y, const Vec& gamma)> eval;
  ControlStructure structure = ControlStructure::independent;
  bool measure_dependent = false;
  /// Coefficient a of a|gamma|^2 (quadratic structure).
  double control_weight = 0.0;
  /// Per-coordinate control cost phi_k(g) (separable_convex structure).
  std::function<double(int k, double g)> coordinate_cost;
};

struct TerminalCost {
  std::string family;
  nlohmann::json params;
  std::function<double(double t, const Vec& x)> eval;
};

Drift make_drift(const nlohmann::json& descriptor, int d, int d0);
MeasureIntegrand make_integrand(const nlohmann::json& descriptor, int d, int d0);
RunningCost make_running_cost(const nlohmann::json& descriptor, int d, int d0);
TerminalCost make_terminal_cost(const nlohmann::json& descriptor, int d);

/// All model data: dynamics, costs, action set, domain, horizon, initial law.
/// Immutable once built.
struct CoefficientSet {
  int dim_d = 1;
  int dim_d0 = 1;
  double horizon_T = 1.0;
  Mat sigma;
  Drift drift_bbar;
  MeasureIntegrand integrand_w;
  RunningCost running_cost_f;
  TerminalCost terminal_cost_F;
  ActionBox action_space;
  AbsorbingDomain domain;
  InitialLaw initial_law;
  double bound_K = 1.0;
  double lipschitz_Lbar = 1.0;

  /// Throws a configuration error if dimensions or constants are inconsistent.
  void check_consistency() const;

  /// Neither the drift nor the running cost reads the measure argument.
  bool measure_independent() const {
    return !drift_bbar.measure_dependent && !running_cost_f.measure_dependent;
  }
  /// sigma has a (numerically) zero singular value.
  bool sigma_degenerate() const;
  /// Operator 2-norm of sigma^{-1}; +inf if degenerate.
  double sigma_inverse_norm() const;
};

nlohmann::json to_json(const CoefficientSet& coeffs);
CoefficientSet coefficients_from_json(const nlohmann::json& j);
CoefficientSet load_model(const std::string& path);
void save_model(const CoefficientSet& coeffs, const std::string& path);

/// b = gamma + bbar(t, x, m).
Vec drift_full(const CoefficientSet& coeffs, double t, const Vec& x, const Vec& m,
               const Vec& gamma);

struct ValidationReport {
  std::size_t probes = 0;
  double max_drift_norm = 0.0;
  double max_w_norm = 0.0;
  double max_f = 0.0;
  double min_f = 0.0;
  double max_F = 0.0;
  double min_F = 0.0;
  double max_lipschitz_quotient = 0.0;
  bool domain_interior_ok = true;
  bool domain_exterior_ok = true;
  double initial_support_fraction = 1.0;
  bool sigma_degenerate = false;
  std::vector<std::string> violations;
  std::vector<std::string> notes;

  bool passed() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

/// Randomized probing of the standing assumptions (bounds, signs, Lipschitz
/// constant of the drift, domain and initial-law support).
ValidationReport validate(const CoefficientSet& coeffs, std::size_t probes,
                          std::uint64_t rng_seed);

}  // namespace mfga
