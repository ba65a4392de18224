#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <json.hpp>

#include "mfga/feedback.hpp"
#include "mfga/hjb_kfp.hpp"
#include "mfga/measure_flow.hpp"
#include "mfga/model.hpp"
#include "mfga/sde.hpp"
#include "mfga/time_grid.hpp"

namespace mfga {

/// How one application of the best-response map pushes the law forward.
enum class ResponseMode {
  /// HJB + KFP on a grid (box domains, d <= 2).
  pde,
  /// Particles under the feedback against the frozen flow.
  monte_carlo,
  /// Exact weighted enumeration of the atoms of nu (sigma = 0 only).
  enumeration,
};

struct ResponseOptions {
  ResponseMode mode = ResponseMode::pde;
  /// Space nodes per axis for the HJB (and KFP) grid.
  std::size_t nodes = 101;
  std::size_t n_particles = 100000;
  std::uint64_t seed = 0;
  std::uint32_t replication = 0;
  /// Histogram bins per axis in Monte Carlo mode (0: no histograms; d <= 2).
  std::size_t histogram_bins = 0;
  double mass_floor = 1e-8;
  HjbOptions hjb;
  SimulationOptions simulation;
  /// Use this strategy instead of solving the HJB equation (needed when no
  /// PDE grid exists, e.g. d >= 3).
  std::shared_ptr<const Feedback> fixed_feedback;
};

/// One application of the best-response map.
struct BestResponse {
  /// Null when the feedback was supplied rather than computed.
  std::shared_ptr<const ValueField> value;
  std::shared_ptr<const Feedback> feedback;
  /// PDE mode only.
  std::shared_ptr<const DensityField> density;
  MeasureFlow flow;
};

/// Solve the control problem against mflow, then return the conditional
/// flow of the optimally controlled state.
BestResponse best_response_flow(const CoefficientSet& coeffs, const TimeGrid& grid,
                                const MeasureFlow& mflow, const ResponseOptions& options = {});

/// Conditional flow of the state under a given feedback and frozen flow
/// (Monte Carlo or enumeration, per options.mode; pde mode is rejected).
MeasureFlow sample_flow(const CoefficientSet& coeffs, const TimeGrid& grid,
                        const Feedback& feedback, const MeasureFlow& mflow,
                        const ResponseOptions& options);

struct CostEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

/// Expected realized cost of one player using `feedback` against the frozen
/// flow (Monte Carlo or exact enumeration).
CostEstimate expected_cost(const CoefficientSet& coeffs, const TimeGrid& grid,
                           const Feedback& feedback, const MeasureFlow& mflow,
                           const ResponseOptions& options);

struct FixedPointOptions {
  double damping = 0.5;
  double tol = 1e-4;
  std::size_t max_iter = 200;
  ResponseOptions response;
};

struct FixedPointReport {
  std::size_t iterations = 0;
  std::vector<double> residuals;
  double final_residual = 0.0;
  bool converged = false;
  double damping = 0.5;
  double tolerance = 1e-4;
  /// sup |Psi(flow) - flow| for the returned flow.
  double recheck_residual = 0.0;
  /// Discrete total variation of the returned means over the grid.
  double total_variation = 0.0;
  bool measure_independent = false;

  nlohmann::json to_json() const;
};

struct FixedPointResult {
  MeasureFlow flow;
  /// Best response to the returned flow.
  BestResponse response;
  FixedPointReport report;
};

/// Damped Picard iteration on the mean flow:
/// means_{k+1} = (1 - damping) means_k + damping Psi(means_k).
FixedPointResult solve_fixed_point(const CoefficientSet& coeffs, const TimeGrid& grid,
                                   const MeasureFlow& init_flow,
                                   const FixedPointOptions& options = {});

/// The iteration on its own, for an arbitrary map on mean flows. Stops once
/// the residual is <= tol; returns the last iterate.
std::vector<Vec> damped_picard(const std::function<std::vector<Vec>(const std::vector<Vec>&)>& psi,
                               std::vector<Vec> init, double damping, double tol,
                               std::size_t max_iter, FixedPointReport& report);

struct ConsistencyCheck {
  /// sup_j |simulated mean - mflow mean| over the surviving prefix.
  double distance = 0.0;
  /// Largest per-slice standard error of the simulated mean (0 when exact).
  double standard_error = 0.0;
  /// Number of grid slices compared.
  std::size_t prefix_length = 0;
  bool extinct = false;
};

/// Simulate the frozen (feedback, mflow) system and compare its conditional
/// mean flow with mflow. Uses exact enumeration when sigma = 0 and nu is
/// atomic, Monte Carlo otherwise.
ConsistencyCheck mckean_vlasov_check(const CoefficientSet& coeffs, const TimeGrid& grid,
                                     const Feedback& feedback, const MeasureFlow& mflow,
                                     std::size_t n_particles, std::uint64_t seed,
                                     const SimulationOptions& simulation = {});

/// CSV rows (t, survival, mean_1..mean_d0).
void write_flow_csv(std::ostream& out, const MeasureFlow& flow);

}  // namespace mfga
