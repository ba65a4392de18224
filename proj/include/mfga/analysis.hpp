#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfga/feedback.hpp"
#include "mfga/hjb_kfp.hpp"
#include "mfga/measure_flow.hpp"
#include "mfga/mfg.hpp"
#include "mfga/model.hpp"
#include "mfga/nplayer.hpp"
#include "mfga/time_grid.hpp"

namespace mfga {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and standard error of the mean.
MeanSe mean_and_se(const std::vector<double>& samples);

struct NashGapRow {
  std::size_t N = 0;
  std::size_t replications = 0;
  MeanSe cost_equilibrium;
  MeanSe cost_deviation;
  /// cost_equilibrium - cost_deviation; the SE comes from the paired
  /// per-replication differences (both runs share every random draw).
  MeanSe gap;
  std::vector<double> equilibrium_samples;
  std::vector<double> deviation_samples;
};

struct NashGapReport {
  std::vector<NashGapRow> rows;
  std::uint64_t seed = 0;
  std::string note;

  nlohmann::json to_json() const;
  /// One row per (N, replication).
  void write_csv(std::ostream& out) const;
};

struct NashGapOptions {
  SimulationOptions simulation;
  std::size_t threads = 0;
};

/// Player 0's cost when everyone plays `equilibrium` versus when player 0
/// alone switches to `deviation`, over independent replications.
NashGapRow estimate_nash_gap(const CoefficientSet& coeffs, const TimeGrid& grid,
                             std::shared_ptr<const Feedback> equilibrium,
                             std::shared_ptr<const Feedback> deviation, std::size_t N,
                             std::size_t replications, std::uint64_t seed,
                             const NashGapOptions& options = {});

/// Best response of one player in an N-player population that follows the
/// limit flow: the HJB against `flow`, with the player's own share of the
/// empirical mean, (w(x) + P m(t)) / (1 + P) with P = (N - 1) survival(t),
/// taken into account.
std::shared_ptr<const ValueField> limit_best_response(const CoefficientSet& coeffs,
                                                      const TimeGrid& grid,
                                                      const MeasureFlow& flow, std::size_t N,
                                                      std::size_t nodes,
                                                      const HjbOptions& hjb = {});

/// Test functions for the bounded-Lipschitz surrogate distance.
struct Dictionary {
  std::vector<std::string> names;
  std::vector<std::function<double(const Vec&)>> functions;
  std::uint64_t seed = 0;

  std::size_t size() const { return functions.size(); }
  /// Coordinate maps, the components of w, and n_ridge ridge functions
  /// tanh(theta.x - b) with unit theta and b = theta.z, z uniform on the
  /// bounding box of O, all drawn from `seed`.
  static Dictionary standard(const CoefficientSet& coeffs, std::size_t n_ridge,
                             std::uint64_t seed);
  /// The subset at the given indices.
  Dictionary subset(const std::vector<std::size_t>& keep) const;
  nlohmann::json to_json() const;
};

/// Survivors' empirical measures as a flow with equal-weight histograms;
/// slices without survivors hold delta_0.
MeasureFlow empirical_flow(const Ensemble& ensemble, const CoefficientSet& coeffs);

/// sup_j max_g |<g, a(t_j)> - <g, b(t_j)>|; both flows need histograms.
double chaos_distance(const MeasureFlow& a, const MeasureFlow& b, const Dictionary& dictionary);
double chaos_distance(const Ensemble& ensemble, const CoefficientSet& coeffs,
                      const MeasureFlow& mflow, const Dictionary& dictionary);

struct ChaosReport {
  std::vector<std::size_t> N_ladder;
  std::size_t replications = 0;
  /// Averaged over replications.
  std::vector<MeanSe> distances;
  std::vector<MeanSe> survival_gap;
  /// [ladder index][replication]
  std::vector<std::vector<double>> distance_samples;
  std::vector<std::vector<double>> survival_gap_samples;
  nlohmann::json dictionary;

  /// max / min of distance(N) sqrt(N) over the ladder.
  double scaling_spread() const;
  nlohmann::json to_json() const;
  void write_csv(std::ostream& out) const;
};

/// N-player runs under one common feedback, compared with a reference flow
/// (which must carry histograms).
ChaosReport chaos_study(const CoefficientSet& coeffs, const TimeGrid& grid,
                        std::shared_ptr<const Feedback> feedback, const MeasureFlow& reference,
                        const std::vector<std::size_t>& ladder, std::size_t replications,
                        std::uint64_t seed, const Dictionary& dictionary,
                        const SimulationOptions& simulation = {});

struct SurvivalBoundCheck {
  double observed = 0.0;
  double standard_error = 0.0;
  double c_ball = 0.0;
  double bound = 0.0;
  bool pass = false;
  bool degenerate = false;
  std::string verdict;

  nlohmann::json to_json() const;
};

/// Compares the final survivor fraction with
/// c_ball exp(-T K_tot^2 |sigma^-1|^2), where c_ball is the squared Monte
/// Carlo survival probability of the driftless dynamics and K_tot bounds the
/// full drift |gamma + bbar| <= max|Gamma| + K.
SurvivalBoundCheck survival_lower_bound_check(const Ensemble& ensemble,
                                              const CoefficientSet& coeffs,
                                              std::size_t driftless_paths = 1000000,
                                              std::uint64_t seed = 0);

}  // namespace mfga
