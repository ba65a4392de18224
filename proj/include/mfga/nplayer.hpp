#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mfga/feedback.hpp"
#include "mfga/model.hpp"
#include "mfga/sde.hpp"
#include "mfga/time_grid.hpp"

namespace mfga {

/// N stopped paths coupled through the survivors' empirical measure.
struct Ensemble {
  std::size_t n_players = 0;
  TimeGrid grid;
  std::vector<PathRecord> paths;
  /// Number of players still in O at t_j.
  std::vector<std::size_t> survivor_counts;
  /// Mean of w over the survivors at t_j; w(0) when nobody survives.
  std::vector<Vec> conditional_means;
};

enum class ProfileKind {
  symmetric_markov,
  symmetric_with_deviation,
  counterexample_ustar,
  constant_action,
};

/// Strategy vector in which every player uses one feedback, except that in
/// symmetric_with_deviation player 0 uses `deviation`.
class StrategyProfile {
 public:
  static StrategyProfile symmetric(std::shared_ptr<const Feedback> common);
  static StrategyProfile with_deviation(std::shared_ptr<const Feedback> common,
                                        std::shared_ptr<const Feedback> deviation);
  static StrategyProfile counterexample();
  static StrategyProfile constant(Vec gamma);

  ProfileKind kind() const { return kind_; }
  const Feedback& for_player(std::size_t i) const;
  std::shared_ptr<const Feedback> common() const { return common_; }

 private:
  ProfileKind kind_ = ProfileKind::symmetric_markov;
  std::shared_ptr<const Feedback> common_;
  std::shared_ptr<const Feedback> deviation_;
};

struct NPlayerOptions {
  std::uint32_t replication = 0;
  SimulationOptions simulation;
  /// stream_ids[i] is the particle id of player i's noise stream; identity
  /// if empty.
  std::vector<std::uint32_t> stream_ids;
  /// Explicit initial states (one per player) instead of draws from nu.
  std::vector<Vec> initial_states;
};

/// Explicit-in-time coupled simulation: the survivors' mean at t_j drives
/// every live particle's step from t_j to t_{j+1}. A player absorbed at
/// index j is excluded from the mean at t_j.
Ensemble simulate_nplayer(const CoefficientSet& coeffs, const TimeGrid& grid,
                          const StrategyProfile& profile, std::size_t n_players,
                          std::uint64_t seed, const NPlayerOptions& options = {});

/// Mean of w over survivors at grid index j, w(0) if none.
Vec conditional_empirical_mean(const Ensemble& ensemble, const CoefficientSet& coeffs,
                               std::size_t j);

/// Realized cost of player i (left-endpoint quadrature of f plus F at the
/// stopped point).
double cost_J(const Ensemble& ensemble, const CoefficientSet& coeffs, std::size_t i);

}  // namespace mfga
