#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mfga/feedback.hpp"
#include "mfga/measure_flow.hpp"
#include "mfga/model.hpp"
#include "mfga/rng.hpp"
#include "mfga/time_grid.hpp"

namespace mfga {

/// A simulated path stopped at its first exit from O.
struct PathRecord {
  std::vector<Vec> states;
  /// First grid index whose state is outside O; empty if the path survives.
  std::optional<std::size_t> absorption_index;
  /// State frozen at absorption (last state if never absorbed).
  Vec exit_state;
  /// controls[j] is the action used on [t_j, t_{j+1}); after absorption the
  /// projection of 0 onto the action box.
  std::vector<Vec> controls;

  bool absorbed_by(std::size_t j) const { return absorption_index && *absorption_index <= j; }
};

struct SimulationOptions {
  /// Detect crossings between grid nodes with the Brownian-bridge exit
  /// probability (box domains with diagonal sigma*sigma^T only).
  bool bridge_correction = false;
};

/// One Euler-Maruyama step x + (gamma + bbar(t,x,m)) dt + sigma sqrt(dt) xi.
Vec step(const CoefficientSet& coeffs, double t, const Vec& x, const Vec& m, const Vec& gamma,
         double dt, const Vec& xi);

/// Smallest j with states[j] outside O.
std::optional<std::size_t> first_exit_index(const AbsorbingDomain& domain,
                                            std::span<const Vec> states);

/// Probability that a Brownian bridge from x to x2 over one step leaves the
/// box, given per-coordinate variances sigma2[k] * dt. Faces are treated as
/// independent.
double bridge_exit_probability(const AbsorbingDomain& box, const Vec& x, const Vec& x2,
                               const Vec& sigma2, double dt);

/// Advances live particles one grid step. Shared by the single-path and the
/// N-player simulators so that both produce bit-identical paths.
class PathStepper {
 public:
  PathStepper(const CoefficientSet& coeffs, const TimeGrid& grid,
              const SimulationOptions& options);

  /// Moves x from t_j to t_{j+1} under the feedback and mean m; writes the
  /// applied action to gamma. Returns true if the new state is absorbed.
  bool advance(std::size_t j, const Feedback& feedback, const NoiseStream& noise,
               const Vec& x0, const Vec& m, Vec& x, Vec& gamma) const;

  /// Action recorded after absorption.
  const Vec& rest_action() const { return rest_; }

 private:
  const CoefficientSet& coeffs_;
  const TimeGrid& grid_;
  SimulationOptions options_;
  bool noisy_;
  Vec sigma2_;
  Vec rest_;
};

/// Single player against a frozen flow of means.
PathRecord simulate_path(const CoefficientSet& coeffs, const TimeGrid& grid,
                         const Feedback& feedback, const MeasureFlow& mflow,
                         const NoiseStream& noise, const Vec& x0,
                         const SimulationOptions& options = {});

/// Same as simulate_path with x0 drawn from the initial law on the stream.
PathRecord simulate_path(const CoefficientSet& coeffs, const TimeGrid& grid,
                         const Feedback& feedback, const MeasureFlow& mflow,
                         const NoiseStream& noise, const SimulationOptions& options = {});

/// Realized cost: left-endpoint sum of f up to absorption plus F at the
/// stopped point. Used for single paths and N-player members alike.
double realized_cost(const CoefficientSet& coeffs, const TimeGrid& grid, const PathRecord& path,
                     std::span<const Vec> means);

}  // namespace mfga
