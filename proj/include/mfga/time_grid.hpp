#pragma once

#include <cstddef>
#include <vector>

namespace mfga {

/// Uniform grid 0 = t_0 < ... < t_n = T.
struct TimeGrid {
  std::size_t n_steps = 0;
  double horizon = 0.0;
  double dt = 0.0;
  std::vector<double> times;

  static TimeGrid uniform(double horizon, std::size_t n_steps);

  std::size_t size() const { return n_steps + 1; }
  /// Largest index j with t_j <= t (clamped to [0, n]).
  std::size_t index_at(double t) const;
};

}  // namespace mfga
