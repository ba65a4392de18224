#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "mfga/time_grid.hpp"
#include "mfga/types.hpp"

namespace mfga {

/// Weighted point cloud standing for one time slice of the conditional law.
struct Histogram {
  std::vector<Vec> points;
  std::vector<double> weights;

  double total() const;
  /// Integral of g against the normalized histogram.
  template <class G>
  double expect(const G& g) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (weights[k] != 0.0) acc += weights[k] * g(points[k]);
    }
    return acc;
  }
};

/// Time-gridded flow of conditional laws, summarized by the survival curve
/// and the conditional mean of w. The coefficients see the law only through
/// `means`.
struct MeasureFlow {
  TimeGrid grid;
  std::vector<double> survival;
  std::vector<Vec> means;
  std::optional<std::vector<Histogram>> histograms;

  /// Flow with survival 1 and a constant mean everywhere.
  static MeasureFlow constant(const TimeGrid& grid, const Vec& mean);

  int mean_dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  /// sup_j |means[j] - other.means[j]|.
  double sup_distance(const MeasureFlow& other) const;
  /// Checks the flow invariants; throws a scheme error naming the first failure.
  void check_invariants(double bound_K) const;

  nlohmann::json to_json() const;
};

}  // namespace mfga
