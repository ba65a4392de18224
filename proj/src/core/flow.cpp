#include <cmath>
#include <string>

#include "mfga/error.hpp"
#include "mfga/json_io.hpp"
#include "mfga/measure_flow.hpp"
#include "mfga/time_grid.hpp"

namespace mfga {

TimeGrid TimeGrid::uniform(double horizon, std::size_t n_steps) {
  require(n_steps >= 1, ErrorKind::configuration, "time grid needs n_steps >= 1");
  require(horizon > 0.0 && std::isfinite(horizon), ErrorKind::configuration,
          "time grid needs a positive horizon");
  TimeGrid g;
  g.n_steps = n_steps;
  g.horizon = horizon;
  g.dt = horizon / static_cast<double>(n_steps);
  g.times.resize(n_steps + 1);
  for (std::size_t j = 0; j <= n_steps; ++j) {
    g.times[j] = horizon * static_cast<double>(j) / static_cast<double>(n_steps);
  }
  return g;
}

std::size_t TimeGrid::index_at(double t) const {
  if (t <= 0.0) return 0;
  const double raw = std::floor(t / dt + 1e-9);
  if (raw >= static_cast<double>(n_steps)) return n_steps;
  return static_cast<std::size_t>(raw);
}

double Histogram::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

MeasureFlow MeasureFlow::constant(const TimeGrid& grid, const Vec& mean) {
  MeasureFlow flow;
  flow.grid = grid;
  flow.survival.assign(grid.size(), 1.0);
  flow.means.assign(grid.size(), mean);
  return flow;
}

double MeasureFlow::sup_distance(const MeasureFlow& other) const {
  require(means.size() == other.means.size(), ErrorKind::precondition,
          "flows live on different grids");
  double d = 0.0;
  for (std::size_t j = 0; j < means.size(); ++j) {
    d = std::max(d, (means[j] - other.means[j]).norm());
  }
  return d;
}

void MeasureFlow::check_invariants(double bound_K) const {
  require(survival.size() == grid.size() && means.size() == grid.size(), ErrorKind::scheme,
          "flow arrays do not match the grid");
  require(std::abs(survival[0] - 1.0) <= 1e-10, ErrorKind::scheme, "survival[0] != 1");
  for (std::size_t j = 1; j < survival.size(); ++j) {
    require(survival[j] <= survival[j - 1] + 1e-12, ErrorKind::scheme,
            "survival increases at index " + std::to_string(j));
  }
  for (std::size_t j = 0; j < means.size(); ++j) {
    require(means[j].norm() <= bound_K * (1.0 + 1e-9), ErrorKind::scheme,
            "conditional mean exceeds K at index " + std::to_string(j));
  }
  if (histograms) {
    for (std::size_t j = 0; j < histograms->size(); ++j) {
      require(std::abs((*histograms)[j].total() - 1.0) <= 1e-10, ErrorKind::scheme,
              "histogram does not sum to one at index " + std::to_string(j));
    }
  }
}

nlohmann::json MeasureFlow::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t j = 0; j < means.size(); ++j) {
    rows.push_back({{"t", io::real_to_json(grid.times[j])},
                    {"survival", io::real_to_json(survival[j])},
                    {"mean", io::vec_to_json(means[j])}});
  }
  return {{"n_steps", grid.n_steps}, {"horizon", io::real_to_json(grid.horizon)}, {"rows", rows}};
}

}  // namespace mfga
