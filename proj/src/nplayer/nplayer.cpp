#include "mfga/nplayer.hpp"

#include <string>

#include "mfga/error.hpp"
#include "mfga/parallel.hpp"

namespace mfga {

StrategyProfile StrategyProfile::symmetric(std::shared_ptr<const Feedback> common) {
  require(common != nullptr, ErrorKind::precondition, "profile needs a feedback");
  StrategyProfile p;
  p.kind_ = ProfileKind::symmetric_markov;
  p.common_ = std::move(common);
  return p;
}

StrategyProfile StrategyProfile::with_deviation(std::shared_ptr<const Feedback> common,
                                                std::shared_ptr<const Feedback> deviation) {
  require(common != nullptr && deviation != nullptr, ErrorKind::precondition,
          "profile needs both feedbacks");
  StrategyProfile p;
  p.kind_ = ProfileKind::symmetric_with_deviation;
  p.common_ = std::move(common);
  p.deviation_ = std::move(deviation);
  return p;
}

StrategyProfile StrategyProfile::counterexample() {
  StrategyProfile p;
  p.kind_ = ProfileKind::counterexample_ustar;
  p.common_ = std::make_shared<CounterexampleFeedback>();
  return p;
}

StrategyProfile StrategyProfile::constant(Vec gamma) {
  StrategyProfile p;
  p.kind_ = ProfileKind::constant_action;
  p.common_ = constant_feedback(std::move(gamma));
  return p;
}

const Feedback& StrategyProfile::for_player(std::size_t i) const {
  if (kind_ == ProfileKind::symmetric_with_deviation && i == 0) return *deviation_;
  return *common_;
}

namespace {

bool alive_at(const PathRecord& path, std::size_t j) {
  return !path.absorption_index || *path.absorption_index > j;
}

Vec survivors_mean(const std::vector<PathRecord>& paths, const std::vector<Vec>& current,
                   const CoefficientSet& coeffs, std::size_t j, std::size_t& count) {
  std::vector<std::size_t> alive;
  alive.reserve(paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (alive_at(paths[i], j)) alive.push_back(i);
  }
  count = alive.size();
  if (alive.empty()) return coeffs.integrand_w.eval(Vec::Zero(coeffs.dim_d));
  const Vec sum = pairwise_sum<Vec>(
      0, alive.size(), [&](std::size_t k) { return coeffs.integrand_w.eval(current[alive[k]]); },
      Vec::Zero(coeffs.dim_d0));
  return sum / static_cast<double>(alive.size());
}

}  // namespace

Ensemble simulate_nplayer(const CoefficientSet& coeffs, const TimeGrid& grid,
                          const StrategyProfile& profile, std::size_t n_players,
                          std::uint64_t seed, const NPlayerOptions& options) {
  require(n_players >= 1, ErrorKind::precondition, "simulate_nplayer needs N >= 1");
  require(options.stream_ids.empty() || options.stream_ids.size() == n_players,
          ErrorKind::precondition, "stream_ids must have one entry per player");
  require(options.initial_states.empty() || options.initial_states.size() == n_players,
          ErrorKind::precondition, "initial_states must have one entry per player");
  const std::size_t n = grid.n_steps;
  const PathStepper stepper(coeffs, grid, options.simulation);

  Ensemble e;
  e.n_players = n_players;
  e.grid = grid;
  e.paths.resize(n_players);
  e.survivor_counts.resize(grid.size());
  e.conditional_means.resize(grid.size());

  std::vector<NoiseStream> streams;
  streams.reserve(n_players);
  std::vector<Vec> x0(n_players);
  std::vector<Vec> current(n_players);
  for (std::size_t i = 0; i < n_players; ++i) {
    const std::uint32_t id =
        options.stream_ids.empty() ? static_cast<std::uint32_t>(i) : options.stream_ids[i];
    streams.emplace_back(seed, StreamId{options.replication, id});
    x0[i] = options.initial_states.empty() ? coeffs.initial_law.sample(streams[i], coeffs.domain)
                                           : options.initial_states[i];
    current[i] = x0[i];
    auto& path = e.paths[i];
    path.states.reserve(grid.size());
    path.controls.reserve(n);
    path.states.push_back(x0[i]);
    if (!coeffs.domain.contains(x0[i])) path.absorption_index = 0;
  }

  Vec gamma(coeffs.dim_d);
  for (std::size_t j = 0; j < n; ++j) {
    const Vec mean = survivors_mean(e.paths, current, coeffs, j, e.survivor_counts[j]);
    e.conditional_means[j] = mean;
    for (std::size_t i = 0; i < n_players; ++i) {
      auto& path = e.paths[i];
      if (!alive_at(path, j)) {
        path.states.push_back(current[i]);
        path.controls.push_back(stepper.rest_action());
        continue;
      }
      if (stepper.advance(j, profile.for_player(i), streams[i], x0[i], mean, current[i], gamma)) {
        path.absorption_index = j + 1;
      }
      path.controls.push_back(gamma);
      path.states.push_back(current[i]);
    }
  }
  e.conditional_means[n] = survivors_mean(e.paths, current, coeffs, n, e.survivor_counts[n]);
  for (std::size_t i = 0; i < n_players; ++i) e.paths[i].exit_state = current[i];
  return e;
}

Vec conditional_empirical_mean(const Ensemble& ensemble, const CoefficientSet& coeffs,
                               std::size_t j) {
  require(j < ensemble.grid.size(), ErrorKind::precondition, "grid index out of range");
  std::vector<Vec> states(ensemble.n_players);
  for (std::size_t i = 0; i < ensemble.n_players; ++i) states[i] = ensemble.paths[i].states[j];
  std::size_t count = 0;
  return survivors_mean(ensemble.paths, states, coeffs, j, count);
}

double cost_J(const Ensemble& ensemble, const CoefficientSet& coeffs, std::size_t i) {
  require(i < ensemble.n_players, ErrorKind::precondition,
          "player index " + std::to_string(i) + " out of range");
  return realized_cost(coeffs, ensemble.grid, ensemble.paths[i], ensemble.conditional_means);
}

}  // namespace mfga
