#include "mfga/sde.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mfga/error.hpp"

namespace mfga {

void CounterexampleFeedback::action(const FeedbackQuery& q, Vec& out) const {
  out = Vec::Zero(3);
  out[0] = q.t <= 1.0 ? std::clamp(q.x0[0], -1.0, 1.0) : -1.0;
}

std::shared_ptr<const Feedback> constant_feedback(Vec gamma) {
  return std::make_shared<ConstantFeedback>(std::move(gamma));
}

std::shared_ptr<const Feedback> null_feedback(const ActionBox& box) {
  return constant_feedback(box.project(Vec::Zero(box.dim())));
}

Vec step(const CoefficientSet& coeffs, double t, const Vec& x, const Vec& m, const Vec& gamma,
         double dt, const Vec& xi) {
  require(dt > 0.0, ErrorKind::precondition, "step needs dt > 0");
  Vec next = x + drift_full(coeffs, t, x, m, gamma) * dt;
  next.noalias() += coeffs.sigma * xi * std::sqrt(dt);
  if (!next.allFinite()) {
    fail(ErrorKind::numeric, fmt::format("non-finite state after step at t = {}", t));
  }
  return next;
}

std::optional<std::size_t> first_exit_index(const AbsorbingDomain& domain,
                                            std::span<const Vec> states) {
  require(!states.empty(), ErrorKind::precondition, "first_exit_index needs states");
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (!domain.contains(states[j])) return j;
  }
  return std::nullopt;
}

double bridge_exit_probability(const AbsorbingDomain& box, const Vec& x, const Vec& x2,
                               const Vec& sigma2, double dt) {
  double survive = 1.0;
  for (int k = 0; k < x.size(); ++k) {
    const double var = sigma2[k] * dt;
    if (var <= 0.0) continue;
    const double hi = box.box_upper()[k];
    const double lo = box.box_lower()[k];
    survive *= 1.0 - std::exp(-2.0 * (hi - x[k]) * (hi - x2[k]) / var);
    survive *= 1.0 - std::exp(-2.0 * (x[k] - lo) * (x2[k] - lo) / var);
  }
  return 1.0 - survive;
}

namespace {

Vec bridge_variances(const CoefficientSet& coeffs) {
  require(coeffs.domain.kind() == DomainKind::box, ErrorKind::configuration,
          "bridge correction is available for box domains only");
  const Mat a = coeffs.sigma * coeffs.sigma.transpose();
  require(a.isDiagonal(1e-14), ErrorKind::configuration,
          "bridge correction needs a diagonal sigma*sigma^T");
  Vec out(coeffs.dim_d);
  for (int k = 0; k < coeffs.dim_d; ++k) out[k] = a(k, k);
  return out;
}

}  // namespace

PathStepper::PathStepper(const CoefficientSet& coeffs, const TimeGrid& grid,
                         const SimulationOptions& options)
    : coeffs_(coeffs),
      grid_(grid),
      options_(options),
      noisy_(!coeffs.sigma.isZero(0.0)),
      sigma2_(options.bridge_correction ? bridge_variances(coeffs) : Vec()),
      rest_(coeffs.action_space.project(Vec::Zero(coeffs.dim_d))) {}

bool PathStepper::advance(std::size_t j, const Feedback& feedback, const NoiseStream& noise,
                          const Vec& x0, const Vec& m, Vec& x, Vec& gamma) const {
  const double t = grid_.times[j];
  feedback.action({j, t, x, x0}, gamma);
  gamma = coeffs_.action_space.project(gamma);
  Vec xi = Vec::Zero(coeffs_.dim_d);
  if (noisy_) noise.normals(static_cast<std::uint32_t>(j), coeffs_.dim_d, xi);
  Vec next = step(coeffs_, t, x, m, gamma, grid_.dt, xi);
  bool exited = !coeffs_.domain.contains(next);
  if (!exited && options_.bridge_correction) {
    const double p = bridge_exit_probability(coeffs_.domain, x, next, sigma2_, grid_.dt);
    exited = noise.uniform(static_cast<std::uint32_t>(j), DrawPurpose::bridge) < p;
  }
  x = std::move(next);
  return exited;
}

PathRecord simulate_path(const CoefficientSet& coeffs, const TimeGrid& grid,
                         const Feedback& feedback, const MeasureFlow& mflow,
                         const NoiseStream& noise, const Vec& x0,
                         const SimulationOptions& options) {
  require(coeffs.domain.contains(x0), ErrorKind::precondition,
          "simulate_path: initial state outside O");
  require(mflow.means.size() == grid.size(), ErrorKind::precondition,
          "simulate_path: flow is not defined on the simulation grid");
  const PathStepper stepper(coeffs, grid, options);
  PathRecord path;
  path.states.reserve(grid.size());
  path.controls.reserve(grid.n_steps);
  path.states.push_back(x0);
  Vec x = x0;
  Vec gamma(coeffs.dim_d);
  for (std::size_t j = 0; j < grid.n_steps; ++j) {
    if (path.absorption_index) {
      path.states.push_back(x);
      path.controls.push_back(stepper.rest_action());
      continue;
    }
    if (stepper.advance(j, feedback, noise, x0, mflow.means[j], x, gamma)) {
      path.absorption_index = j + 1;
    }
    path.controls.push_back(gamma);
    path.states.push_back(x);
  }
  path.exit_state = x;
  return path;
}

PathRecord simulate_path(const CoefficientSet& coeffs, const TimeGrid& grid,
                         const Feedback& feedback, const MeasureFlow& mflow,
                         const NoiseStream& noise, const SimulationOptions& options) {
  return simulate_path(coeffs, grid, feedback, mflow, noise,
                       coeffs.initial_law.sample(noise, coeffs.domain), options);
}

double realized_cost(const CoefficientSet& coeffs, const TimeGrid& grid, const PathRecord& path,
                     std::span<const Vec> means) {
  const std::size_t stop = path.absorption_index.value_or(grid.n_steps);
  double running = 0.0;
  for (std::size_t j = 0; j < stop; ++j) {
    running += coeffs.running_cost_f.eval(grid.times[j], path.states[j], means[j],
                                          path.controls[j]);
  }
  return running * grid.dt + coeffs.terminal_cost_F.eval(grid.times[stop], path.states[stop]);
}

}  // namespace mfga
