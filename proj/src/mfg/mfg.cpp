#include "mfga/mfg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>

#include "mfga/error.hpp"
#include "mfga/json_io.hpp"
#include "mfga/parallel.hpp"

namespace mfga {

namespace {

constexpr std::size_t kBlock = 4096;

// Weighted population statistics per grid slice.
struct Tally {
  std::vector<double> alive;
  std::vector<Vec> sum_w;
  std::vector<double> sum_w2;
  std::vector<std::size_t> alive_count;
  double cost = 0.0;
  double cost2 = 0.0;
  double total_weight = 0.0;

  Tally(std::size_t slices, int d0)
      : alive(slices, 0.0), sum_w(slices, Vec::Zero(d0)), sum_w2(slices, 0.0),
        alive_count(slices, 0) {}

  void merge(const Tally& o) {
    for (std::size_t j = 0; j < alive.size(); ++j) {
      alive[j] += o.alive[j];
      sum_w[j] += o.sum_w[j];
      sum_w2[j] += o.sum_w2[j];
      alive_count[j] += o.alive_count[j];
    }
    cost += o.cost;
    cost2 += o.cost2;
    total_weight += o.total_weight;
  }
};

struct BinLayout {
  int dim = 0;
  std::size_t bins = 0;
  Vec lower, upper;

  std::size_t cells() const { return dim == 1 ? bins : bins * bins; }
  std::size_t locate(const Vec& x) const {
    std::size_t idx = 0, stride = 1;
    for (int a = 0; a < dim; ++a) {
      const double u = (x[a] - lower[a]) / (upper[a] - lower[a]) * static_cast<double>(bins);
      const auto b = static_cast<std::size_t>(std::clamp(u, 0.0, static_cast<double>(bins - 1)));
      idx += b * stride;
      stride *= bins;
    }
    return idx;
  }
  Vec center(std::size_t idx) const {
    Vec x(dim);
    for (int a = 0; a < dim; ++a) {
      const std::size_t b = idx % bins;
      idx /= bins;
      x[a] = lower[a] + (upper[a] - lower[a]) * (static_cast<double>(b) + 0.5) /
                            static_cast<double>(bins);
    }
    return x;
  }
};

// Runs one weighted particle from x0 and records it into the tally (and the
// histogram counters, when given).
void run_particle(const CoefficientSet& coeffs, const TimeGrid& grid, const PathStepper& stepper,
                  const Feedback& feedback, const MeasureFlow& mflow, const NoiseStream& noise,
                  const Vec& x0, double weight, Tally& tally, const BinLayout* bins,
                  std::vector<std::atomic<std::uint64_t>>* counts,
                  std::vector<std::vector<std::pair<Vec, double>>>* atoms) {
  Vec x = x0;
  Vec gamma(coeffs.dim_d);
  double running = 0.0;
  std::size_t stop = grid.n_steps;
  auto record = [&](std::size_t j) {
    const Vec w = coeffs.integrand_w.eval(x);
    tally.alive[j] += weight;
    tally.sum_w[j] += weight * w;
    tally.sum_w2[j] += weight * w.squaredNorm();
    tally.alive_count[j] += 1;
    if (counts) (*counts)[j * bins->cells() + bins->locate(x)].fetch_add(1, std::memory_order_relaxed);
    if (atoms) (*atoms)[j].emplace_back(x, weight);
  };
  bool absorbed = false;
  for (std::size_t j = 0; j < grid.n_steps; ++j) {
    record(j);
    const Vec before = x;
    absorbed = stepper.advance(j, feedback, noise, x0, mflow.means[j], x, gamma);
    running += coeffs.running_cost_f.eval(grid.times[j], before, mflow.means[j], gamma);
    if (absorbed) {
      stop = j + 1;
      break;
    }
  }
  if (!absorbed) record(grid.n_steps);
  const double cost = running * grid.dt + coeffs.terminal_cost_F.eval(grid.times[stop], x);
  tally.cost += weight * cost;
  tally.cost2 += weight * cost * cost;
  tally.total_weight += weight;
}

bool enumerable(const CoefficientSet& coeffs) {
  return coeffs.sigma.isZero(0.0) && coeffs.initial_law.atomic();
}

struct Population {
  Tally tally;
  std::optional<std::vector<Histogram>> histograms;
  std::size_t particles = 0;
};

Population run_population(const CoefficientSet& coeffs, const TimeGrid& grid,
                          const Feedback& feedback, const MeasureFlow& mflow,
                          const ResponseOptions& options) {
  require(mflow.means.size() == grid.size(), ErrorKind::precondition,
          "flow is not defined on the simulation grid");
  const PathStepper stepper(coeffs, grid, options.simulation);
  const std::size_t slices = grid.size();
  Population pop{Tally(slices, coeffs.dim_d0), std::nullopt, 0};

  if (options.mode == ResponseMode::enumeration) {
    require(enumerable(coeffs), ErrorKind::configuration,
            "enumeration mode needs sigma = 0 and an atomic initial law");
    std::vector<std::vector<std::pair<Vec, double>>> atoms(slices);
    const auto list = coeffs.initial_law.atoms();
    for (std::size_t a = 0; a < list.size(); ++a) {
      require(coeffs.domain.contains(list[a].first), ErrorKind::precondition,
              "initial atom outside O");
      const NoiseStream noise(options.seed, {options.replication, static_cast<std::uint32_t>(a)});
      run_particle(coeffs, grid, stepper, feedback, mflow, noise, list[a].first, list[a].second,
                   pop.tally, nullptr, nullptr, &atoms);
    }
    pop.particles = list.size();
    pop.histograms.emplace(slices);
    for (std::size_t j = 0; j < slices; ++j) {
      Histogram& h = (*pop.histograms)[j];
      for (auto& [x, w] : atoms[j]) {
        h.points.push_back(x);
        h.weights.push_back(w / pop.tally.alive[j]);
      }
    }
    return pop;
  }

  require(options.mode == ResponseMode::monte_carlo, ErrorKind::configuration,
          "pde mode has no particle representation");
  require(options.n_particles >= 1, ErrorKind::configuration, "need at least one particle");
  const std::size_t n = options.n_particles;
  BinLayout layout;
  std::vector<std::atomic<std::uint64_t>> counts;
  const bool with_hist = options.histogram_bins > 0 && coeffs.dim_d <= 2;
  if (with_hist) {
    layout.dim = coeffs.dim_d;
    layout.bins = options.histogram_bins;
    layout.lower = coeffs.domain.bound_lower();
    layout.upper = coeffs.domain.bound_upper();
    counts = std::vector<std::atomic<std::uint64_t>>(slices * layout.cells());
  }
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<Tally> partial(blocks, Tally(slices, coeffs.dim_d0));
  WorkerPool pool;
  pool.parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const NoiseStream noise(options.seed, {options.replication, static_cast<std::uint32_t>(i)});
      const Vec x0 = coeffs.initial_law.sample(noise, coeffs.domain);
      run_particle(coeffs, grid, stepper, feedback, mflow, noise, x0, 1.0, partial[b],
                   with_hist ? &layout : nullptr, with_hist ? &counts : nullptr, nullptr);
    }
  });
  for (const Tally& t : partial) pop.tally.merge(t);
  pop.particles = n;
  if (with_hist) {
    pop.histograms.emplace(slices);
    for (std::size_t j = 0; j < slices; ++j) {
      Histogram& h = (*pop.histograms)[j];
      const double alive = static_cast<double>(pop.tally.alive_count[j]);
      for (std::size_t c = 0; c < layout.cells(); ++c) {
        const auto k = counts[j * layout.cells() + c].load();
        if (k == 0) continue;
        h.points.push_back(layout.center(c));
        h.weights.push_back(static_cast<double>(k) / alive);
      }
    }
  }
  return pop;
}

MeasureFlow flow_from(const Population& pop, const CoefficientSet& coeffs, const TimeGrid& grid,
                      double mass_floor) {
  MeasureFlow flow;
  flow.grid = grid;
  flow.survival.resize(grid.size());
  flow.means.resize(grid.size());
  const double total = pop.tally.total_weight;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double s = pop.tally.alive[j] / total;
    if (!(s > mass_floor) || pop.tally.alive_count[j] == 0) throw ExtinctionError(j, s);
    flow.survival[j] = s;
    flow.means[j] = pop.tally.sum_w[j] / pop.tally.alive[j];
  }
  (void)coeffs;
  flow.histograms = pop.histograms;
  return flow;
}

double total_variation(const std::vector<Vec>& means) {
  double tv = 0.0;
  for (std::size_t j = 1; j < means.size(); ++j) tv += (means[j] - means[j - 1]).norm();
  return tv;
}

double sup_diff(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double r = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) r = std::max(r, (a[j] - b[j]).norm());
  return r;
}

}  // namespace

MeasureFlow sample_flow(const CoefficientSet& coeffs, const TimeGrid& grid,
                        const Feedback& feedback, const MeasureFlow& mflow,
                        const ResponseOptions& options) {
  return flow_from(run_population(coeffs, grid, feedback, mflow, options), coeffs, grid,
                   options.mass_floor);
}

CostEstimate expected_cost(const CoefficientSet& coeffs, const TimeGrid& grid,
                           const Feedback& feedback, const MeasureFlow& mflow,
                           const ResponseOptions& options) {
  const Population pop = run_population(coeffs, grid, feedback, mflow, options);
  const Tally& t = pop.tally;
  CostEstimate est;
  est.samples = pop.particles;
  est.mean = t.cost / t.total_weight;
  if (options.mode == ResponseMode::monte_carlo && pop.particles > 1) {
    const double n = static_cast<double>(pop.particles);
    const double var = std::max(0.0, t.cost2 / n - est.mean * est.mean) * n / (n - 1.0);
    est.standard_error = std::sqrt(var / n);
  }
  return est;
}

BestResponse best_response_flow(const CoefficientSet& coeffs, const TimeGrid& grid,
                                const MeasureFlow& mflow, const ResponseOptions& options) {
  BestResponse out;
  std::optional<SpaceGrid> space;
  if (options.fixed_feedback) {
    out.feedback = options.fixed_feedback;
  } else {
    space = SpaceGrid::for_box(coeffs.domain, options.nodes);
    auto value = std::make_shared<ValueField>(solve_hjb(coeffs, grid, *space, mflow, options.hjb));
    out.value = value;
    out.feedback = std::make_shared<GridFeedback>(value);
  }
  if (options.mode == ResponseMode::pde) {
    require(out.value != nullptr, ErrorKind::configuration,
            "pde mode computes its own feedback; fixed_feedback needs a particle mode");
    const auto init = initial_density(coeffs.initial_law, *space);
    auto density = std::make_shared<DensityField>(
        solve_kfp(coeffs, grid, *space, *out.value, init, mflow, options.hjb.linear_sweeps));
    out.flow = renormalize(*density, coeffs, options.mass_floor);
    out.density = density;
  } else {
    out.flow = sample_flow(coeffs, grid, *out.feedback, mflow, options);
  }
  return out;
}

std::vector<Vec> damped_picard(const std::function<std::vector<Vec>(const std::vector<Vec>&)>& psi,
                               std::vector<Vec> init, double damping, double tol,
                               std::size_t max_iter, FixedPointReport& report) {
  require(damping > 0.0 && damping <= 1.0, ErrorKind::configuration, "damping must lie in (0,1]");
  require(tol > 0.0, ErrorKind::configuration, "tolerance must be positive");
  require(max_iter >= 1, ErrorKind::configuration, "max_iter must be at least 1");
  report = FixedPointReport{};
  report.damping = damping;
  report.tolerance = tol;
  std::vector<Vec> m = std::move(init);
  for (std::size_t k = 0; k < max_iter; ++k) {
    const std::vector<Vec> p = psi(m);
    require(p.size() == m.size(), ErrorKind::precondition, "map changed the flow length");
    std::vector<Vec> next(m.size());
    for (std::size_t j = 0; j < m.size(); ++j) next[j] = (1.0 - damping) * m[j] + damping * p[j];
    const double r = sup_diff(next, m);
    report.residuals.push_back(r);
    m = std::move(next);
    if (r <= tol) break;
  }
  report.iterations = report.residuals.size();
  report.final_residual = report.residuals.back();
  report.converged = report.final_residual <= tol;
  return m;
}

FixedPointResult solve_fixed_point(const CoefficientSet& coeffs, const TimeGrid& grid,
                                   const MeasureFlow& init_flow,
                                   const FixedPointOptions& options) {
  require(init_flow.means.size() == grid.size(), ErrorKind::precondition,
          "initial flow is not defined on the grid");
  FixedPointResult result;
  if (coeffs.measure_independent()) {
    // Psi is constant: one application lands on the fixed point; the second
    // one measures the residual instead of assuming it.
    const BestResponse first = best_response_flow(coeffs, grid, init_flow, options.response);
    result.flow = first.flow;
    result.response = best_response_flow(coeffs, grid, result.flow, options.response);
    const double r = sup_diff(result.response.flow.means, result.flow.means);
    FixedPointReport& rep = result.report;
    rep.iterations = 1;
    rep.residuals = {r};
    rep.final_residual = r;
    rep.converged = r <= options.tol;
    rep.damping = 1.0;
    rep.tolerance = options.tol;
    rep.recheck_residual = r;
    rep.measure_independent = true;
    rep.total_variation = total_variation(result.flow.means);
    return result;
  }

  MeasureFlow work = init_flow;
  MeasureFlow last;
  auto psi = [&](const std::vector<Vec>& means) {
    work.means = means;
    last = best_response_flow(coeffs, grid, work, options.response).flow;
    return last.means;
  };
  FixedPointReport report;
  std::vector<Vec> means =
      damped_picard(psi, init_flow.means, options.damping, options.tol, options.max_iter, report);
  result.flow = last;
  result.flow.means = std::move(means);
  result.response = best_response_flow(coeffs, grid, result.flow, options.response);
  report.recheck_residual = sup_diff(result.response.flow.means, result.flow.means);
  report.total_variation = total_variation(result.flow.means);
  result.report = std::move(report);
  return result;
}

ConsistencyCheck mckean_vlasov_check(const CoefficientSet& coeffs, const TimeGrid& grid,
                                     const Feedback& feedback, const MeasureFlow& mflow,
                                     std::size_t n_particles, std::uint64_t seed,
                                     const SimulationOptions& simulation) {
  ResponseOptions opts;
  opts.seed = seed;
  opts.simulation = simulation;
  if (enumerable(coeffs)) {
    opts.mode = ResponseMode::enumeration;
  } else {
    require(n_particles >= 1000, ErrorKind::precondition,
            "mckean_vlasov_check needs at least 1000 particles");
    opts.mode = ResponseMode::monte_carlo;
    opts.n_particles = n_particles;
  }
  const Population pop = run_population(coeffs, grid, feedback, mflow, opts);
  ConsistencyCheck out;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const std::size_t count = pop.tally.alive_count[j];
    if (count == 0 || !(pop.tally.alive[j] > 0.0)) {
      out.extinct = true;
      break;
    }
    const Vec mean = pop.tally.sum_w[j] / pop.tally.alive[j];
    out.distance = std::max(out.distance, (mean - mflow.means[j]).norm());
    if (opts.mode == ResponseMode::monte_carlo) {
      const double second = pop.tally.sum_w2[j] / pop.tally.alive[j];
      const double var = std::max(0.0, second - mean.squaredNorm());
      out.standard_error =
          std::max(out.standard_error, std::sqrt(var / static_cast<double>(count)));
    }
    out.prefix_length = j + 1;
  }
  return out;
}

nlohmann::json FixedPointReport::to_json() const {
  nlohmann::json res = nlohmann::json::array();
  for (double r : residuals) res.push_back(io::real_to_json(r));
  return {{"iterations", iterations},
          {"residuals", res},
          {"final_residual", io::real_to_json(final_residual)},
          {"converged", converged},
          {"damping", io::real_to_json(damping)},
          {"tolerance", io::real_to_json(tolerance)},
          {"recheck_residual", io::real_to_json(recheck_residual)},
          {"total_variation", io::real_to_json(total_variation)},
          {"measure_independent", measure_independent}};
}

void write_flow_csv(std::ostream& out, const MeasureFlow& flow) {
  out << "t,survival";
  for (int a = 0; a < flow.mean_dim(); ++a) out << ",mean_" << a + 1;
  out << '\n';
  for (std::size_t j = 0; j < flow.means.size(); ++j) {
    out << io::format_real(flow.grid.times[j]) << ',' << io::format_real(flow.survival[j]);
    for (int a = 0; a < flow.mean_dim(); ++a) out << ',' << io::format_real(flow.means[j][a]);
    out << '\n';
  }
}

}  // namespace mfga
