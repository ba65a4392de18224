#include "mfga/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "mfga/error.hpp"
#include "mfga/json_io.hpp"
#include "mfga/parallel.hpp"

namespace mfga {

MeanSe mean_and_se(const std::vector<double>& samples) {
  MeanSe out;
  const std::size_t n = samples.size();
  if (n == 0) return out;
  const double sum = pairwise_sum<double>(0, n, [&](std::size_t i) { return samples[i]; }, 0.0);
  out.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double ss = pairwise_sum<double>(
        0, n, [&](std::size_t i) { return (samples[i] - out.mean) * (samples[i] - out.mean); },
        0.0);
    out.se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nash gap

NashGapRow estimate_nash_gap(const CoefficientSet& coeffs, const TimeGrid& grid,
                             std::shared_ptr<const Feedback> equilibrium,
                             std::shared_ptr<const Feedback> deviation, std::size_t N,
                             std::size_t replications, std::uint64_t seed,
                             const NashGapOptions& options) {
  require(replications >= 2, ErrorKind::precondition, "need at least two replications");
  const StrategyProfile eq = StrategyProfile::symmetric(equilibrium);
  const StrategyProfile dev = StrategyProfile::with_deviation(equilibrium, deviation);
  NashGapRow row;
  row.N = N;
  row.replications = replications;
  row.equilibrium_samples.assign(replications, 0.0);
  row.deviation_samples.assign(replications, 0.0);
  WorkerPool pool(options.threads);
  pool.parallel_for(replications, [&](std::size_t r) {
    NPlayerOptions npo;
    npo.replication = static_cast<std::uint32_t>(r);
    npo.simulation = options.simulation;
    const Ensemble a = simulate_nplayer(coeffs, grid, eq, N, seed, npo);
    row.equilibrium_samples[r] = cost_J(a, coeffs, 0);
    const Ensemble b = simulate_nplayer(coeffs, grid, dev, N, seed, npo);
    row.deviation_samples[r] = cost_J(b, coeffs, 0);
  });
  std::vector<double> diff(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    diff[r] = row.equilibrium_samples[r] - row.deviation_samples[r];
  }
  row.cost_equilibrium = mean_and_se(row.equilibrium_samples);
  row.cost_deviation = mean_and_se(row.deviation_samples);
  row.gap = mean_and_se(diff);
  return row;
}

std::shared_ptr<const ValueField> limit_best_response(const CoefficientSet& coeffs,
                                                      const TimeGrid& grid,
                                                      const MeasureFlow& flow, std::size_t N,
                                                      std::size_t nodes, const HjbOptions& hjb) {
  require(N >= 1, ErrorKind::precondition, "N must be positive");
  const SpaceGrid space = SpaceGrid::for_box(coeffs.domain, nodes);
  HjbOptions opts = hjb;
  const double others = static_cast<double>(N - 1);
  opts.perceived_mean = [&coeffs, &flow, others](std::size_t j, const Vec& x) -> Vec {
    const double p = others * flow.survival[j];
    return (coeffs.integrand_w.eval(x) + p * flow.means[j]) / (1.0 + p);
  };
  return std::make_shared<const ValueField>(solve_hjb(coeffs, grid, space, flow, opts));
}

nlohmann::json NashGapReport::to_json() const {
  nlohmann::json out;
  out["seed"] = seed;
  out["note"] = note;
  auto ms = [](const MeanSe& m) {
    return nlohmann::json{{"mean", io::real_to_json(m.mean)}, {"se", io::real_to_json(m.se)}};
  };
  out["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    out["rows"].push_back({{"N", r.N},
                           {"replications", r.replications},
                           {"cost_equilibrium", ms(r.cost_equilibrium)},
                           {"cost_deviation", ms(r.cost_deviation)},
                           {"gap", ms(r.gap)}});
  }
  return out;
}

void NashGapReport::write_csv(std::ostream& out) const {
  out << "N,replication,cost_equilibrium,cost_deviation,difference\n";
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.replications; ++k) {
      out << r.N << ',' << k << ',' << io::format_real(r.equilibrium_samples[k]) << ','
          << io::format_real(r.deviation_samples[k]) << ','
          << io::format_real(r.equilibrium_samples[k] - r.deviation_samples[k]) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Propagation of chaos

Dictionary Dictionary::standard(const CoefficientSet& coeffs, std::size_t n_ridge,
                                std::uint64_t seed) {
  Dictionary dict;
  dict.seed = seed;
  const int d = coeffs.dim_d;
  for (int a = 0; a < d; ++a) {
    dict.names.push_back(fmt::format("x{}", a + 1));
    dict.functions.push_back([a](const Vec& x) { return x[a]; });
  }
  for (int a = 0; a < coeffs.dim_d0; ++a) {
    dict.names.push_back(fmt::format("w{}", a + 1));
    const auto w = coeffs.integrand_w.eval;
    dict.functions.push_back([w, a](const Vec& x) { return w(x)[a]; });
  }
  const Vec lo = coeffs.domain.bound_lower();
  const Vec hi = coeffs.domain.bound_upper();
  for (std::size_t k = 0; k < n_ridge; ++k) {
    const NoiseStream stream(seed, {0, static_cast<std::uint32_t>(k)});
    Vec theta(d);
    stream.normals(0, d, theta, DrawPurpose::auxiliary);
    theta.normalize();
    Vec z(d);
    for (int a = 0; a < d; ++a) {
      z[a] = lo[a] + (hi[a] - lo[a]) * stream.uniform(1, DrawPurpose::auxiliary, a);
    }
    const double b = theta.dot(z);
    dict.names.push_back(fmt::format("ridge{}", k));
    dict.functions.push_back([theta, b](const Vec& x) { return std::tanh(theta.dot(x) - b); });
  }
  return dict;
}

Dictionary Dictionary::subset(const std::vector<std::size_t>& keep) const {
  Dictionary out;
  out.seed = seed;
  for (std::size_t k : keep) {
    require(k < size(), ErrorKind::precondition, "dictionary index out of range");
    out.names.push_back(names[k]);
    out.functions.push_back(functions[k]);
  }
  return out;
}

nlohmann::json Dictionary::to_json() const { return {{"functions", names}, {"seed", seed}}; }

MeasureFlow empirical_flow(const Ensemble& ensemble, const CoefficientSet& coeffs) {
  MeasureFlow flow;
  flow.grid = ensemble.grid;
  const std::size_t slices = ensemble.grid.size();
  flow.survival.resize(slices);
  flow.means = ensemble.conditional_means;
  flow.histograms.emplace(slices);
  for (std::size_t j = 0; j < slices; ++j) {
    Histogram& h = (*flow.histograms)[j];
    for (const PathRecord& p : ensemble.paths) {
      if (!p.absorbed_by(j)) h.points.push_back(p.states[j]);
    }
    flow.survival[j] =
        static_cast<double>(h.points.size()) / static_cast<double>(ensemble.n_players);
    if (h.points.empty()) {
      h.points.push_back(Vec::Zero(coeffs.dim_d));
      h.weights.push_back(1.0);
    } else {
      h.weights.assign(h.points.size(), 1.0 / static_cast<double>(h.points.size()));
    }
  }
  return flow;
}

namespace {

// table[j][g] = <g, flow(t_j)>.
std::vector<std::vector<double>> expectations(const MeasureFlow& flow, const Dictionary& dict) {
  require(flow.histograms.has_value(), ErrorKind::precondition,
          "chaos distance needs flows with histograms");
  std::vector<std::vector<double>> table(flow.histograms->size(),
                                         std::vector<double>(dict.size(), 0.0));
  for (std::size_t j = 0; j < table.size(); ++j) {
    const Histogram& h = (*flow.histograms)[j];
    for (std::size_t g = 0; g < dict.size(); ++g) table[j][g] = h.expect(dict.functions[g]);
  }
  return table;
}

double table_distance(const std::vector<std::vector<double>>& a,
                      const std::vector<std::vector<double>>& b) {
  require(a.size() == b.size(), ErrorKind::precondition, "flows live on different grids");
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t g = 0; g < a[j].size(); ++g) d = std::max(d, std::abs(a[j][g] - b[j][g]));
  }
  return d;
}

}  // namespace

double chaos_distance(const MeasureFlow& a, const MeasureFlow& b, const Dictionary& dictionary) {
  return table_distance(expectations(a, dictionary), expectations(b, dictionary));
}

double chaos_distance(const Ensemble& ensemble, const CoefficientSet& coeffs,
                      const MeasureFlow& mflow, const Dictionary& dictionary) {
  return chaos_distance(empirical_flow(ensemble, coeffs), mflow, dictionary);
}

double ChaosReport::scaling_spread() const {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < N_ladder.size(); ++k) {
    const double s = distances[k].mean * std::sqrt(static_cast<double>(N_ladder[k]));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

nlohmann::json ChaosReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < N_ladder.size(); ++k) {
    rows.push_back({{"N", N_ladder[k]},
                    {"distance", io::real_to_json(distances[k].mean)},
                    {"distance_se", io::real_to_json(distances[k].se)},
                    {"survival_gap", io::real_to_json(survival_gap[k].mean)},
                    {"survival_gap_se", io::real_to_json(survival_gap[k].se)}});
  }
  return {{"replications", replications},
          {"rows", rows},
          {"scaling_spread", io::real_to_json(scaling_spread())},
          {"dictionary", dictionary}};
}

void ChaosReport::write_csv(std::ostream& out) const {
  out << "N,replication,distance,survival_gap\n";
  for (std::size_t k = 0; k < N_ladder.size(); ++k) {
    for (std::size_t r = 0; r < distance_samples[k].size(); ++r) {
      out << N_ladder[k] << ',' << r << ',' << io::format_real(distance_samples[k][r]) << ','
          << io::format_real(survival_gap_samples[k][r]) << '\n';
    }
  }
}

ChaosReport chaos_study(const CoefficientSet& coeffs, const TimeGrid& grid,
                        std::shared_ptr<const Feedback> feedback, const MeasureFlow& reference,
                        const std::vector<std::size_t>& ladder, std::size_t replications,
                        std::uint64_t seed, const Dictionary& dictionary,
                        const SimulationOptions& simulation) {
  require(reference.means.size() == grid.size(), ErrorKind::precondition,
          "reference flow is not defined on the grid");
  require(replications >= 1, ErrorKind::precondition, "need at least one replication");
  const auto ref = expectations(reference, dictionary);
  const StrategyProfile profile = StrategyProfile::symmetric(std::move(feedback));
  ChaosReport report;
  report.N_ladder = ladder;
  report.replications = replications;
  report.dictionary = dictionary.to_json();
  WorkerPool pool;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    std::vector<double> dist(replications), surv(replications);
    pool.parallel_for(replications, [&](std::size_t r) {
      NPlayerOptions npo;
      npo.replication = static_cast<std::uint32_t>(r);
      npo.simulation = simulation;
      // Distinct seeds per ladder rung keep the rungs independent.
      const Ensemble e = simulate_nplayer(coeffs, grid, profile, ladder[k],
                                          derive_seed(seed, ladder[k]), npo);
      dist[r] = table_distance(expectations(empirical_flow(e, coeffs), dictionary), ref);
      double gap = 0.0;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const double frac =
            static_cast<double>(e.survivor_counts[j]) / static_cast<double>(ladder[k]);
        gap = std::max(gap, std::abs(frac - reference.survival[j]));
      }
      surv[r] = gap;
    });
    report.distances.push_back(mean_and_se(dist));
    report.survival_gap.push_back(mean_and_se(surv));
    report.distance_samples.push_back(std::move(dist));
    report.survival_gap_samples.push_back(std::move(surv));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Survival lower bound

nlohmann::json SurvivalBoundCheck::to_json() const {
  return {{"observed", io::real_to_json(observed)},
          {"standard_error", io::real_to_json(standard_error)},
          {"c_ball", io::real_to_json(c_ball)},
          {"bound", io::real_to_json(bound)},
          {"pass", pass},
          {"degenerate", degenerate},
          {"verdict", verdict}};
}

SurvivalBoundCheck survival_lower_bound_check(const Ensemble& ensemble,
                                              const CoefficientSet& coeffs,
                                              std::size_t driftless_paths, std::uint64_t seed) {
  SurvivalBoundCheck out;
  const std::size_t n = ensemble.grid.n_steps;
  out.observed = static_cast<double>(ensemble.survivor_counts[n]) /
                 static_cast<double>(ensemble.n_players);
  out.standard_error =
      std::sqrt(out.observed * (1.0 - out.observed) / static_cast<double>(ensemble.n_players));
  if (coeffs.sigma_degenerate()) {
    out.degenerate = true;
    out.pass = true;
    out.verdict = "degenerate: sigma is singular, the survival lower bound does not apply";
    return out;
  }
  require(driftless_paths >= 1, ErrorKind::precondition, "need driftless paths");
  const TimeGrid& grid = ensemble.grid;
  const double sqdt = std::sqrt(grid.dt);
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (driftless_paths + kBlock - 1) / kBlock;
  std::vector<std::size_t> survivors(blocks, 0);
  WorkerPool pool;
  pool.parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(driftless_paths, (b + 1) * kBlock);
    Vec xi(coeffs.dim_d);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const NoiseStream noise(seed, {0, static_cast<std::uint32_t>(i)});
      Vec x = coeffs.initial_law.sample(noise, coeffs.domain);
      bool alive = coeffs.domain.contains(x);
      for (std::size_t j = 0; j < n && alive; ++j) {
        noise.normals(static_cast<std::uint32_t>(j), coeffs.dim_d, xi);
        x += sqdt * (coeffs.sigma * xi);
        alive = coeffs.domain.contains(x);
      }
      if (alive) ++survivors[b];
    }
  });
  std::size_t total = 0;
  for (std::size_t s : survivors) total += s;
  const double p = static_cast<double>(total) / static_cast<double>(driftless_paths);
  out.c_ball = p * p;
  const double k_tot = coeffs.action_space.max_norm() + coeffs.bound_K;
  const double inv = coeffs.sigma_inverse_norm();
  out.bound = out.c_ball * std::exp(-grid.horizon * k_tot * k_tot * inv * inv);
  out.pass = out.observed >= out.bound - 3.0 * out.standard_error;
  out.verdict = out.pass ? "pass" : "fail";
  return out;
}

}  // namespace mfga
