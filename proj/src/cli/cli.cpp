#include "mfga/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "mfga/analysis.hpp"
#include "mfga/counterexample.hpp"
#include "mfga/error.hpp"
#include "mfga/hjb_kfp.hpp"
#include "mfga/json_io.hpp"
#include "mfga/mfg.hpp"
#include "mfga/nplayer.hpp"

namespace mfga::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::numeric, "SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void write_atomic(const std::string& path, std::string_view content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::precondition, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    require(static_cast<bool>(out), ErrorKind::precondition, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::vector<std::size_t> parse_ladder(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == item.size() && v > 0, ErrorKind::configuration,
            "ladder entry '" + item + "' is not a positive integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// RunConfig

RunConfig RunConfig::from_json(const json& j, const std::string& base_dir) {
  require(j.is_object(), ErrorKind::configuration, "run config must be a JSON object");
  RunConfig c;
  static const std::vector<std::string> known{
      "model",  "output_dir", "master_seed",  "n_steps",    "nodes",         "damping",
      "tol",    "max_iter",   "mode",         "n_particles", "histogram_bins", "ladder",
      "replications", "bridge_correction", "init_mean", "n_ridge", "reference_particles",
      "probes"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    require(std::find(known.begin(), known.end(), key) != known.end(), ErrorKind::configuration,
            "unknown run config key '" + key + "'");
  }
  try {
    if (j.contains("model")) {
      fs::path p = j.at("model").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
      c.model = p.lexically_normal().string();
    }
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("n_steps")) c.n_steps = j.at("n_steps").get<std::size_t>();
    if (j.contains("nodes")) c.nodes = j.at("nodes").get<std::size_t>();
    if (j.contains("damping")) c.damping = io::real_from_json(j.at("damping"));
    if (j.contains("tol")) c.tol = io::real_from_json(j.at("tol"));
    if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<std::size_t>();
    if (j.contains("mode")) c.mode = j.at("mode").get<std::string>();
    if (j.contains("n_particles")) c.n_particles = j.at("n_particles").get<std::size_t>();
    if (j.contains("histogram_bins")) c.histogram_bins = j.at("histogram_bins").get<std::size_t>();
    if (j.contains("ladder")) c.ladder = j.at("ladder").get<std::vector<std::size_t>>();
    if (j.contains("replications")) c.replications = j.at("replications").get<std::size_t>();
    if (j.contains("bridge_correction")) c.bridge_correction = j.at("bridge_correction").get<bool>();
    if (j.contains("init_mean")) {
      for (const auto& v : j.at("init_mean")) c.init_mean.push_back(io::real_from_json(v));
    }
    if (j.contains("n_ridge")) c.n_ridge = j.at("n_ridge").get<std::size_t>();
    if (j.contains("reference_particles")) {
      c.reference_particles = j.at("reference_particles").get<std::size_t>();
    }
    if (j.contains("probes")) c.probes = j.at("probes").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(ErrorKind::configuration, std::string("run config: ") + e.what());
  }
  return c;
}

json RunConfig::to_json() const {
  json init = json::array();
  for (double v : init_mean) init.push_back(io::real_to_json(v));
  return {{"model", model},
          {"output_dir", output_dir},
          {"master_seed", master_seed},
          {"n_steps", n_steps},
          {"nodes", nodes},
          {"damping", io::real_to_json(damping)},
          {"tol", io::real_to_json(tol)},
          {"max_iter", max_iter},
          {"mode", mode},
          {"n_particles", n_particles},
          {"histogram_bins", histogram_bins},
          {"ladder", ladder},
          {"replications", replications},
          {"bridge_correction", bridge_correction},
          {"init_mean", init},
          {"n_ridge", n_ridge},
          {"reference_particles", reference_particles},
          {"probes", probes}};
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("output_dir");
  return sha256_hex(j.dump());
}

void RunConfig::validate(const std::string& verb) const {
  require(std::find(verbs().begin(), verbs().end(), verb) != verbs().end(),
          ErrorKind::configuration, "unknown verb '" + verb + "'");
  if (verb != "counterexample") {
    require(!model.empty(), ErrorKind::configuration, verb + " needs a model descriptor");
  }
  if (!model.empty()) {
    require(fs::exists(model), ErrorKind::configuration, "model file not found: " + model);
  }
  require(n_steps >= 1, ErrorKind::configuration, "n_steps must be positive");
  require(nodes >= 3, ErrorKind::configuration, "nodes must be at least 3");
  require(damping > 0.0 && damping <= 1.0, ErrorKind::configuration, "damping must lie in (0,1]");
  require(tol > 0.0, ErrorKind::configuration, "tol must be positive");
  require(max_iter >= 1, ErrorKind::configuration, "max_iter must be positive");
  require(mode == "pde" || mode == "monte_carlo" || mode == "enumeration",
          ErrorKind::configuration, "mode must be pde, monte_carlo or enumeration");
  for (std::size_t k = 1; k < ladder.size(); ++k) {
    require(ladder[k] > ladder[k - 1], ErrorKind::configuration,
            "ladder must be strictly increasing");
  }
  require(replications >= 1, ErrorKind::configuration, "replications must be positive");
  if (verb == "nash-gap") {
    require(replications >= 30, ErrorKind::configuration, "nash-gap needs at least 30 replications");
  }
  require(output_dir != "", ErrorKind::configuration, "output_dir must not be empty");
}

// ---------------------------------------------------------------------------
// Artifacts

namespace {

class Artifacts {
 public:
  Artifacts(const RunConfig& config, std::string verb)
      : config_(config), verb_(std::move(verb)), hash_(config.hash()) {}

  std::string provenance_line() const {
    return fmt::format("# provenance master_seed={} config_hash={} version={}\n",
                       config_.master_seed, hash_, kVersion);
  }
  json provenance() const {
    return {{"master_seed", config_.master_seed}, {"config_hash", hash_}, {"version", kVersion}};
  }

  void csv(const std::string& name, const std::string& body) { put(name, provenance_line() + body); }
  void json_file(const std::string& name, json j) {
    j["provenance"] = provenance();
    put(name, j.dump(2) + "\n");
  }
  void binary(const std::string& name, const std::string& body) { put(name, body); }

  void manifest(const json& summary, const std::vector<std::string>& warnings, double seconds,
                const std::string& status) {
    json m;
    m["version"] = kVersion;
    m["verb"] = verb_;
    m["config"] = config_.to_json();
    m["config_hash"] = hash_;
    m["master_seed"] = config_.master_seed;
    m["files"] = files_;
    m["timings"] = {{"total_seconds", seconds}};
    m["warnings"] = warnings;
    m["status"] = status;
    m["summary"] = summary;
    write_atomic((fs::path(config_.output_dir) / "manifest.json").string(), m.dump(2) + "\n");
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& f : files_) out.push_back(f.at("name").get<std::string>());
    return out;
  }

 private:
  void put(const std::string& name, const std::string& content) {
    write_atomic((fs::path(config_.output_dir) / name).string(), content);
    files_.push_back({{"name", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }

  const RunConfig& config_;
  std::string verb_;
  std::string hash_;
  json files_ = json::array();
};

bool is_ce7(const CoefficientSet& c) { return c.domain.kind() == DomainKind::counterexample; }

CoefficientSet model_of(const RunConfig& config) {
  if (config.model.empty()) return ce7::coefficients();
  return load_model(config.model);
}

ResponseMode mode_of(const std::string& m) {
  if (m == "monte_carlo") return ResponseMode::monte_carlo;
  if (m == "enumeration") return ResponseMode::enumeration;
  return ResponseMode::pde;
}

ResponseOptions response_options(const RunConfig& config, const CoefficientSet& coeffs) {
  ResponseOptions o;
  o.mode = mode_of(config.mode);
  o.nodes = config.nodes;
  o.n_particles = config.n_particles;
  o.seed = derive_seed(config.master_seed, 1);
  o.histogram_bins = o.mode == ResponseMode::monte_carlo ? config.histogram_bins : 0;
  o.simulation.bridge_correction = config.bridge_correction;
  if (is_ce7(coeffs)) {
    // No PDE grid in three dimensions: the strategy is the explicit u*.
    o.fixed_feedback = std::make_shared<CounterexampleFeedback>();
    o.mode = ResponseMode::enumeration;
  }
  return o;
}

MeasureFlow initial_flow(const RunConfig& config, const CoefficientSet& coeffs,
                         const TimeGrid& grid) {
  Vec mean = coeffs.integrand_w.eval(Vec::Zero(coeffs.dim_d));
  if (!config.init_mean.empty()) {
    require(static_cast<int>(config.init_mean.size()) == coeffs.dim_d0, ErrorKind::configuration,
            "init_mean must have d0 entries");
    for (int a = 0; a < coeffs.dim_d0; ++a) mean[a] = config.init_mean[a];
  }
  return MeasureFlow::constant(grid, mean);
}

std::string to_csv(const MeasureFlow& flow) {
  std::ostringstream s;
  write_flow_csv(s, flow);
  return s.str();
}

template <class Field>
std::string binary_of(const Field& f) {
  std::ostringstream s(std::ios::binary);
  write_binary(s, f);
  return s.str();
}

template <class Field>
std::string csv_of(const Field& f) {
  std::ostringstream s;
  write_csv(s, f);
  return s.str();
}

struct Context {
  const RunConfig& config;
  Artifacts& out;
  std::vector<std::string>& warnings;
  json& summary;
};

FixedPointResult equilibrium(const Context& ctx, const CoefficientSet& coeffs,
                             const TimeGrid& grid) {
  FixedPointOptions fo;
  fo.damping = ctx.config.damping;
  fo.tol = ctx.config.tol;
  fo.max_iter = ctx.config.max_iter;
  fo.response = response_options(ctx.config, coeffs);
  FixedPointResult r = solve_fixed_point(coeffs, grid, initial_flow(ctx.config, coeffs, grid), fo);
  if (!r.report.converged) ctx.warnings.push_back("fixed point did not converge");
  return r;
}

void verb_solve_mfg(const Context& ctx) {
  const CoefficientSet coeffs = model_of(ctx.config);
  const TimeGrid grid = TimeGrid::uniform(coeffs.horizon_T, ctx.config.n_steps);
  const FixedPointResult r = equilibrium(ctx, coeffs, grid);
  ctx.out.csv("flow.csv", to_csv(r.flow));
  json report = r.report.to_json();
  // Cost of the equilibrium strategy against its own flow (particles in pde mode).
  ResponseOptions co = response_options(ctx.config, coeffs);
  if (co.mode == ResponseMode::pde) co.mode = ResponseMode::monte_carlo;
  const CostEstimate cost = expected_cost(coeffs, grid, *r.response.feedback, r.flow, co);
  report["expected_cost"] = {{"mean", io::real_to_json(cost.mean)},
                             {"se", io::real_to_json(cost.standard_error)}};
  ctx.out.json_file("fixed_point_report.json", report);
  if (r.response.value) ctx.out.binary("value_field.bin", binary_of(*r.response.value));
  if (r.response.density) ctx.out.binary("density_field.bin", binary_of(*r.response.density));
  ctx.summary = report;
}

void verb_solve_pde(const Context& ctx) {
  const CoefficientSet coeffs = model_of(ctx.config);
  const TimeGrid grid = TimeGrid::uniform(coeffs.horizon_T, ctx.config.n_steps);
  const SpaceGrid space = SpaceGrid::for_box(coeffs.domain, ctx.config.nodes);
  const MeasureFlow flow = initial_flow(ctx.config, coeffs, grid);
  const ValueField value = solve_hjb(coeffs, grid, space, flow);
  const auto init = initial_density(coeffs.initial_law, space);
  const DensityField density = solve_kfp(coeffs, grid, space, value, init, flow);
  ctx.out.csv("value.csv", csv_of(value));
  ctx.out.csv("density.csv", csv_of(density));
  ctx.out.binary("value_field.bin", binary_of(value));
  ctx.out.binary("density_field.bin", binary_of(density));
  ctx.summary["final_mass"] = io::real_to_json(density.masses.back());
  try {
    const MeasureFlow out = renormalize(density, coeffs);
    ctx.out.csv("flow.csv", to_csv(out));
  } catch (const ExtinctionError& e) {
    ctx.warnings.push_back(e.what());
  }
}

void verb_simulate_nplayer(const Context& ctx) {
  const CoefficientSet coeffs = model_of(ctx.config);
  const TimeGrid grid = TimeGrid::uniform(coeffs.horizon_T, ctx.config.n_steps);
  StrategyProfile profile = StrategyProfile::counterexample();
  if (!is_ce7(coeffs)) {
    profile = StrategyProfile::symmetric(equilibrium(ctx, coeffs, grid).response.feedback);
  }
  const std::vector<std::size_t> ladder =
      ctx.config.ladder.empty() ? std::vector<std::size_t>{50} : ctx.config.ladder;
  NPlayerOptions npo;
  npo.simulation.bridge_correction = ctx.config.bridge_correction;
  const std::uint64_t seed = derive_seed(ctx.config.master_seed, 2);
  json checks = json::array();
  for (std::size_t N : ladder) {
    std::ostringstream summary, costs;
    summary << "replication,t,survivor_count";
    for (int a = 0; a < coeffs.dim_d0; ++a) summary << ",mean_" << a + 1;
    summary << '\n';
    costs << "replication,player,cost,absorption_time\n";
    for (std::size_t r = 0; r < ctx.config.replications; ++r) {
      npo.replication = static_cast<std::uint32_t>(r);
      const Ensemble e = simulate_nplayer(coeffs, grid, profile, N, seed, npo);
      for (std::size_t j = 0; j < grid.size(); ++j) {
        summary << r << ',' << io::format_real(grid.times[j]) << ',' << e.survivor_counts[j];
        for (int a = 0; a < coeffs.dim_d0; ++a) {
          summary << ',' << io::format_real(e.conditional_means[j][a]);
        }
        summary << '\n';
      }
      for (std::size_t i = 0; i < N; ++i) {
        const auto& p = e.paths[i];
        costs << r << ',' << i << ',' << io::format_real(cost_J(e, coeffs, i)) << ','
              << (p.absorption_index ? io::format_real(grid.times[*p.absorption_index]) : "NA")
              << '\n';
      }
      if (r == 0) {
        json c = survival_lower_bound_check(e, coeffs, ctx.config.reference_particles,
                                            derive_seed(ctx.config.master_seed, 3))
                     .to_json();
        c["N"] = N;
        checks.push_back(c);
      }
    }
    ctx.out.csv(fmt::format("ensemble_N{}.csv", N), summary.str());
    ctx.out.csv(fmt::format("costs_N{}.csv", N), costs.str());
  }
  ctx.out.json_file("survival_check.json", {{"checks", checks}});
  ctx.summary = {{"survival_checks", checks}};
}

void verb_nash_gap(const Context& ctx) {
  const CoefficientSet coeffs = model_of(ctx.config);
  const TimeGrid grid = TimeGrid::uniform(coeffs.horizon_T, ctx.config.n_steps);
  NashGapOptions no;
  no.simulation.bridge_correction = ctx.config.bridge_correction;
  NashGapReport report;
  report.seed = derive_seed(ctx.config.master_seed, 4);
  std::vector<std::size_t> ladder = ctx.config.ladder;
  if (is_ce7(coeffs)) {
    if (ladder.empty()) {
      for (std::size_t n = 3; n <= 99; n += 2) ladder.push_back(n);
    }
    const auto eq = std::make_shared<CounterexampleFeedback>();
    Vec dev(3);
    dev << -1.0, 0.0, 0.0;
    report.note =
        "deviation: constant action (-1,0,0) against the u* profile; costs from simulation";
    for (std::size_t N : ladder) {
      report.rows.push_back(estimate_nash_gap(coeffs, grid, eq, constant_feedback(dev), N,
                                              ctx.config.replications,
                                              derive_seed(report.seed, N), no));
    }
  } else {
    if (ladder.empty()) ladder = {50, 200, 800};
    const FixedPointResult fp = equilibrium(ctx, coeffs, grid);
    report.note =
        "deviation: HJB best response to the limit flow including the deviator's own share of "
        "the empirical mean; the gap estimates epsilon(N) only up to this substitution and the "
        "discretization error of the grid solver";
    for (std::size_t N : ladder) {
      const auto vf = limit_best_response(coeffs, grid, fp.flow, N, ctx.config.nodes);
      report.rows.push_back(estimate_nash_gap(coeffs, grid, fp.response.feedback,
                                              std::make_shared<GridFeedback>(vf), N,
                                              ctx.config.replications,
                                              derive_seed(report.seed, N), no));
    }
  }
  std::ostringstream csv;
  report.write_csv(csv);
  ctx.out.csv("nash_gap.csv", csv.str());
  ctx.out.json_file("nash_gap.json", report.to_json());
  ctx.summary = report.to_json();
}

void verb_chaos_study(const Context& ctx) {
  const CoefficientSet coeffs = model_of(ctx.config);
  require(!is_ce7(coeffs), ErrorKind::configuration,
          "chaos-study needs a model with a PDE grid (box domain, d <= 2)");
  const TimeGrid grid = TimeGrid::uniform(coeffs.horizon_T, ctx.config.n_steps);
  const FixedPointResult fp = equilibrium(ctx, coeffs, grid);
  ResponseOptions ro = response_options(ctx.config, coeffs);
  ro.mode = ResponseMode::monte_carlo;
  ro.n_particles = ctx.config.reference_particles;
  ro.histogram_bins = ctx.config.histogram_bins;
  ro.seed = derive_seed(ctx.config.master_seed, 5);
  const MeasureFlow reference = sample_flow(coeffs, grid, *fp.response.feedback, fp.flow, ro);
  const Dictionary dict =
      Dictionary::standard(coeffs, ctx.config.n_ridge, derive_seed(ctx.config.master_seed, 6));
  const std::vector<std::size_t> ladder =
      ctx.config.ladder.empty() ? std::vector<std::size_t>{50, 200, 800} : ctx.config.ladder;
  SimulationOptions sim;
  sim.bridge_correction = ctx.config.bridge_correction;
  const ChaosReport report =
      chaos_study(coeffs, grid, fp.response.feedback, reference, ladder, ctx.config.replications,
                  derive_seed(ctx.config.master_seed, 7), dict, sim);
  std::ostringstream csv;
  report.write_csv(csv);
  ctx.out.csv("chaos.csv", csv.str());
  ctx.out.csv("reference_flow.csv", to_csv(reference));
  ctx.out.json_file("chaos.json", report.to_json());
  ctx.summary = report.to_json();
}

void verb_counterexample(const Context& ctx) {
  const std::vector<std::size_t> ladder =
      ctx.config.ladder.empty() ? std::vector<std::size_t>{3, 5, 7, 9} : ctx.config.ladder;
  std::ostringstream csv;
  csv << "N,cost_equilibrium,cost_equilibrium_decimal,cost_deviation,cost_deviation_decimal,"
         "gap,gap_decimal,exit_probability,exit_probability_decimal,enumeration_check\n";
  auto cell = [](const ce7::Rational& r) {
    return ce7::to_string(r) + "," + io::format_real(ce7::to_double(r));
  };
  json rows = json::array();
  for (std::size_t N : ladder) {
    const ce7::Rational exit = ce7::exit_probability(N);
    if (N % 2 == 1) {
      const ce7::Result r = ce7::exact_costs(N);
      std::string check = "skipped";
      if (N <= 9) {
        const ce7::Result b = ce7::enumerate_costs(N);
        check = b.cost_equilibrium == r.cost_equilibrium && b.cost_deviation == r.cost_deviation
                    ? "agree"
                    : "DISAGREE";
        if (check != "agree") ctx.warnings.push_back(fmt::format("enumeration mismatch at N={}", N));
      }
      csv << N << ',' << cell(r.cost_equilibrium) << ',' << cell(r.cost_deviation) << ','
          << cell(r.gap) << ',' << cell(exit) << ',' << check << '\n';
      rows.push_back({{"N", N},
                      {"cost_equilibrium", ce7::to_string(r.cost_equilibrium)},
                      {"cost_deviation", ce7::to_string(r.cost_deviation)},
                      {"gap", ce7::to_string(r.gap)},
                      {"exit_probability", ce7::to_string(exit)}});
    } else {
      csv << N << ",NA,NA,NA,NA,NA,NA," << cell(exit) << ",NA\n";
      rows.push_back({{"N", N}, {"exit_probability", ce7::to_string(exit)}});
    }
  }
  ctx.out.csv("counterexample.csv", csv.str());
  ctx.summary = {{"rows", rows}, {"limit_cost", ce7::to_string(ce7::limit_cost())}};
  ctx.out.json_file("counterexample.json", ctx.summary);
}

void verb_validate_model(const Context& ctx) {
  const CoefficientSet coeffs = model_of(ctx.config);
  const ValidationReport report =
      validate(coeffs, ctx.config.probes, derive_seed(ctx.config.master_seed, 8));
  ctx.out.json_file("validation.json", report.to_json());
  ctx.summary = report.to_json();
  if (!report.passed()) {
    std::string msg = "model validation failed:";
    for (const auto& v : report.violations) msg += " " + v + ";";
    fail(ErrorKind::precondition, msg);
  }
}

}  // namespace

RunResult run(const std::string& verb, const RunConfig& config, std::ostream& err) {
  RunResult result;
  auto report_error = [&](const std::string& kind, const std::string& message) {
    err << json{{"error", {{"verb", verb}, {"kind", kind}, {"message", message}}}}.dump() << '\n';
  };
  try {
    config.validate(verb);
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what());
    result.exit_code = 2;
    return result;
  }

  const auto start = std::chrono::steady_clock::now();
  Artifacts out(config, verb);
  json summary = json::object();
  Context ctx{config, out, result.warnings, summary};
  std::string status = "ok";
  try {
    if (verb == "solve-mfg") verb_solve_mfg(ctx);
    else if (verb == "solve-pde") verb_solve_pde(ctx);
    else if (verb == "simulate-nplayer") verb_simulate_nplayer(ctx);
    else if (verb == "nash-gap") verb_nash_gap(ctx);
    else if (verb == "chaos-study") verb_chaos_study(ctx);
    else if (verb == "counterexample") verb_counterexample(ctx);
    else verb_validate_model(ctx);
  } catch (const ExtinctionError& e) {
    result.warnings.push_back(e.what());
    summary["extinction"] = {{"first_index", e.first_index()}, {"mass", io::real_to_json(e.mass())}};
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what());
    result.exit_code = e.kind() == ErrorKind::configuration ? 2 : 1;
    status = "error";
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    result.exit_code = 1;
    status = "error";
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary["warning"] = !result.warnings.empty();
  out.manifest(summary, result.warnings, seconds, status);
  result.files = out.names();
  result.files.push_back("manifest.json");
  result.summary = std::move(summary);
  return result;
}

}  // namespace mfga::cli
