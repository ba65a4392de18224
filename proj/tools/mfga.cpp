#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mfga/cli.hpp"
#include "mfga/error.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string model, output, mode, ladder;
  std::uint64_t seed = 0;
  std::size_t n_steps = 0, nodes = 0, max_iter = 0, particles = 0, replications = 0, bins = 0;
  std::size_t reference_particles = 0, probes = 0;
  double damping = 0.0, tol = 0.0;
  bool bridge = false;
};

void add_options(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config_path, "run configuration (JSON)");
  app.add_option("-m,--model", o.model, "model descriptor (JSON)");
  app.add_option("-o,--output", o.output, "output directory");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--n-steps", o.n_steps, "time steps");
  app.add_option("--nodes", o.nodes, "space nodes per axis");
  app.add_option("--damping", o.damping, "Picard damping in (0,1]");
  app.add_option("--tol", o.tol, "fixed-point tolerance");
  app.add_option("--max-iter", o.max_iter, "fixed-point iteration cap");
  app.add_option("--mode", o.mode, "pde | monte_carlo | enumeration");
  app.add_option("--particles", o.particles, "particles per Monte Carlo flow");
  app.add_option("--bins", o.bins, "histogram bins per axis");
  app.add_option("--N-ladder", o.ladder, "comma-separated player counts");
  app.add_option("--replications", o.replications, "independent replications");
  app.add_option("--reference-particles", o.reference_particles, "reference Monte Carlo size");
  app.add_option("--probes", o.probes, "validation probes");
  app.add_flag("--bridge", o.bridge, "Brownian-bridge exit correction");
}

mfga::cli::RunConfig build_config(const CLI::App& sub, const Overrides& o) {
  mfga::cli::RunConfig c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    mfga::require(static_cast<bool>(in), mfga::ErrorKind::configuration,
                  "cannot open config " + o.config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      mfga::fail(mfga::ErrorKind::configuration, std::string("config is not JSON: ") + e.what());
    }
    c = mfga::cli::RunConfig::from_json(
        j, std::filesystem::path(o.config_path).parent_path().string());
  }
  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--model")) c.model = o.model;
  if (given("--output")) c.output_dir = o.output;
  if (given("--seed")) c.master_seed = o.seed;
  if (given("--n-steps")) c.n_steps = o.n_steps;
  if (given("--nodes")) c.nodes = o.nodes;
  if (given("--damping")) c.damping = o.damping;
  if (given("--tol")) c.tol = o.tol;
  if (given("--max-iter")) c.max_iter = o.max_iter;
  if (given("--mode")) c.mode = o.mode;
  if (given("--particles")) c.n_particles = o.particles;
  if (given("--bins")) c.histogram_bins = o.bins;
  if (given("--N-ladder")) c.ladder = mfga::cli::parse_ladder(o.ladder);
  if (given("--replications")) c.replications = o.replications;
  if (given("--reference-particles")) c.reference_particles = o.reference_particles;
  if (given("--probes")) c.probes = o.probes;
  if (given("--bridge")) c.bridge_correction = o.bridge;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{fmt::format("mean field game toolkit {}", mfga::cli::kVersion)};
  app.require_subcommand(1);
  app.set_version_flag("--version", mfga::cli::kVersion);
  Overrides o;
  for (const auto& verb : mfga::cli::verbs()) add_options(*app.add_subcommand(verb), o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const CLI::App* sub = app.get_subcommands().front();
  mfga::cli::RunConfig config;
  try {
    config = build_config(*sub, o);
  } catch (const mfga::Error& e) {
    std::cerr << nlohmann::json{{"error", {{"verb", sub->get_name()},
                                           {"kind", mfga::to_string(e.kind())},
                                           {"message", e.what()}}}}
                     .dump()
              << '\n';
    return 2;
  }
  const auto result = mfga::cli::run(sub->get_name(), config, std::cerr);
  if (result.exit_code == 0) {
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << result.summary.dump(2) << '\n';
  }
  return result.exit_code;
}
