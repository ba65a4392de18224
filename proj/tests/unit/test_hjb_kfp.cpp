#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mfga/error.hpp"
#include "mfga/hjb_kfp.hpp"
#include "mfga/mfg.hpp"
#include "support.hpp"

using namespace mfga;
using mfga::test::vec;

namespace {

// Dense search over a 1D action interval; the oracle for the minimizer.
double grid_search(const std::function<double(double)>& h, double lo, double hi, int n) {
  double best = h(lo);
  for (int i = 1; i <= n; ++i) best = std::min(best, h(lo + (hi - lo) * i / n));
  return best;
}

CoefficientSet with(const char* base, const std::function<void(nlohmann::json&)>& edit) {
  auto j = test::model_json(base);
  edit(j);
  return coefficients_from_json(j);
}

bool density_invariants(const DensityField& d) {
  for (double m : d.densities) {
    if (m < -1e-12) return false;
  }
  for (std::size_t j = 1; j < d.masses.size(); ++j) {
    if (d.masses[j] > d.masses[j - 1] * (1 + 1e-12)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("hamiltonian_min: control-free cost picks the projection of 0") {
  const auto c = with("bm_interval", [](auto& j) {
    j["gamma_box"] = {{"lower", {"0.5"}}, {"upper", {"1"}}};
  });
  const auto h = hamiltonian_min(c, 0.0, vec({0}), vec({0}), vec({0}));
  CHECK(h.gamma == vec({0.5}));
  CHECK(h.value == doctest::Approx(1.0));
}

TEST_CASE("hamiltonian_min: quadratic cost gives clamp(-p/2)") {
  const auto c = test::model("coupled_1d");
  for (double p : {-3.0, -1.2, -0.4, 0.0, 0.7, 2.5}) {
    const Vec x = vec({0.3}), m = vec({0.1});
    const auto h = hamiltonian_min(c, 0.0, x, m, vec({p}));
    CHECK(h.gamma[0] == doctest::Approx(std::clamp(-p / 2, -1.0, 1.0)).epsilon(1e-12));
    const double oracle = grid_search(
        [&](double g) {
          return c.running_cost_f.eval(0.0, x, m, vec({g})) +
                 p * drift_full(c, 0.0, x, m, vec({g}))[0];
        },
        -1, 1, 200000);
    CHECK(h.value == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("hamiltonian_min: affine Hamiltonian is bang-bang") {
  const auto c = with("bm_interval", [](auto& j) {
    j["gamma_box"] = {{"lower", {"-1"}}, {"upper", {"1"}}};
  });
  CHECK(hamiltonian_min(c, 0.0, vec({0}), vec({0}), vec({0.3})).gamma == vec({-1}));
  CHECK(hamiltonian_min(c, 0.0, vec({0}), vec({0}), vec({-0.3})).gamma == vec({1}));
}

TEST_CASE("hamiltonian_min: separable convex and general costs against grid search") {
  auto edit = [](const char* f) {
    return [f](nlohmann::json& j) {
      j["dim_d"] = 2;
      j["sigma"] = nlohmann::json::parse(R"([["1","0"],["0","1"]])");
      j["gamma_box"] = {{"lower", {"-1", "-0.5"}}, {"upper", {"1", "2"}}};
      j["domain"] = {{"kind", "box"}, {"lower", {"-1", "-1"}}, {"upper", {"1", "1"}}};
      j["initial_law"] = {{"kind", "dirac"}, {"point", {"0", "0"}}};
      j["drift"] = {{"family", "zero"}};
      j["w"] = {{"family", "coordinate"}, {"params", {{"index", 0}}}};
      j["f"] = nlohmann::json::parse(f);
    };
  };
  const auto sep = with("bm_interval", edit(R"({"family":"power_control",
      "params":{"weight":"1","exponent":"1.5"}})"));
  const auto gen = with("bm_interval", edit(R"({"family":"oscillating_control",
      "params":{"amplitude":"0.5","frequency":"3"}})"));
  const Vec p = vec({0.8, -1.1});
  for (const auto* c : {&sep, &gen}) {
    MinimizerOptions opt;
    opt.grid_resolution = 201;
    const auto h = hamiltonian_min(*c, 0.0, vec({0, 0}), vec({0}), p, opt);
    double oracle = 1e300;
    for (int a = 0; a <= 400; ++a) {
      for (int b = 0; b <= 400; ++b) {
        const Vec g = vec({-1 + 2.0 * a / 400, -0.5 + 2.5 * b / 400});
        oracle = std::min(oracle, c->running_cost_f.eval(0, vec({0, 0}), vec({0}), g) + p.dot(g));
      }
    }
    CHECK(h.value <= oracle + 1e-3);
    CHECK(c->action_space.contains(h.gamma));
  }
  MinimizerOptions strict;
  strict.grid_fallback = false;
  CHECK_THROWS_AS(hamiltonian_min(gen, 0.0, vec({0, 0}), vec({0}), p, strict), Error);
}

TEST_CASE("solve_hjb: zero costs give V = 0 and the tie-break action") {
  const auto c = with("bm_interval", [](auto& j) {
    j["f"] = {{"family", "constant"}, {"params", {{"value", "0"}}}};
    j["gamma_box"] = {{"lower", {"-0.5"}}, {"upper", {"0.5"}}};
  });
  const auto grid = TimeGrid::uniform(1.0, 50);
  const auto space = SpaceGrid::for_box(c.domain, 41);
  const auto v = solve_hjb(c, grid, space, MeasureFlow::constant(grid, vec({0})));
  for (double x : v.values) CHECK(x == 0.0);
  for (double u : v.feedback) CHECK(u == 0.0);
}

TEST_CASE("solve_hjb: deterministic exit-time oracle") {
  // sigma = 0, f = 1, |gamma| <= 1: V(t,x) = min(T - t, 1 - |x|).
  const auto c = with("bm_interval", [](auto& j) {
    j["sigma"] = {{"0"}};
    j["gamma_box"] = {{"lower", {"-1"}}, {"upper", {"1"}}};
  });
  const auto grid = TimeGrid::uniform(1.0, 200);
  const auto space = SpaceGrid::for_box(c.domain, 101);
  const auto v = solve_hjb(c, grid, space, MeasureFlow::constant(grid, vec({0})));
  // First order away from the kinks of the oracle (|x| = t); next to them
  // the monotone scheme smears the corner over a few cells.
  const double tol = space.spacing[0] + grid.dt;
  for (std::size_t j : {0u, 100u}) {
    const double t = grid.times[j];
    for (std::size_t k = 0; k < space.size(); ++k) {
      const double x = space.point(k)[0];
      const double e = std::abs(v.value(j, k) - std::min(1.0 - t, 1.0 - std::abs(x)));
      if (std::abs(std::abs(x) - t) > 5 * space.spacing[0]) CHECK(e <= tol + 1e-12);
      CHECK(e <= 0.05);
    }
  }
  CHECK(v.value_at(0, vec({0})) == doctest::Approx(1.0));
  CHECK(v.control(0, space.index(80))[0] == 1.0);
  CHECK(v.control(0, space.index(20))[0] == -1.0);
}

TEST_CASE("solve_hjb: Brownian exit time against the eigenfunction series") {
  const auto c = test::model("bm_interval");
  const auto grid = TimeGrid::uniform(1.0, 250);
  const auto space = SpaceGrid::for_box(c.domain, 201);
  const auto v = solve_hjb(c, grid, space, MeasureFlow::constant(grid, vec({0})));
  CHECK(std::abs(v.value_at(0, vec({0})) - test::bm_expected_exit(1.0)) < 0.01);
}

TEST_CASE("solve_hjb: 2D square exit time against the product-law oracle") {
  const auto c = with("bm_interval", [](auto& j) {
    j["dim_d"] = 2;
    j["sigma"] = nlohmann::json::parse(R"([["1","0"],["0","1"]])");
    j["gamma_box"] = {{"lower", {"0", "0"}}, {"upper", {"0", "0"}}};
    j["domain"] = {{"kind", "box"}, {"lower", {"-1", "-1"}}, {"upper", {"1", "1"}}};
    j["initial_law"] = {{"kind", "dirac"}, {"point", {"0", "0"}}};
    j["w"] = {{"family", "coordinate"}, {"params", {{"index", 0}}}};
  });
  const auto grid = TimeGrid::uniform(1.0, 100);
  const auto space = SpaceGrid::for_box(c.domain, 41);
  const auto v = solve_hjb(c, grid, space, MeasureFlow::constant(grid, vec({0})));
  // E[tau ^ 1] = int_0^1 S(t)^2 dt, Simpson on 2000 panels.
  double oracle = 0.0;
  const int n = 2000;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    oracle += w * std::pow(test::bm_survival(double(i) / n), 2);
  }
  oracle /= 3.0 * n;
  CHECK(std::abs(v.value_at(0, vec({0, 0})) - oracle) < 0.02);
}

TEST_CASE("solve_hjb: boundary data, admissibility, positivity, comparison") {
  const auto c = test::model("coupled_1d");
  auto doubled = test::model_json("coupled_1d");
  doubled["f"]["params"] = {{"control", "2"}, {"state", "2"}};
  const auto c2 = coefficients_from_json(doubled);
  const auto grid = TimeGrid::uniform(1.0, 200);
  const auto space = SpaceGrid::for_box(c.domain, 101);
  const auto flow = MeasureFlow::constant(grid, vec({0.3}));
  const auto v = solve_hjb(c, grid, space, flow);
  const auto v2 = solve_hjb(c2, grid, space, flow);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (std::size_t k = 0; k < space.size(); ++k) {
      if (space.boundary(k) || j == grid.n_steps) CHECK(v.value(j, k) == 0.0);
      CHECK(v.value(j, k) >= 0.0);
      CHECK(v2.value(j, k) >= v.value(j, k));
      CHECK(c.action_space.contains(v.control(j, k), 0.0));
    }
  }
}

TEST_CASE("solve_hjb: CFL violation is a configuration error") {
  const auto c = test::model("coupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 10);
  const auto space = SpaceGrid::for_box(c.domain, 201);
  try {
    solve_hjb(c, grid, space, MeasureFlow::constant(grid, vec({0})));
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
  }
}

TEST_CASE("solve_kfp: uncontrolled mass matches the survival series") {
  const auto c = test::model("bm_interval");
  const auto grid = TimeGrid::uniform(1.0, 250);
  const auto space = SpaceGrid::for_box(c.domain, 201);
  const auto flow = MeasureFlow::constant(grid, vec({0}));
  const auto v = solve_hjb(c, grid, space, flow);
  const auto d = solve_kfp(c, grid, space, v, initial_density(c.initial_law, space), flow);
  CHECK(std::abs(d.masses[0] - 1.0) < 1e-10);
  for (std::size_t j : {50u, 125u, 250u}) {
    const double exact = test::bm_survival(grid.times[j]);
    CHECK(std::abs(d.masses[j] - exact) <= 0.02 * exact);
  }
  CHECK(density_invariants(d));
  for (std::size_t j = 1; j < grid.size(); ++j) {
    CHECK(d.density(j, 0) == 0.0);
    CHECK(d.density(j, space.size() - 1) == 0.0);
  }
}

TEST_CASE("solve_kfp: outward transport empties the domain; renormalize reports extinction") {
  const auto c = with("bm_interval", [](auto& j) {
    j["sigma"] = {{"0"}};
    j["gamma_box"] = {{"lower", {"-1"}}, {"upper", {"1"}}};
    j["horizon_T"] = "2";
    j["initial_law"] = {{"kind", "uniform_on_box"}, {"lower", {"-0.5"}}, {"upper", {"0.5"}}};
  });
  const auto grid = TimeGrid::uniform(2.0, 400);
  const auto space = SpaceGrid::for_box(c.domain, 201);
  const auto flow = MeasureFlow::constant(grid, vec({0}));
  auto v = solve_hjb(c, grid, space, flow);
  for (double& u : v.feedback) u = 1.0;  // everything drifts right at full speed
  const auto d = solve_kfp(c, grid, space, v, initial_density(c.initial_law, space), flow);
  CHECK(density_invariants(d));
  CHECK(d.masses[grid.index_at(0.2)] > 0.999);  // nothing has reached x = 1 yet
  CHECK(d.masses.back() < 1e-8);
  try {
    renormalize(d, c);
    FAIL("expected extinction");
  } catch (const ExtinctionError& e) {
    CHECK(e.first_index() > grid.index_at(1.0));
  }
}

TEST_CASE("solve_kfp: without boundary contact the mass is conserved") {
  const auto c = with("bm_interval", [](auto& j) {
    j["sigma"] = {{"0.2"}};
    j["domain"] = {{"kind", "box"}, {"lower", {"-10"}}, {"upper", {"10"}}};
    j["initial_law"] = {{"kind", "uniform_on_box"}, {"lower", {"-0.5"}}, {"upper", {"0.5"}}};
  });
  const auto grid = TimeGrid::uniform(1.0, 100);
  const auto space = SpaceGrid::for_box(c.domain, 401);
  const auto flow = MeasureFlow::constant(grid, vec({0}));
  const auto v = solve_hjb(c, grid, space, flow);
  const auto d = solve_kfp(c, grid, space, v, initial_density(c.initial_law, space), flow);
  for (double m : d.masses) CHECK(std::abs(m - 1.0) < 1e-8);
  const auto r = renormalize(d, c);
  for (std::size_t j = 0; j < grid.size(); ++j) CHECK(std::abs(r.means[j][0]) < 1e-12);
}

TEST_CASE("renormalize: symmetric law, odd integrand; half-interval oracle") {
  const auto c = test::model("coupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 200);
  const auto space = SpaceGrid::for_box(c.domain, 101);
  const auto flow = MeasureFlow::constant(grid, vec({0}));
  const auto v = solve_hjb(c, grid, space, flow);
  const auto d = solve_kfp(c, grid, space, v, initial_density(c.initial_law, space), flow);
  const auto r = renormalize(d, c);
  REQUIRE(r.histograms.has_value());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(std::abs(r.means[j][0]) < 1e-12);
    CHECK(r.survival[j] == d.masses[j]);
    CHECK(std::abs((*r.histograms)[j].total() - 1.0) < 1e-10);
  }

  const auto half = with("bm_interval", [](auto& j) {
    j["domain"] = {{"kind", "box"}, {"lower", {"0"}}, {"upper", {"1"}}};
    j["initial_law"] = {{"kind", "dirac"}, {"point", {"0.5"}}};
    j["w"] = {{"family", "linear"}, {"params", {{"matrix", {{"1"}}}}}};
  });
  const auto g2 = TimeGrid::uniform(0.3, 300);
  const auto s2 = SpaceGrid::for_box(half.domain, 101);
  const auto f2 = MeasureFlow::constant(g2, vec({0.5}));
  const auto v2 = solve_hjb(half, g2, s2, f2);
  const auto r2 = renormalize(solve_kfp(half, g2, s2, v2, initial_density(half.initial_law, s2), f2), half);
  for (const auto& m : r2.means) CHECK(std::abs(m[0] - 0.5) < 1e-10);
}

TEST_CASE("V(0,.) integrated against nu matches the Monte Carlo cost of the feedback") {
  const auto c = test::model("coupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 200);
  const auto space = SpaceGrid::for_box(c.domain, 101);
  auto flow = MeasureFlow::constant(grid, vec({0.2}));
  const auto v = std::make_shared<ValueField>(solve_hjb(c, grid, space, flow));
  const auto rho = initial_density(c.initial_law, space);
  double pde = 0.0;
  for (std::size_t k = 0; k < space.size(); ++k) pde += v->value(0, k) * rho[k];
  pde *= space.cell_volume();
  ResponseOptions opt;
  opt.mode = ResponseMode::monte_carlo;
  opt.n_particles = 100000;
  opt.seed = 8;
  const auto mc = expected_cost(c, grid, GridFeedback(v), flow, opt);
  CHECK(std::abs(pde - mc.mean) <= 3 * (space.spacing[0] + grid.dt + 3 * mc.standard_error));
}

TEST_CASE("field serialization round trip") {
  const auto c = test::model("coupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 40);
  const auto space = SpaceGrid::for_box(c.domain, 21);
  const auto flow = MeasureFlow::constant(grid, vec({0}));
  const auto v = solve_hjb(c, grid, space, flow);
  const auto d = solve_kfp(c, grid, space, v, initial_density(c.initial_law, space), flow);

  std::stringstream bv, bd;
  write_binary(bv, v);
  write_binary(bd, d);
  CHECK(bv.str().substr(0, 8) == "MFGAFLD1");
  const auto v2 = read_value_field(bv);
  const auto d2 = read_density_field(bd);
  CHECK(v2.values == v.values);
  CHECK(v2.gradients == v.gradients);
  CHECK(v2.feedback == v.feedback);
  CHECK(d2.densities == d.densities);
  CHECK(d2.masses == d.masses);
  CHECK(v2.space.nodes == v.space.nodes);
  CHECK(v2.grid.times.back() == v.grid.times.back());

  std::stringstream wrong;
  write_binary(wrong, d);
  CHECK_THROWS_AS(read_value_field(wrong), Error);

  std::stringstream csv;
  write_csv(csv, v);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "t,x1,value");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == grid.size() * space.size());
}
