#include <doctest.h>

#include <cmath>
#include <vector>

#include "mfga/counterexample.hpp"
#include "mfga/error.hpp"
#include "mfga/sde.hpp"
#include "support.hpp"

using namespace mfga;
using mfga::test::vec;

namespace {

CoefficientSet deterministic_interval(double horizon) {
  auto j = test::model_json("bm_interval");
  j["sigma"] = {{"0"}};
  j["gamma_box"] = {{"lower", {"-1"}}, {"upper", {"1"}}};
  j["horizon_T"] = std::to_string(horizon);
  return coefficients_from_json(j);
}

}  // namespace

TEST_CASE("time grid") {
  const auto g = TimeGrid::uniform(2.0, 8);
  CHECK(g.size() == 9);
  CHECK(g.dt == 0.25);
  CHECK(g.times.front() == 0.0);
  CHECK(std::abs(g.times.back() - 2.0) < 1e-12);
  CHECK(g.index_at(0.49) == 1);
  CHECK(g.index_at(0.5) == 2);
  CHECK(g.index_at(7.0) == 8);
}

TEST_CASE("step examples") {
  const auto det = deterministic_interval(1.0);
  CHECK(step(det, 0.0, vec({0.3}), vec({0}), vec({0}), 0.1, vec({5})) == vec({0.3}));

  const auto ce = ce7::coefficients();
  const Vec x = step(ce, 0.0, vec({1, 1, 0}), vec({0}), vec({1, 0, 0}), 0.1, vec({0, 0, 0}));
  CHECK(x[0] == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(x[1] == 1.0);
  CHECK(x[2] == doctest::Approx(0.1).epsilon(1e-15));

  const auto bm = test::model("bm_interval");
  CHECK(step(bm, 0.0, vec({0}), vec({0}), vec({0}), 0.25, vec({2})) == vec({1.0}));
  CHECK_THROWS_AS(step(bm, 0.0, vec({0}), vec({0}), vec({0}), 0.0, vec({0})), Error);
}

TEST_CASE("first_exit_index conventions") {
  const auto dom = AbsorbingDomain::box(vec({-1}), vec({1}));
  std::vector<Vec> inside{vec({0}), vec({0.5}), vec({-0.9})};
  CHECK_FALSE(first_exit_index(dom, inside).has_value());
  std::vector<Vec> start_out{vec({1}), vec({0})};
  CHECK(first_exit_index(dom, start_out) == 0u);
  // A continuous path through these nodes may touch 1 between them; only
  // the nodes are checked.
  std::vector<Vec> skip{vec({0.9}), vec({0.95}), vec({0.5})};
  CHECK_FALSE(first_exit_index(dom, skip).has_value());
}

TEST_CASE("simulate_path: deterministic examples") {
  const auto still = deterministic_interval(1.0);
  const auto grid = TimeGrid::uniform(1.0, 50);
  const auto flow = MeasureFlow::constant(grid, vec({0}));
  const NoiseStream noise(1, {0, 0});
  const auto p0 = simulate_path(still, grid, *constant_feedback(vec({0})), flow, noise, vec({0}));
  CHECK_FALSE(p0.absorption_index.has_value());
  for (const auto& x : p0.states) CHECK(x[0] == 0.0);

  const auto det2 = deterministic_interval(2.0);
  const auto grid2 = TimeGrid::uniform(2.0, 200);
  const auto flow2 = MeasureFlow::constant(grid2, vec({0}));
  const auto p1 = simulate_path(det2, grid2, *constant_feedback(vec({1})), flow2, noise, vec({0}));
  REQUIRE(p1.absorption_index.has_value());
  CHECK(*p1.absorption_index == 100);
  for (std::size_t j = 100; j < p1.states.size(); ++j) CHECK(p1.states[j] == p1.exit_state);
  CHECK(p1.controls[150] == vec({0}));  // rest action after absorption

  CHECK_THROWS_AS(
      simulate_path(det2, grid2, *constant_feedback(vec({1})), flow2, noise, vec({1.5})), Error);
}

TEST_CASE("simulate_path: degenerate example exits at t = 1 with x1 = 2") {
  const auto ce = ce7::coefficients();
  const auto grid = TimeGrid::uniform(2.0, 100);
  const auto flow = MeasureFlow::constant(grid, vec({0}));
  const CounterexampleFeedback ustar;
  const auto p = simulate_path(ce, grid, ustar, flow, NoiseStream(1, {0, 0}), vec({1, 1, 0}));
  REQUIRE(p.absorption_index.has_value());
  CHECK(*p.absorption_index == 50);
  CHECK(p.exit_state[0] == doctest::Approx(2.0));
  CHECK(p.exit_state[2] == doctest::Approx(1.0));
  // cost = 50 steps of f = 1 plus F = 1 + (1/12) * 2
  CHECK(realized_cost(ce, grid, p, flow.means) == doctest::Approx(2.0 + 1.0 / 6.0));
}

TEST_CASE("zero-noise path matches the explicit Euler recursion") {
  const auto ce = ce7::coefficients();
  const auto grid = TimeGrid::uniform(2.0, 40);
  auto flow = MeasureFlow::constant(grid, vec({0}));
  for (std::size_t j = 0; j < grid.size(); ++j) flow.means[j][0] = 0.1 * std::sin(double(j));
  const CounterexampleFeedback ustar;
  const Vec x0 = vec({-1, 1, 0});
  const auto p = simulate_path(ce, grid, ustar, flow, NoiseStream(1, {0, 0}), x0);
  Vec x = x0;
  for (std::size_t j = 0; j < grid.n_steps; ++j) {
    const double t = grid.times[j];
    const Vec g = vec({-1, 0, 0});  // u* from x1(0) = -1 on both halves
    x = x + (g + ce.drift_bbar.eval(t, x, flow.means[j])) * grid.dt;
    CHECK((p.states[j + 1] - x).norm() == 0.0);
  }
}

TEST_CASE("paths are reproducible from (seed, stream)") {
  const auto c = test::model("coupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 100);
  const auto flow = MeasureFlow::constant(grid, vec({0.1}));
  const auto fb = constant_feedback(vec({0.3}));
  const auto a = simulate_path(c, grid, *fb, flow, NoiseStream(77, {3, 9}));
  const auto b = simulate_path(c, grid, *fb, flow, NoiseStream(77, {3, 9}));
  CHECK(a.states == b.states);
  CHECK(a.absorption_index == b.absorption_index);
  const auto other = simulate_path(c, grid, *fb, flow, NoiseStream(77, {3, 10}));
  CHECK(other.states != a.states);
}

TEST_CASE("bridge exit probability") {
  const auto dom = AbsorbingDomain::box(vec({-1}), vec({1}));
  // Far from both faces the bridge practically never exits.
  CHECK(bridge_exit_probability(dom, vec({0}), vec({0}), vec({1}), 1e-3) < 1e-100);
  // Upper face only: exp(-2 (1 - 0.9)(1 - 0.8) / 0.01) = exp(-4).
  const double p = bridge_exit_probability(dom, vec({0.9}), vec({0.8}), vec({1}), 0.01);
  CHECK(p == doctest::Approx(std::exp(-4.0) + std::exp(-2 * 1.9 * 1.8 / 0.01)).epsilon(1e-12));
}

TEST_CASE("discrete monitoring overestimates survival; the bridge removes most of the bias") {
  const auto bm = test::model("bm_interval");
  const double exact = test::bm_survival(1.0);
  auto survival = [&](std::size_t n, bool bridge) {
    const auto grid = TimeGrid::uniform(1.0, n);
    const auto flow = MeasureFlow::constant(grid, vec({0}));
    const auto fb = constant_feedback(vec({0}));
    SimulationOptions opt;
    opt.bridge_correction = bridge;
    const int paths = 40000;
    int alive = 0;
    for (int i = 0; i < paths; ++i) {
      const auto p = simulate_path(bm, grid, *fb, flow,
                                   NoiseStream(5, {0, static_cast<std::uint32_t>(i)}), opt);
      alive += p.absorption_index ? 0 : 1;
    }
    return double(alive) / paths;
  };
  const double se = std::sqrt(exact * (1 - exact) / 40000);
  const double coarse = survival(25, false);
  const double fine = survival(100, false);
  CHECK(coarse > fine);
  CHECK(fine > exact);
  CHECK(std::abs(survival(25, true) - exact) < 4 * se);
}
