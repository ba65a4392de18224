#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mfga/analysis.hpp"
#include "mfga/counterexample.hpp"
#include "mfga/error.hpp"
#include "support.hpp"

using namespace mfga;
using mfga::test::vec;

TEST_CASE("mean_and_se") {
  const auto a = mean_and_se({1, 2, 3, 4});
  CHECK(a.mean == 2.5);
  CHECK(a.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)).epsilon(1e-15));
  CHECK(mean_and_se({7}).se == 0.0);
  CHECK(mean_and_se({}).mean == 0.0);
}

TEST_CASE("Nash gap: identical strategies give exactly zero under common random numbers") {
  const auto c = test::model("coupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 100);
  const auto fb = constant_feedback(vec({0.3}));
  const auto row = estimate_nash_gap(c, grid, fb, fb, 10, 20, 7);
  CHECK(row.gap.mean == 0.0);
  CHECK(row.gap.se == 0.0);
  CHECK(row.cost_equilibrium.mean == row.cost_deviation.mean);
  CHECK(row.equilibrium_samples.size() == 20);
  CHECK_THROWS_AS(estimate_nash_gap(c, grid, fb, fb, 10, 1, 7), Error);
}

TEST_CASE("Nash gap, decoupled game: the optimal feedback cannot be beaten") {
  const auto c = test::model("decoupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 200);
  const auto fp = solve_fixed_point(c, grid, MeasureFlow::constant(grid, vec({0})));
  const auto eq = fp.response.feedback;
  const auto dev =
      std::make_shared<GridFeedback>(limit_best_response(c, grid, fp.flow, 10, 101));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto row = estimate_nash_gap(c, grid, eq, dev, 10, 200, seed);
    CHECK(std::abs(row.gap.mean) <= 3 * row.gap.se + 1e-12);
  }
  // A clearly suboptimal deviation costs more.
  const auto bad = estimate_nash_gap(c, grid, eq, constant_feedback(vec({1.0})), 10, 200, 4);
  CHECK(bad.gap.mean < -3 * bad.gap.se);
}

TEST_CASE("Nash gap SE halves when replications quadruple") {
  const auto c = test::model("decoupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 100);
  const auto a = constant_feedback(vec({0.0}));
  const auto b = constant_feedback(vec({0.5}));
  const auto small = estimate_nash_gap(c, grid, a, b, 5, 400, 11);
  const auto large = estimate_nash_gap(c, grid, a, b, 5, 1600, 12);
  CHECK(small.gap.se / large.gap.se == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("Nash gap report serialization") {
  const auto c = test::model("decoupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 50);
  NashGapReport report;
  report.seed = 9;
  report.rows.push_back(
      estimate_nash_gap(c, grid, constant_feedback(vec({0})), constant_feedback(vec({0.2})), 4, 3, 9));
  const auto j = report.to_json();
  CHECK(j.at("rows").size() == 1);
  CHECK(j.at("rows")[0].at("N") == 4);
  CHECK(j.at("rows")[0].at("gap").at("mean").is_string());
  std::ostringstream csv;
  report.write_csv(csv);
  std::size_t lines = 0;
  for (char ch : csv.str()) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 1 + 3);
}

TEST_CASE("limit best response sees its own footprint") {
  const auto c = test::model("coupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 200);
  const auto flow = MeasureFlow::constant(grid, vec({0.4}));
  // With N = 1 the perceived mean is w(x) alone, whatever the flow says.
  const auto lonely = limit_best_response(c, grid, flow, 1, 101);
  const auto other = limit_best_response(c, grid, MeasureFlow::constant(grid, vec({-0.4})), 1, 101);
  CHECK(lonely->values == other->values);
  // Large N approaches the plain best response against the flow.
  const auto big = limit_best_response(c, grid, flow, 1000000, 101);
  const auto plain = solve_hjb(c, grid, SpaceGrid::for_box(c.domain, 101), flow);
  double diff = 0.0;
  for (std::size_t k = 0; k < plain.values.size(); ++k) {
    diff = std::max(diff, std::abs(plain.values[k] - big->values[k]));
  }
  CHECK(diff < 1e-5);
}

TEST_CASE("dictionary") {
  const auto c = test::model("coupled_1d");
  const auto d = Dictionary::standard(c, 20, 2024);
  CHECK(d.size() == 1 + 1 + 20);
  CHECK(d.names[0] == "x1");
  CHECK(d.names[1] == "w1");
  const auto again = Dictionary::standard(c, 20, 2024);
  const Vec x = vec({0.37});
  for (std::size_t g = 0; g < d.size(); ++g) CHECK(d.functions[g](x) == again.functions[g](x));
  for (std::size_t g = 2; g < d.size(); ++g) CHECK(std::abs(d.functions[g](x)) < 1.0);
  CHECK_THROWS_AS(d.subset({0, 99}), Error);

  // A smaller dictionary can only shrink the distance.
  const auto grid = TimeGrid::uniform(1.0, 50);
  const auto e1 = simulate_nplayer(c, grid, StrategyProfile::constant(vec({0})), 30, 1);
  const auto e2 = simulate_nplayer(c, grid, StrategyProfile::constant(vec({0})), 30, 2);
  const auto f1 = empirical_flow(e1, c), f2 = empirical_flow(e2, c);
  const double full = chaos_distance(f1, f2, d);
  const double part = chaos_distance(f1, f2, d.subset({0, 5, 6}));
  CHECK(part <= full);
  CHECK(full > 0.0);
  CHECK(chaos_distance(f1, f1, d) == 0.0);
  CHECK(chaos_distance(e1, c, f1, d) == 0.0);
}

TEST_CASE("empirical flow: survivors only, delta_0 when nobody is left") {
  const auto ce = ce7::coefficients();
  const auto grid = TimeGrid::uniform(2.0, 40);
  NPlayerOptions opt;
  opt.initial_states = {vec({1, 1, 0}), vec({1, -1, 0})};
  const auto e = simulate_nplayer(ce, grid, StrategyProfile::counterexample(), 2, 1, opt);
  const auto f = empirical_flow(e, ce);
  CHECK(f.survival.front() == 1.0);
  CHECK(f.survival.back() == 0.0);
  const auto& last = f.histograms->back();
  REQUIRE(last.points.size() == 1);
  CHECK(last.points[0] == Vec::Zero(3));
  CHECK(last.total() == 1.0);
  CHECK((*f.histograms)[0].points.size() == 2);
  CHECK((*f.histograms)[0].weights[0] == 0.5);
}

TEST_CASE("chaos study on the decoupled game") {
  const auto c = test::model("decoupled_1d");
  const auto grid = TimeGrid::uniform(1.0, 100);
  const auto fb = constant_feedback(vec({0}));
  ResponseOptions ref;
  ref.mode = ResponseMode::monte_carlo;
  ref.n_particles = 200000;
  ref.seed = 99;
  ref.histogram_bins = 200;
  const auto flow = sample_flow(c, grid, *fb, MeasureFlow::constant(grid, vec({0})), ref);
  const auto dict = Dictionary::standard(c, 10, 3);
  const auto report = chaos_study(c, grid, fb, flow, {25, 400}, 10, 5, dict);
  CHECK(report.distances.size() == 2);
  CHECK(report.distances[1].mean < report.distances[0].mean);
  CHECK(report.scaling_spread() < 3.0);
  const auto j = report.to_json();
  CHECK(j.at("rows").size() == 2);
  CHECK(j.at("dictionary").at("seed") == 3);
}

TEST_CASE("survival lower bound") {
  const auto ce = ce7::coefficients();
  const auto grid = TimeGrid::uniform(2.0, 40);
  const auto e = simulate_nplayer(ce, grid, StrategyProfile::counterexample(), 4, 1);
  const auto s = survival_lower_bound_check(e, ce, 10);
  CHECK(s.degenerate);
  CHECK(s.verdict.find("degenerate") != std::string::npos);

  const auto c = test::model("decoupled_1d");
  const auto g1 = TimeGrid::uniform(1.0, 100);
  const auto e1 = simulate_nplayer(c, g1, StrategyProfile::constant(vec({0})), 2000, 3);
  const auto ok = survival_lower_bound_check(e1, c, 20000, 4);
  CHECK_FALSE(ok.degenerate);
  CHECK(ok.pass);
  CHECK(ok.c_ball > 0.0);
  CHECK(ok.c_ball < 1.0);
  CHECK(ok.bound < ok.observed);
  CHECK(ok.to_json().at("pass") == true);
}
