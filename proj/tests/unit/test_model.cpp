#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "mfga/counterexample.hpp"
#include "mfga/error.hpp"
#include "mfga/model.hpp"
#include "support.hpp"

using namespace mfga;
using mfga::test::vec;

namespace {

nlohmann::json two_dim_model() {
  auto j = test::model_json("coupled_1d");
  j["dim_d"] = 2;
  j["sigma"] = nlohmann::json::parse(R"([["1","0"],["0","1"]])");
  j["drift"] = {{"family", "affine"}, {"params", {{"measure_matrix", {{"1"}, {"0"}}}}}};
  j["w"] = {{"family", "coordinate"}, {"params", {{"index", 0}}}};
  j["gamma_box"] = {{"lower", {"-1", "0"}}, {"upper", {"1", "0"}}};
  j["domain"] = {{"kind", "box"}, {"lower", {"-1", "-1"}}, {"upper", {"1", "1"}}};
  j["initial_law"] = {{"kind", "dirac"}, {"point", {"0", "0"}}};
  j["bound_K"] = "3";
  j["lipschitz_Lbar"] = "1";
  return j;
}

}  // namespace

TEST_CASE("drift_full examples") {
  const auto bm = test::model("bm_interval");
  CHECK(drift_full(bm, 0.0, vec({0}), vec({0}), vec({0})) == vec({0}));

  const auto ce = ce7::coefficients();
  const Vec b = drift_full(ce, 0.3, vec({0.2, -1, 0.5}), vec({0.5}), vec({1, 0, 0}));
  CHECK(b == vec({0.75, 0, 1}));

  const auto two = coefficients_from_json(two_dim_model());
  CHECK(drift_full(two, 0.0, vec({0.1, 0.2}), vec({2}), vec({0.5, 0})) == vec({2.5, 0}));
}

TEST_CASE("drift_full rejects actions outside the box and non-finite input") {
  const auto c = test::model("coupled_1d");
  try {
    drift_full(c, 0.0, vec({0}), vec({0}), vec({1.5}));
    FAIL("expected a contract violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::contract_violation);
  }
  try {
    drift_full(c, 0.0, vec({NAN}), vec({0}), vec({0}));
    FAIL("expected a numeric error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numeric);
  }
  CHECK_NOTHROW(drift_full(c, 0.0, vec({0}), vec({0}), vec({1.0 + 1e-13})));
}

TEST_CASE("drift is affine in the action with unit coefficient and L-Lipschitz") {
  const auto c = test::model("coupled_1d");
  const NoiseStream s(3, {0, 0});
  for (std::uint32_t k = 0; k < 200; ++k) {
    const auto [u1, u2] = s.uniform_pair(k, DrawPurpose::auxiliary);
    const auto [u3, u4] = s.uniform_pair(k, DrawPurpose::auxiliary, 1);
    const Vec x = vec({2 * u1 - 1}), y = vec({2 * u2 - 1});
    const Vec g1 = vec({2 * u3 - 1}), g2 = vec({2 * u4 - 1});
    // Equal up to the rounding of the two additions.
    CHECK((drift_full(c, 0.5, x, y, g1) - drift_full(c, 0.5, x, y, g2) - (g1 - g2)).norm() <=
          1e-15);
    const Vec x2 = vec({u3 - 0.5}), y2 = vec({u4 - 0.5});
    const double lhs = (drift_full(c, 0.5, x, y, g1) - drift_full(c, 0.5, x2, y2, g1)).norm();
    CHECK(lhs <= c.lipschitz_Lbar * ((x - x2).norm() + (y - y2).norm()) * (1 + 1e-12));
  }
}

TEST_CASE("validate on catalog models") {
  const auto ce = validate(ce7::coefficients(), 10000, 1);
  CHECK(ce.passed());
  CHECK(ce.sigma_degenerate);
  CHECK(ce.max_drift_norm <= 4.0);
  CHECK(ce.initial_support_fraction == 1.0);

  const auto bm = validate(test::model("bm_interval"), 10000, 1);
  CHECK(bm.passed());
  CHECK(bm.max_f == 1.0);
  CHECK(bm.min_f == 1.0);

  auto j = test::model_json("bm_interval");
  j["f"] = {{"family", "constant"}, {"params", {{"value", "-1"}}}};
  const auto bad = validate(coefficients_from_json(j), 100, 1);
  CHECK_FALSE(bad.passed());
  CHECK(bad.min_f == -1.0);
}

TEST_CASE("validate flags an understated Lipschitz constant") {
  auto j = test::model_json("coupled_1d");
  j["lipschitz_Lbar"] = "0.1";
  CHECK_FALSE(validate(coefficients_from_json(j), 1000, 5).passed());
}

TEST_CASE("domains: membership, exterior, bounding radius") {
  const auto box = AbsorbingDomain::box(vec({-1, -2}), vec({1, 2}));
  CHECK(box.contains(vec({0, 1.9})));
  CHECK_FALSE(box.contains(vec({1, 0})));  // open set
  CHECK_FALSE(box.contains(vec({0, -2.5})));

  const auto ball = AbsorbingDomain::ball(vec({1, 1}), 0.5);
  CHECK(ball.contains(vec({1.2, 1.2})));
  CHECK_FALSE(ball.contains(vec({1.5, 1})));
  CHECK_FALSE(ball.contains(vec({0, 0})));

  Mat normals(3, 2);
  normals << -1, 0, 0, -1, 1, 1;
  const auto tri = AbsorbingDomain::halfspaces(normals, vec({0, 0, 1}), 2.0);
  CHECK(tri.contains(vec({0.2, 0.2})));
  CHECK_FALSE(tri.contains(vec({0.6, 0.6})));
  CHECK_FALSE(tri.contains(vec({3, 3})));

  const auto ce = AbsorbingDomain::counterexample();
  CHECK(ce.contains(vec({1, 1, 0})));
  CHECK(ce.contains(vec({1.9, 0, 1})));  // 1 + e^0 = 2
  CHECK_FALSE(ce.contains(vec({2, 1, 1})));
  CHECK_FALSE(ce.contains(vec({0, 0, -1})));
  CHECK_FALSE(ce.contains(vec({0, 2, 0})));
  CHECK_FALSE(ce.contains(vec({-4, 0, 0})));
  CHECK_FALSE(ce.contains(vec({0, 0, 2.2})));
  for (const auto* d : {&box, &ball, &tri, &ce}) {
    const double r = 1.001 * d->bounding_radius() / std::sqrt(double(d->dim()));
    CHECK_FALSE(d->contains(Vec::Constant(d->dim(), r)));
    CHECK_FALSE(d->contains(Vec::Constant(d->dim(), -r)));
  }
}

TEST_CASE("domain bad parameters are configuration errors") {
  CHECK_THROWS_AS(AbsorbingDomain::box(vec({1}), vec({0})), Error);
  CHECK_THROWS_AS(AbsorbingDomain::ball(vec({0}), -1.0), Error);
}

TEST_CASE("initial laws: all samples inside O") {
  const auto ce = ce7::coefficients();
  const auto coupled = test::model("coupled_1d");
  for (const auto* c : {&ce, &coupled}) {
    for (std::uint32_t i = 0; i < 10000; ++i) {
      const Vec x = c->initial_law.sample(NoiseStream(4, {0, i}), c->domain);
      REQUIRE(c->domain.contains(x));
    }
  }
  const auto g = InitialLaw::gaussian_truncated(vec({0.9}), vec({0.5}));
  const auto dom = AbsorbingDomain::box(vec({-1}), vec({1}));
  for (std::uint32_t i = 0; i < 2000; ++i) {
    REQUIRE(dom.contains(g.sample(NoiseStream(4, {1, i}), dom)));
  }
}

TEST_CASE("atoms of the product law") {
  const auto atoms = ce7::coefficients().initial_law.atoms();
  CHECK(atoms.size() == 4);
  double total = 0.0;
  for (const auto& [x, p] : atoms) {
    CHECK(p == 0.25);
    CHECK(x[2] == 0.0);
    total += p;
  }
  CHECK(total == 1.0);
}

TEST_CASE("action box") {
  const ActionBox box(vec({-1, 0}), vec({1, 0}));
  CHECK(box.active(0));
  CHECK_FALSE(box.active(1));
  CHECK(box.project(vec({3, 2})) == vec({1, 0}));
  CHECK(box.contains(vec({0.5, 0})));
  CHECK_FALSE(box.contains(vec({0.5, 0.1})));
  CHECK(box.max_norm() == 1.0);
}

TEST_CASE("model JSON round trip is bit-stable") {
  for (const char* name : {"coupled_1d", "decoupled_1d", "bm_interval", "ce7"}) {
    const auto c = test::model(name);
    const auto again = coefficients_from_json(to_json(c));
    CHECK(to_json(again).dump() == to_json(c).dump());
    const Vec x = vec({0.3, -0.7, 0.1}).head(c.dim_d);
    const Vec y = Vec::Constant(c.dim_d0, 0.4);
    const Vec g = c.action_space.project(Vec::Constant(c.dim_d, 0.25));
    CHECK(again.drift_bbar.eval(0.1, x, y) == c.drift_bbar.eval(0.1, x, y));
    CHECK(again.running_cost_f.eval(0.1, x, y, g) == c.running_cost_f.eval(0.1, x, y, g));
    CHECK(again.terminal_cost_F.eval(0.1, x) == c.terminal_cost_F.eval(0.1, x));
  }
  const auto path = (std::filesystem::temp_directory_path() / "mfga_model_roundtrip.json").string();
  save_model(ce7::coefficients(), path);
  CHECK(to_json(load_model(path)).dump() == ce7::descriptor().dump());
  std::remove(path.c_str());
}

TEST_CASE("descriptor errors") {
  auto j = test::model_json("coupled_1d");
  j["drift"]["family"] = "no_such_family";
  CHECK_THROWS_AS(coefficients_from_json(j), Error);
  auto k = test::model_json("coupled_1d");
  k["sigma"] = nlohmann::json::parse(R"([["1","0"]])");
  CHECK_THROWS_AS(coefficients_from_json(k), Error);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), Error);
}
