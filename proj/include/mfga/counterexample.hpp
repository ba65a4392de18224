#pragma once

#include <cstddef>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "mfga/model.hpp"

namespace mfga::ce7 {

using Rational = boost::multiprecision::cpp_rational;

/// The degenerate-noise example with N players: d = 3, d0 = 1, T = 2,
/// sigma = 0, Gamma = [-1,1] x {0} x {0}, bbar = (-(|y| ^ 1/4), 0, 1),
/// f = 1, F = 1 + x3 x1 / 12, w = x2, nu = Rademacher x Rademacher x delta_0.
struct Config {
  std::size_t N = 1;
};

/// The baked-in model as a coefficient set (independent of N).
CoefficientSet coefficients();
/// Same model as a serializable descriptor.
nlohmann::json descriptor();

struct Result {
  std::size_t N = 0;
  Rational cost_equilibrium;
  Rational cost_deviation;
  Rational gap;
  Rational mean_term;
  Rational exit_probability;
};

/// E[|S_N / N| ^ 1/4] for S_N a sum of N independent signs.
Rational exact_mean_term(std::size_t N);

/// Closed-form equilibrium and deviation costs (odd N only).
Result exact_costs(std::size_t N);

/// Player-1 costs averaged over all 2^(2N) sign configurations, evaluated
/// from the piecewise-linear paths (odd N only).
Result enumerate_costs(std::size_t N);

/// P(S_N = 0): binom(N, N/2) 2^-N for even N, 0 for odd N.
Rational exit_probability(std::size_t N);
/// The same probability counted over all 2^N sign vectors.
Rational enumerate_exit_probability(std::size_t N);

/// Expected cost in the limit game under the limit strategy, averaged over
/// the four initial sign pairs: 7/3.
Rational limit_cost();
/// Limit-game cost for one initial sign of the first coordinate.
Rational limit_branch_cost(int xi1);

/// Realized cost of one player whose first coordinate starts at xi1, who
/// uses u* (deviate = false) or the constant action -1 (deviate = true),
/// while the interaction term |y| ^ 1/4 equals a_early on [0,1] and a_late
/// on (1,2]. Exits are detected at t = 1 on the curved face, the only
/// place they can occur in this example.
Rational player_cost(int xi1, bool deviate, const Rational& a_early, const Rational& a_late);

std::string to_string(const Rational& r);
double to_double(const Rational& r);

}  // namespace mfga::ce7
