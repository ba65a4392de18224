#include "mfga/counterexample.hpp"

#include <vector>

#include "mfga/error.hpp"
#include "mfga/json_io.hpp"

namespace mfga::ce7 {

namespace {

using boost::multiprecision::cpp_int;

const Rational kQuarter(1, 4);

Rational clipped_abs_mean(long long sum, std::size_t n) {
  Rational a(sum < 0 ? -sum : sum, static_cast<long long>(n));
  return a < kQuarter ? a : kQuarter;
}

cpp_int binomial(std::size_t n, std::size_t k) {
  cpp_int c = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return c;
}

void require_odd(std::size_t N) {
  require(N >= 1, ErrorKind::precondition, "N must be positive");
  require(N % 2 == 1, ErrorKind::precondition,
          "even N: the interaction term can vanish and players exit at t = 1; "
          "use exit_probability for even N");
}

}  // namespace

CoefficientSet coefficients() { return coefficients_from_json(descriptor()); }

nlohmann::json descriptor() {
  using nlohmann::json;
  return json{
      {"dim_d", 3},
      {"dim_d0", 1},
      {"horizon_T", "2"},
      {"sigma", json::array({json::array({"0", "0", "0"}), json::array({"0", "0", "0"}),
                             json::array({"0", "0", "0"})})},
      {"drift",
       {{"family", "saturated_norm"},
        {"params", {{"offset", {"0", "0", "1"}}, {"direction", {"1", "0", "0"}}, {"cap", "0.25"}}}}},
      {"w", {{"family", "coordinate"}, {"params", {{"index", 1}, {"clip", "2"}}}}},
      {"f", {{"family", "constant"}, {"params", {{"value", "1"}}}}},
      {"F",
       {{"family", "bilinear"},
        {"params", {{"constant", "1"}, {"coef", io::real_to_json(1.0 / 12.0)}, {"i", 2}, {"j", 0}}}}},
      {"gamma_box", {{"lower", {"-1", "0", "0"}}, {"upper", {"1", "0", "0"}}}},
      {"domain", {{"kind", "counterexample"}}},
      {"initial_law",
       {{"kind", "product_of_atoms"},
        {"axes", json::array({{{"values", {"-1", "1"}}, {"weights", {"0.5", "0.5"}}},
                              {{"values", {"-1", "1"}}, {"weights", {"0.5", "0.5"}}},
                              {{"values", {"0"}}, {"weights", {"1"}}}})}}},
      {"bound_K", "4"},
      {"lipschitz_Lbar", "1"}};
}

Rational player_cost(int xi1, bool deviate, const Rational& a_early, const Rational& a_late) {
  // x3(t) = t and x2 is constant; x1 is piecewise linear with a kink at t = 1.
  const Rational x1_start(xi1);
  const Rational u_early = deviate ? Rational(-1) : Rational(xi1);
  const Rational x1_mid = x1_start + u_early - a_early;
  // Curved face x1 = 1 + exp(x3 - 1): on [0,1) the path stays strictly inside
  // (t (1 - a) < exp(t - 1) there), and at t = 1 the face sits at x1 = 2.
  if (x1_mid >= 2) return Rational(1) + Rational(1) + x1_mid / 12;
  const Rational x1_end = x1_mid - 1 - a_late;
  return Rational(2) + Rational(1) + Rational(2) * x1_end / 12;
}

Rational exact_mean_term(std::size_t N) {
  require(N >= 1, ErrorKind::precondition, "N must be positive");
  // S = 2k - N with probability binom(N, k) / 2^N.
  Rational total = 0;
  for (std::size_t k = 0; k <= N; ++k) {
    const long long s = 2 * static_cast<long long>(k) - static_cast<long long>(N);
    total += Rational(binomial(N, k)) * clipped_abs_mean(s, N);
  }
  return total / Rational(cpp_int(1) << N);
}

Result exact_costs(std::size_t N) {
  require_odd(N);
  Result r;
  r.N = N;
  r.mean_term = exact_mean_term(N);
  r.cost_equilibrium = Rational(3) - Rational(1, 6) - r.mean_term / 3;
  r.cost_deviation = Rational(3) - Rational(1, 3) - r.mean_term / 3;
  r.gap = r.cost_equilibrium - r.cost_deviation;
  r.exit_probability = 0;
  return r;
}

Result enumerate_costs(std::size_t N) {
  require_odd(N);
  require(N <= 12, ErrorKind::precondition, "brute-force enumeration is limited to N <= 12");
  const std::size_t configs = std::size_t{1} << (2 * N);
  // Bits 0..N-1: first-coordinate signs; bits N..2N-1: second-coordinate signs.
  Rational eq_sum = 0, dev_sum = 0, mean_sum = 0;
  for (std::size_t c = 0; c < configs; ++c) {
    long long s = 0;
    for (std::size_t i = 0; i < N; ++i) s += ((c >> (N + i)) & 1U) ? 1 : -1;
    const int xi1 = (c & 1U) ? 1 : -1;
    // With N odd no player can exit, so the survivors and the interaction
    // term stay fixed over the whole horizon.
    const Rational a = clipped_abs_mean(s, N);
    eq_sum += player_cost(xi1, false, a, a);
    dev_sum += player_cost(xi1, true, a, a);
    mean_sum += a;
  }
  const Rational n_configs(static_cast<long long>(configs));
  Result r;
  r.N = N;
  r.cost_equilibrium = eq_sum / n_configs;
  r.cost_deviation = dev_sum / n_configs;
  r.gap = r.cost_equilibrium - r.cost_deviation;
  r.mean_term = mean_sum / n_configs;
  r.exit_probability = 0;
  return r;
}

Rational exit_probability(std::size_t N) {
  require(N >= 1, ErrorKind::precondition, "N must be positive");
  if (N % 2 == 1) return 0;
  return Rational(binomial(N, N / 2)) / Rational(cpp_int(1) << N);
}

Rational enumerate_exit_probability(std::size_t N) {
  require(N >= 1 && N <= 26, ErrorKind::precondition, "enumeration needs 1 <= N <= 26");
  const std::uint64_t total = std::uint64_t{1} << N;
  std::uint64_t zero_sum = 0;
  for (std::uint64_t c = 0; c < total; ++c) {
    if (2 * static_cast<std::size_t>(__builtin_popcountll(c)) == N) ++zero_sum;
  }
  return Rational(cpp_int(zero_sum)) / Rational(cpp_int(total));
}

Rational limit_branch_cost(int xi1) {
  // In the limit the conditional mean of x2 is 0, so the interaction vanishes.
  return player_cost(xi1, false, 0, 0);
}

Rational limit_cost() {
  Rational total = 0;
  for (int xi1 : {-1, 1}) {
    for (int xi2 : {-1, 1}) {
      (void)xi2;  // x2 does not enter the cost
      total += limit_branch_cost(xi1);
    }
  }
  return total / 4;
}

std::string to_string(const Rational& r) {
  if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r).str();
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace mfga::ce7
