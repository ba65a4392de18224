#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mfga/json_io.hpp"
#include "mfga/model.hpp"

namespace mfga {

using io::json;

namespace {

// Uniform draws for probe `index`; each block yields two uniforms.
class ProbeDraws {
 public:
  ProbeDraws(std::uint64_t seed, std::uint32_t index) : stream_(seed, {index, 0}) {}
  double next() {
    if (pos_ % 2 == 0) pair_ = stream_.uniform_pair(0, DrawPurpose::auxiliary, pos_ / 2);
    return pair_[pos_++ % 2];
  }

 private:
  NoiseStream stream_;
  std::array<double, 2> pair_{};
  std::uint32_t pos_ = 0;
};

Vec uniform_in(ProbeDraws& draws, const Vec& lo, const Vec& hi) {
  Vec x(lo.size());
  for (int k = 0; k < lo.size(); ++k) x[k] = lo[k] + draws.next() * (hi[k] - lo[k]);
  return x;
}

// A point of O by rejection from the bounding box; empty if none found.
std::optional<Vec> point_in_domain(ProbeDraws& draws, const AbsorbingDomain& domain) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    Vec x = uniform_in(draws, domain.bound_lower(), domain.bound_upper());
    if (domain.contains(x)) return x;
  }
  return std::nullopt;
}

}  // namespace

json ValidationReport::to_json() const {
  return {{"probes", probes},
          {"max_drift_norm", io::real_to_json(max_drift_norm)},
          {"max_w_norm", io::real_to_json(max_w_norm)},
          {"max_f", io::real_to_json(max_f)},
          {"min_f", io::real_to_json(min_f)},
          {"max_F", io::real_to_json(max_F)},
          {"min_F", io::real_to_json(min_F)},
          {"max_lipschitz_quotient", io::real_to_json(max_lipschitz_quotient)},
          {"domain_interior_ok", domain_interior_ok},
          {"domain_exterior_ok", domain_exterior_ok},
          {"initial_support_fraction", io::real_to_json(initial_support_fraction)},
          {"sigma_degenerate", sigma_degenerate},
          {"passed", passed()},
          {"violations", violations},
          {"notes", notes}};
}

ValidationReport validate(const CoefficientSet& c, std::size_t probes, std::uint64_t rng_seed) {
  ValidationReport r;
  r.probes = probes;
  r.min_f = std::numeric_limits<double>::infinity();
  r.min_F = std::numeric_limits<double>::infinity();
  constexpr double kRelTol = 1e-9;
  const double K = c.bound_K;
  const AbsorbingDomain& O = c.domain;
  std::size_t domain_hits = 0;

  for (std::size_t i = 0; i < std::max<std::size_t>(probes, 1); ++i) {
    ProbeDraws draws(rng_seed, static_cast<std::uint32_t>(i));
    const double t = draws.next() * c.horizon_T;
    auto x = point_in_domain(draws, O);
    auto x2 = point_in_domain(draws, O);
    auto x3 = point_in_domain(draws, O);
    if (!x || !x2 || !x3) continue;
    ++domain_hits;
    // Measure arguments range over averages of w on O.
    const double lambda = draws.next();
    const Vec y = lambda * c.integrand_w.eval(*x2) + (1.0 - lambda) * c.integrand_w.eval(*x3);
    const Vec gamma = uniform_in(draws, c.action_space.lower(), c.action_space.upper());

    const Vec b = c.drift_bbar.eval(t, *x, y);
    r.max_drift_norm = std::max(r.max_drift_norm, b.norm());
    r.max_w_norm = std::max(r.max_w_norm, c.integrand_w.eval(*x).norm());
    const double f = c.running_cost_f.eval(t, *x, y, gamma);
    r.max_f = std::max(r.max_f, f);
    r.min_f = std::min(r.min_f, f);
    const double F = c.terminal_cost_F.eval(t, *x);
    r.max_F = std::max(r.max_F, F);
    r.min_F = std::min(r.min_F, F);

    // Lipschitz quotient on a far pair and a near pair.
    const Vec yfar = c.integrand_w.eval(*x3);
    const double scale = 1e-3 * (O.bound_upper() - O.bound_lower()).norm();
    Vec xnear = *x;
    Vec ynear = y;
    for (int k = 0; k < xnear.size(); ++k) xnear[k] += scale * (2.0 * draws.next() - 1.0);
    for (int k = 0; k < ynear.size(); ++k) ynear[k] += scale * (2.0 * draws.next() - 1.0);
    for (const auto& [xp, yp] : {std::pair{*x2, yfar}, std::pair{xnear, ynear}}) {
      const double denom = (*x - xp).norm() + (y - yp).norm();
      if (denom <= 0.0) continue;
      const double q = (b - c.drift_bbar.eval(t, xp, yp)).norm() / denom;
      r.max_lipschitz_quotient = std::max(r.max_lipschitz_quotient, q);
    }

    // Points beyond the bounding radius must be outside.
    Vec dir(c.dim_d);
    for (int k = 0; k < dir.size(); ++k) dir[k] = 2.0 * draws.next() - 1.0;
    if (dir.norm() > 0.0) {
      const Vec far = dir.normalized() * O.bounding_radius() * (1.0 + draws.next());
      if (O.contains(far)) r.domain_exterior_ok = false;
    }
  }
  if (domain_hits == 0) r.domain_interior_ok = false;

  // Interior points for the kinds that have a direct interior sampler.
  if (O.kind() == DomainKind::box || O.kind() == DomainKind::ball) {
    for (std::size_t i = 0; i < std::min<std::size_t>(probes, 1000); ++i) {
      ProbeDraws draws(rng_seed ^ 0xA5A5A5A5ULL, static_cast<std::uint32_t>(i));
      const Vec mid = 0.5 * (O.bound_lower() + O.bound_upper());
      const Vec half = 0.5 * (O.bound_upper() - O.bound_lower());
      Vec x = uniform_in(draws, mid - half, mid + half);
      if (O.kind() == DomainKind::ball) {
        // Shrink into the inscribed ball.
        const double radius = half[0];
        const Vec dv = x - mid;
        const double n = dv.norm();
        if (n > 0.0) x = mid + dv * (std::min(n, 0.999 * radius) / n) * std::sqrt(draws.next());
      } else {
        x = mid + 0.999 * (x - mid);
      }
      if (!O.contains(x)) r.domain_interior_ok = false;
    }
  }

  // Initial law support: 10^4 draws.
  constexpr std::uint32_t kLawDraws = 10000;
  std::uint32_t inside = 0;
  for (std::uint32_t i = 0; i < kLawDraws; ++i) {
    NoiseStream stream(rng_seed ^ 0x5EEDULL, {i, 1});
    if (O.contains(c.initial_law.sample(stream, O))) ++inside;
  }
  r.initial_support_fraction = static_cast<double>(inside) / kLawDraws;
  r.sigma_degenerate = c.sigma_degenerate();

  auto flag = [&](bool bad, const std::string& msg) {
    if (bad) r.violations.push_back(msg);
  };
  flag(r.max_drift_norm > K * (1.0 + kRelTol),
       fmt::format("|bbar| reaches {} > K = {}", r.max_drift_norm, K));
  flag(r.max_w_norm > K * (1.0 + kRelTol), fmt::format("|w| reaches {} > K = {}", r.max_w_norm, K));
  flag(r.max_f > K * (1.0 + kRelTol), fmt::format("f reaches {} > K = {}", r.max_f, K));
  flag(r.max_F > K * (1.0 + kRelTol), fmt::format("F reaches {} > K = {}", r.max_F, K));
  flag(r.min_f < 0.0, fmt::format("f takes negative value {}", r.min_f));
  flag(r.min_F < 0.0, fmt::format("F takes negative value {}", r.min_F));
  flag(r.max_lipschitz_quotient > c.lipschitz_Lbar * (1.0 + kRelTol),
       fmt::format("Lipschitz quotient {} exceeds Lbar = {}", r.max_lipschitz_quotient,
                   c.lipschitz_Lbar));
  flag(!r.domain_interior_ok, "domain interior samples not contained in O (or O empty)");
  flag(!r.domain_exterior_ok, "points beyond the bounding radius lie in O");
  flag(r.initial_support_fraction < 1.0,
       fmt::format("initial law puts mass outside O (fraction inside {})",
                   r.initial_support_fraction));
  if (r.sigma_degenerate) {
    r.notes.push_back("degenerate dispersion: sigma is singular, non-degeneracy fails");
  }
  if (domain_hits == 0) {
    r.min_f = r.min_F = 0.0;
  }
  return r;
}

}  // namespace mfga
