#include <algorithm>
#include <cmath>
#include <limits>

#include "mfga/error.hpp"
#include "mfga/hjb_kfp.hpp"

namespace mfga {

namespace {

// Prefer smaller |gamma|, then lexicographically smaller.
bool tie_break_less(const Vec& a, const Vec& b) {
  const double na = a.squaredNorm();
  const double nb = b.squaredNorm();
  if (na != nb) return na < nb;
  for (int k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

double golden_section(const std::function<double(double)>& g, double lo, double hi,
                      int iterations) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double gc = g(c);
  double gd = g(d);
  for (int i = 0; i < iterations && b - a > 0.0; ++i) {
    if (gc <= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - kInvPhi * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + kInvPhi * (b - a);
      gd = g(d);
    }
  }
  // Compare the bracket midpoint with the endpoints, where convex minima
  // on a box often sit.
  double best = 0.5 * (a + b);
  double best_val = g(best);
  for (double cand : {lo, hi}) {
    const double v = g(cand);
    if (v < best_val) {
      best = cand;
      best_val = v;
    }
  }
  return best;
}

}  // namespace

HamiltonianMin hamiltonian_min(const CoefficientSet& coeffs, double t, const Vec& x,
                               const Vec& m, const Vec& grad_v, const MinimizerOptions& options) {
  const ActionBox& box = coeffs.action_space;
  const RunningCost& f = coeffs.running_cost_f;
  const int d = box.dim();
  Vec gamma(d);

  switch (f.structure) {
    case ControlStructure::independent:
      // Affine in gamma: bang-bang, with p_k = 0 resolved towards 0.
      for (int k = 0; k < d; ++k) {
        if (grad_v[k] > 0.0) {
          gamma[k] = box.lower()[k];
        } else if (grad_v[k] < 0.0) {
          gamma[k] = box.upper()[k];
        } else {
          gamma[k] = std::clamp(0.0, box.lower()[k], box.upper()[k]);
        }
      }
      break;
    case ControlStructure::quadratic:
      for (int k = 0; k < d; ++k) {
        gamma[k] = std::clamp(-grad_v[k] / (2.0 * f.control_weight), box.lower()[k],
                              box.upper()[k]);
      }
      break;
    case ControlStructure::separable_convex:
      for (int k = 0; k < d; ++k) {
        if (!box.active(k)) {
          gamma[k] = box.lower()[k];
          continue;
        }
        const double p = grad_v[k];
        gamma[k] = golden_section(
            [&](double g) { return f.coordinate_cost(k, g) + p * g; }, box.lower()[k],
            box.upper()[k], options.golden_iterations);
      }
      break;
    case ControlStructure::general: {
      require(options.grid_fallback, ErrorKind::configuration,
              "running cost has no convex structure in the control and grid search is "
              "disabled");
      const int r = std::max(options.grid_resolution, 2);
      std::vector<int> active;
      for (int k = 0; k < d; ++k) {
        if (box.active(k)) active.push_back(k);
      }
      const Vec bbar = coeffs.drift_bbar.eval(t, x, m);
      Vec cand = box.lower();
      double best_val = std::numeric_limits<double>::infinity();
      std::vector<int> idx(active.size(), 0);
      while (true) {
        for (std::size_t a = 0; a < active.size(); ++a) {
          const int k = active[a];
          cand[k] = box.lower()[k] + (box.upper()[k] - box.lower()[k]) * idx[a] / (r - 1);
        }
        const double v = f.eval(t, x, m, cand) + grad_v.dot(cand + bbar);
        if (v < best_val - 1e-14 * std::max(1.0, std::abs(best_val)) ||
            (std::abs(v - best_val) <= 1e-14 * std::max(1.0, std::abs(best_val)) &&
             tie_break_less(cand, gamma))) {
          best_val = std::min(best_val, v);
          gamma = cand;
        }
        std::size_t a = 0;
        while (a < idx.size() && ++idx[a] == r) idx[a++] = 0;
        if (a == idx.size()) break;
      }
      if (active.empty()) gamma = box.lower();
      break;
    }
  }
  const double value = f.eval(t, x, m, gamma) + grad_v.dot(gamma + coeffs.drift_bbar.eval(t, x, m));
  return {gamma, value};
}

}  // namespace mfga
