#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mfga/error.hpp"
#include "mfga/hjb_kfp.hpp"

namespace mfga {

SpaceGrid SpaceGrid::for_box(const AbsorbingDomain& domain, std::size_t nodes_per_axis) {
  require(domain.kind() == DomainKind::box, ErrorKind::configuration,
          "PDE grids are available for box domains only");
  require(domain.dim() == 1 || domain.dim() == 2, ErrorKind::configuration,
          "PDE grids are available for d = 1 or 2 only");
  require(nodes_per_axis >= 3, ErrorKind::configuration, "need at least 3 nodes per axis");
  SpaceGrid g;
  g.dim = domain.dim();
  for (int a = 0; a < g.dim; ++a) {
    g.nodes[a] = nodes_per_axis;
    g.lower[a] = domain.box_lower()[a];
    g.upper[a] = domain.box_upper()[a];
    g.spacing[a] = (g.upper[a] - g.lower[a]) / static_cast<double>(nodes_per_axis - 1);
  }
  return g;
}

Vec SpaceGrid::point(std::size_t k) const {
  const auto c = coords(k);
  Vec x(dim);
  for (int a = 0; a < dim; ++a) {
    x[a] = c[a] + 1 == nodes[a] ? upper[a] : lower[a] + static_cast<double>(c[a]) * spacing[a];
  }
  return x;
}

bool SpaceGrid::boundary(std::size_t k) const {
  const auto c = coords(k);
  for (int a = 0; a < dim; ++a) {
    if (c[a] == 0 || c[a] + 1 == nodes[a]) return true;
  }
  return false;
}

double SpaceGrid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing[a];
  return v;
}

Vec ValueField::gradient(std::size_t j, std::size_t k) const {
  Vec g(dim);
  for (int a = 0; a < dim; ++a) g[a] = gradients[(j * space.size() + k) * dim + a];
  return g;
}

Vec ValueField::control(std::size_t j, std::size_t k) const {
  Vec g(dim);
  for (int a = 0; a < dim; ++a) g[a] = feedback[(j * space.size() + k) * dim + a];
  return g;
}

namespace {

// Cell location and weight for multilinear interpolation along axis a.
std::pair<std::size_t, double> locate(const SpaceGrid& s, int a, double x) {
  const double u = (x - s.lower[a]) / s.spacing[a];
  const double max_cell = static_cast<double>(s.nodes[a] - 2);
  const double cell = std::clamp(std::floor(u), 0.0, max_cell);
  return {static_cast<std::size_t>(cell), std::clamp(u - cell, 0.0, 1.0)};
}

template <class Get>
auto interpolate(const SpaceGrid& s, const Vec& x, const Get& get) {
  const auto [i, wx] = locate(s, 0, x[0]);
  if (s.dim == 1) return (1.0 - wx) * get(s.index(i)) + wx * get(s.index(i + 1));
  const auto [j, wy] = locate(s, 1, x[1]);
  return (1.0 - wy) * ((1.0 - wx) * get(s.index(i, j)) + wx * get(s.index(i + 1, j))) +
         wy * ((1.0 - wx) * get(s.index(i, j + 1)) + wx * get(s.index(i + 1, j + 1)));
}

// Solves (1 + c_lo + c_hi) u_i - c_lo u_{i-1} - c_hi u_{i+1} = r_i on a line
// whose two end values are fixed. Arrays are indexed over the full line.
void thomas(std::span<double> u, std::span<const double> r, double c) {
  const std::size_t n = u.size();
  if (n < 3) return;
  const std::size_t m = n - 2;
  thread_local std::vector<double> cp, dp;
  cp.assign(m, 0.0);
  dp.assign(m, 0.0);
  const double diag = 1.0 + 2.0 * c;
  for (std::size_t i = 0; i < m; ++i) {
    double rhs = r[i + 1];
    if (i == 0) rhs += c * u[0];
    if (i + 1 == m) rhs += c * u[n - 1];
    const double denom = i == 0 ? diag : diag + c * cp[i - 1];
    cp[i] = -c / denom;
    dp[i] = i == 0 ? rhs / denom : (rhs + c * dp[i - 1]) / denom;
  }
  u[m] = dp[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) u[i + 1] = dp[i] - cp[i] * u[i + 2];
}

// Implicit diffusion (I - sum_a c_a D2_a) u = rhs on interior nodes; boundary
// entries of u are held fixed. 1D is a direct solve; 2D uses alternating
// line Gauss-Seidel with a fixed sweep count.
void implicit_diffusion(const SpaceGrid& s, const std::array<double, 2>& c,
                        std::span<const double> rhs, std::span<double> u, int sweeps) {
  if (s.dim == 1) {
    thomas(u, rhs, c[0]);
    return;
  }
  const std::size_t nx = s.nodes[0];
  const std::size_t ny = s.nodes[1];
  std::vector<double> line_u, line_r;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    // x-lines: the y-neighbours enter the right-hand side.
    line_u.resize(nx);
    line_r.resize(nx);
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t k = s.index(i, j);
        line_u[i] = u[k];
        line_r[i] = (rhs[k] + c[1] * (u[s.index(i, j - 1)] + u[s.index(i, j + 1)])) /
                    (1.0 + 2.0 * c[1]);
      }
      // Divide through so the line system has the thomas() form.
      const double cx = c[0] / (1.0 + 2.0 * c[1]);
      thomas(line_u, line_r, cx);
      for (std::size_t i = 1; i + 1 < nx; ++i) u[s.index(i, j)] = line_u[i];
    }
    line_u.resize(ny);
    line_r.resize(ny);
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t k = s.index(i, j);
        line_u[j] = u[k];
        line_r[j] = (rhs[k] + c[0] * (u[s.index(i - 1, j)] + u[s.index(i + 1, j)])) /
                    (1.0 + 2.0 * c[0]);
      }
      const double cy = c[1] / (1.0 + 2.0 * c[0]);
      thomas(line_u, line_r, cy);
      for (std::size_t j = 1; j + 1 < ny; ++j) u[s.index(i, j)] = line_u[j];
    }
  }
}

std::array<double, 2> diffusion_coefficients(const CoefficientSet& coeffs, const SpaceGrid& s,
                                             double dt) {
  const Mat a = coeffs.sigma * coeffs.sigma.transpose();
  require(a.isDiagonal(1e-14), ErrorKind::configuration,
          "PDE path needs a diagonal sigma*sigma^T (no cross-derivative terms)");
  std::array<double, 2> c{0.0, 0.0};
  for (int ax = 0; ax < s.dim; ++ax) c[ax] = dt * 0.5 * a(ax, ax) / (s.spacing[ax] * s.spacing[ax]);
  return c;
}

void check_cfl(const CoefficientSet& coeffs, const TimeGrid& grid, const SpaceGrid& s) {
  const double speed = coeffs.action_space.max_norm() + coeffs.bound_K;
  double inv_h = 0.0;
  for (int a = 0; a < s.dim; ++a) inv_h += 1.0 / s.spacing[a];
  const double ratio = grid.dt * speed * inv_h;
  if (ratio > 1.0 + 1e-12) {
    fail(ErrorKind::configuration,
         fmt::format("stability violation: dt * (max|gamma| + K) / dx = {} > 1 (dt = {}, dx = {})",
                     ratio, grid.dt, s.spacing[0]));
  }
}

void check_space(const CoefficientSet& coeffs, const SpaceGrid& s) {
  require(coeffs.domain.kind() == DomainKind::box && coeffs.dim_d == s.dim &&
              (s.dim == 1 || s.dim == 2),
          ErrorKind::configuration, "PDE path needs a box domain with d = 1 or 2");
}

// Nearest interior node (used to fill boundary entries of derived fields).
std::size_t nearest_interior(const SpaceGrid& s, std::size_t k) {
  auto c = s.coords(k);
  for (int a = 0; a < s.dim; ++a) c[a] = std::clamp<std::size_t>(c[a], 1, s.nodes[a] - 2);
  return s.index(c[0], c[1]);
}

}  // namespace

double ValueField::value_at(std::size_t j, const Vec& x) const {
  const double* slice = values.data() + j * space.size();
  return interpolate(space, x, [&](std::size_t k) { return slice[k]; });
}

void GridFeedback::action(const FeedbackQuery& q, Vec& out) const {
  const ValueField& f = *field_;
  const std::size_t j = f.grid.index_at(q.t);
  const std::size_t base = j * f.space.size();
  out.resize(f.dim);
  for (int a = 0; a < f.dim; ++a) {
    out[a] = interpolate(f.space, q.x,
                         [&](std::size_t k) { return f.feedback[(base + k) * f.dim + a]; });
  }
}

ValueField solve_hjb(const CoefficientSet& coeffs, const TimeGrid& grid, const SpaceGrid& space,
                     const MeasureFlow& mflow, const HjbOptions& options) {
  check_space(coeffs, space);
  require(mflow.means.size() == grid.size(), ErrorKind::precondition,
          "solve_hjb: flow is not defined on the time grid");
  check_cfl(coeffs, grid, space);
  const auto c = diffusion_coefficients(coeffs, space, grid.dt);
  const std::size_t S = space.size();
  const std::size_t n = grid.n_steps;
  const int d = space.dim;

  ValueField vf;
  vf.grid = grid;
  vf.space = space;
  vf.dim = d;
  vf.values.assign(grid.size() * S, 0.0);
  vf.gradients.assign(grid.size() * S * d, 0.0);
  vf.feedback.assign(grid.size() * S * d, 0.0);

  std::vector<Vec> points(S);
  for (std::size_t k = 0; k < S; ++k) points[k] = space.point(k);
  auto mean_at = [&](std::size_t j, const Vec& x) {
    return options.perceived_mean ? options.perceived_mean(j, x) : mflow.means[j];
  };

  // Total drift of the previous slice; selects the upwind direction.
  std::vector<double> prev_drift(S * d, 0.0);

  auto store = [&](std::size_t j, std::size_t k, const Vec& grad, const Vec& gamma) {
    for (int a = 0; a < d; ++a) {
      vf.gradients[(j * S + k) * d + a] = grad[a];
      vf.feedback[(j * S + k) * d + a] = gamma[a];
    }
  };
  auto fill_boundary = [&](std::size_t j) {
    for (std::size_t k = 0; k < S; ++k) {
      if (!space.boundary(k)) continue;
      const std::size_t src = nearest_interior(space, k);
      for (int a = 0; a < d; ++a) {
        vf.gradients[(j * S + k) * d + a] = vf.gradients[(j * S + src) * d + a];
        vf.feedback[(j * S + k) * d + a] = vf.feedback[(j * S + src) * d + a];
      }
    }
  };

  // Terminal slice.
  double* vt = vf.values.data() + n * S;
  for (std::size_t k = 0; k < S; ++k) vt[k] = coeffs.terminal_cost_F.eval(grid.times[n], points[k]);
  for (std::size_t k = 0; k < S; ++k) {
    if (space.boundary(k)) continue;
    const auto co = space.coords(k);
    Vec grad(d);
    for (int a = 0; a < d; ++a) {
      const std::size_t step = a == 0 ? 1 : space.nodes[0];
      (void)co;
      grad[a] = (vt[k + step] - vt[k - step]) / (2.0 * space.spacing[a]);
    }
    const Vec y = mean_at(n, points[k]);
    const HamiltonianMin h = hamiltonian_min(coeffs, grid.times[n], points[k], y, grad,
                                             options.minimizer);
    const Vec drift = h.gamma + coeffs.drift_bbar.eval(grid.times[n], points[k], y);
    for (int a = 0; a < d; ++a) prev_drift[k * d + a] = drift[a];
    store(n, k, grad, h.gamma);
  }
  fill_boundary(n);

  std::vector<double> rhs(S, 0.0);
  for (std::size_t j = n; j-- > 0;) {
    const double t = grid.times[j];
    const double* next = vf.values.data() + (j + 1) * S;
    double* cur = vf.values.data() + j * S;
    for (std::size_t k = 0; k < S; ++k) {
      if (space.boundary(k)) {
        cur[k] = coeffs.terminal_cost_F.eval(t, points[k]);
        continue;
      }
      Vec dplus(d), dminus(d);
      for (int a = 0; a < d; ++a) {
        const std::size_t step = a == 0 ? 1 : space.nodes[0];
        dplus[a] = (next[k + step] - next[k]) / space.spacing[a];
        dminus[a] = (next[k] - next[k - step]) / space.spacing[a];
      }
      auto upwind = [&](const Vec& drift) {
        Vec p(d);
        for (int a = 0; a < d; ++a) {
          p[a] = drift[a] > 0.0 ? dplus[a] : drift[a] < 0.0 ? dminus[a] : 0.5 * (dplus[a] + dminus[a]);
        }
        return p;
      };
      const Vec& x = points[k];
      const Vec y = mean_at(j, x);
      const Vec bbar = coeffs.drift_bbar.eval(t, x, y);
      Vec prev(d);
      for (int a = 0; a < d; ++a) prev[a] = prev_drift[k * d + a];
      Vec p = upwind(prev);
      HamiltonianMin h = hamiltonian_min(coeffs, t, x, y, p, options.minimizer);
      Vec drift = h.gamma + bbar;
      // One inner pass: redo the minimization if the upwind side flipped.
      const Vec p2 = upwind(drift);
      if (p2 != p) {
        const Vec first = drift;
        h = hamiltonian_min(coeffs, t, x, y, p2, options.minimizer);
        drift = h.gamma + bbar;
        // Each side points the drift at the other one: a kink of V, where
        // the monotone choice is zero drift (as far as the box allows).
        bool cycled = false;
        for (int a = 0; a < d; ++a) {
          if (first[a] * drift[a] < 0.0 && coeffs.action_space.active(a)) {
            h.gamma[a] = std::clamp(-bbar[a], coeffs.action_space.lower()[a],
                                    coeffs.action_space.upper()[a]);
            cycled = true;
          }
        }
        if (cycled) drift = h.gamma + bbar;
      }
      const Vec pf = upwind(drift);
      const double hval = coeffs.running_cost_f.eval(t, x, y, h.gamma) + pf.dot(drift);
      rhs[k] = next[k] + grid.dt * hval;
      cur[k] = next[k];
      for (int a = 0; a < d; ++a) prev_drift[k * d + a] = drift[a];
      store(j, k, pf, h.gamma);
    }
    fill_boundary(j);
    implicit_diffusion(space, c, rhs, std::span<double>(cur, S), options.linear_sweeps);
  }
  return vf;
}

std::vector<double> initial_density(const InitialLaw& law, const SpaceGrid& space) {
  const std::size_t S = space.size();
  std::vector<double> m(S, 0.0);
  if (law.atomic()) {
    // Cloud-in-cell deposit of every atom.
    for (const auto& [atom, weight] : law.atoms()) {
      const auto [i, wx] = locate(space, 0, atom[0]);
      if (space.dim == 1) {
        m[space.index(i)] += weight * (1.0 - wx);
        m[space.index(i + 1)] += weight * wx;
      } else {
        const auto [j, wy] = locate(space, 1, atom[1]);
        m[space.index(i, j)] += weight * (1.0 - wx) * (1.0 - wy);
        m[space.index(i + 1, j)] += weight * wx * (1.0 - wy);
        m[space.index(i, j + 1)] += weight * (1.0 - wx) * wy;
        m[space.index(i + 1, j + 1)] += weight * wx * wy;
      }
    }
  } else {
    for (std::size_t k = 0; k < S; ++k) m[k] = law.density(space.point(k));
  }
  double mass = 0.0;
  for (std::size_t k = 0; k < S; ++k) {
    if (space.boundary(k)) m[k] = 0.0;
    mass += m[k];
  }
  require(mass > 0.0, ErrorKind::precondition, "initial law has no mass on interior nodes");
  const double scale = 1.0 / (mass * space.cell_volume());
  for (double& v : m) v *= scale;
  return m;
}

DensityField solve_kfp(const CoefficientSet& coeffs, const TimeGrid& grid,
                       const SpaceGrid& space, const ValueField& value,
                       std::span<const double> initial, const MeasureFlow& mflow,
                       int linear_sweeps) {
  check_space(coeffs, space);
  const std::size_t S = space.size();
  require(initial.size() == S, ErrorKind::precondition, "initial density has wrong size");
  require(value.space.size() == S && value.grid.size() == grid.size(), ErrorKind::precondition,
          "value field does not match the grids");
  require(mflow.means.size() == grid.size(), ErrorKind::precondition,
          "solve_kfp: flow is not defined on the time grid");
  check_cfl(coeffs, grid, space);
  const auto c = diffusion_coefficients(coeffs, space, grid.dt);
  const double vol = space.cell_volume();
  const int d = space.dim;

  DensityField df;
  df.grid = grid;
  df.space = space;
  df.densities.assign(grid.size() * S, 0.0);
  df.masses.assign(grid.size(), 0.0);
  std::copy(initial.begin(), initial.end(), df.densities.begin());
  double mass0 = 0.0;
  for (std::size_t k = 0; k < S; ++k) {
    require(initial[k] >= 0.0, ErrorKind::precondition, "initial density must be nonnegative");
    if (space.boundary(k)) {
      df.densities[k] = 0.0;
    } else {
      mass0 += initial[k] * vol;
    }
  }
  df.masses[0] = mass0;

  std::vector<Vec> points(S);
  for (std::size_t k = 0; k < S; ++k) points[k] = space.point(k);
  std::vector<double> drift(S * d, 0.0);
  std::vector<double> rhs(S, 0.0);

  for (std::size_t j = 0; j < grid.n_steps; ++j) {
    const double t = grid.times[j];
    const double* cur = df.densities.data() + j * S;
    double* nxt = df.densities.data() + (j + 1) * S;
    for (std::size_t k = 0; k < S; ++k) {
      const Vec a = value.control(j, k) + coeffs.drift_bbar.eval(t, points[k], mflow.means[j]);
      for (int ax = 0; ax < d; ++ax) drift[k * d + ax] = a[ax];
    }
    for (std::size_t k = 0; k < S; ++k) {
      nxt[k] = 0.0;
      if (space.boundary(k)) {
        rhs[k] = 0.0;
        continue;
      }
      double div = 0.0;
      for (int ax = 0; ax < d; ++ax) {
        const std::size_t step = ax == 0 ? 1 : space.nodes[0];
        auto flux = [&](std::size_t left, std::size_t right) {
          return std::max(drift[left * d + ax], 0.0) * cur[left] +
                 std::min(drift[right * d + ax], 0.0) * cur[right];
        };
        div += (flux(k, k + step) - flux(k - step, k)) / space.spacing[ax];
      }
      rhs[k] = cur[k] - grid.dt * div;
      nxt[k] = cur[k];
    }
    implicit_diffusion(space, c, rhs, std::span<double>(nxt, S), linear_sweeps);
    double mass = 0.0;
    for (std::size_t k = 0; k < S; ++k) {
      if (nxt[k] < -1e-12) {
        fail(ErrorKind::scheme,
             fmt::format("negative density {} at t = {} (node {})", nxt[k], grid.times[j + 1], k));
      }
      if (nxt[k] < 0.0) nxt[k] = 0.0;
      mass += nxt[k] * vol;
    }
    df.masses[j + 1] = mass;
  }
  return df;
}

MeasureFlow renormalize(const DensityField& density, const CoefficientSet& coeffs,
                        double mass_floor) {
  const SpaceGrid& s = density.space;
  const std::size_t S = s.size();
  const double vol = s.cell_volume();
  std::vector<Vec> points;
  std::vector<std::size_t> interior;
  for (std::size_t k = 0; k < S; ++k) {
    if (s.boundary(k)) continue;
    interior.push_back(k);
    points.push_back(s.point(k));
  }
  std::vector<Vec> w(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) w[i] = coeffs.integrand_w.eval(points[i]);

  MeasureFlow flow;
  flow.grid = density.grid;
  flow.survival.resize(density.grid.size());
  flow.means.resize(density.grid.size());
  flow.histograms.emplace();
  flow.histograms->resize(density.grid.size());
  for (std::size_t j = 0; j < density.grid.size(); ++j) {
    const double mass = density.masses[j];
    if (!(mass > mass_floor)) throw ExtinctionError(j, mass);
    Histogram& h = (*flow.histograms)[j];
    h.points = points;
    h.weights.resize(points.size());
    Vec mean = Vec::Zero(coeffs.dim_d0);
    for (std::size_t i = 0; i < interior.size(); ++i) {
      const double weight = density.density(j, interior[i]) * vol / mass;
      h.weights[i] = weight;
      mean += weight * w[i];
    }
    flow.survival[j] = mass;
    flow.means[j] = mean;
  }
  return flow;
}

}  // namespace mfga
