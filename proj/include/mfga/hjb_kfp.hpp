#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfga/feedback.hpp"
#include "mfga/measure_flow.hpp"
#include "mfga/model.hpp"
#include "mfga/time_grid.hpp"

namespace mfga {

/// Tensor grid on the closure of a box domain (d = 1 or 2). Nodes include
/// both ends of every axis; end nodes lie on the boundary.
struct SpaceGrid {
  int dim = 1;
  std::array<std::size_t, 2> nodes{1, 1};
  std::array<double, 2> lower{0.0, 0.0};
  std::array<double, 2> upper{0.0, 0.0};
  std::array<double, 2> spacing{0.0, 0.0};

  static SpaceGrid for_box(const AbsorbingDomain& domain, std::size_t nodes_per_axis);

  std::size_t size() const { return nodes[0] * nodes[1]; }
  std::size_t index(std::size_t i, std::size_t j = 0) const { return i + nodes[0] * j; }
  std::array<std::size_t, 2> coords(std::size_t k) const { return {k % nodes[0], k / nodes[0]}; }
  Vec point(std::size_t k) const;
  bool boundary(std::size_t k) const;
  /// h^d, the quadrature weight of an interior node.
  double cell_volume() const;
};

struct MinimizerOptions {
  /// Permit dense grid search when f has no exploitable structure in gamma.
  bool grid_fallback = true;
  int grid_resolution = 41;
  int golden_iterations = 100;
};

struct HamiltonianMin {
  Vec gamma;
  double value = 0.0;
};

/// min over gamma in the action box of f(t,x,m,gamma) + p.(gamma + bbar(t,x,m)).
/// Ties go to the smallest |gamma|, then the lexicographically smallest.
HamiltonianMin hamiltonian_min(const CoefficientSet& coeffs, double t, const Vec& x,
                               const Vec& m, const Vec& grad_v,
                               const MinimizerOptions& options = {});

/// V, its upwind gradient and the induced feedback on a (time x space) grid.
struct ValueField {
  TimeGrid grid;
  SpaceGrid space;
  int dim = 1;
  std::vector<double> values;     // [j * S + k]
  std::vector<double> gradients;  // [(j * S + k) * d + a]
  std::vector<double> feedback;   // [(j * S + k) * d + a]

  double value(std::size_t j, std::size_t k) const { return values[j * space.size() + k]; }
  Vec gradient(std::size_t j, std::size_t k) const;
  Vec control(std::size_t j, std::size_t k) const;
  /// Linear interpolation of V(t_j, .) at x.
  double value_at(std::size_t j, const Vec& x) const;
};

/// Nonnegative density with zero boundary values.
struct DensityField {
  TimeGrid grid;
  SpaceGrid space;
  std::vector<double> densities;  // [j * S + k]
  std::vector<double> masses;

  double density(std::size_t j, std::size_t k) const { return densities[j * space.size() + k]; }
};

struct HjbOptions {
  MinimizerOptions minimizer;
  /// Alternating line Gauss-Seidel sweeps for the 2D implicit diffusion solve.
  int linear_sweeps = 40;
  /// Mean argument seen at (t_j, x); defaults to mflow.means[j]. Used to let a
  /// deviating player account for its own share of a finite population.
  std::function<Vec(std::size_t j, const Vec& x)> perceived_mean;
};

/// Backward semi-implicit sweep: explicit upwind Hamiltonian, implicit
/// diffusion, V = F on the boundary and at T.
ValueField solve_hjb(const CoefficientSet& coeffs, const TimeGrid& grid, const SpaceGrid& space,
                     const MeasureFlow& mflow, const HjbOptions& options = {});

/// Discretized initial law on the grid with unit trapezoid mass.
std::vector<double> initial_density(const InitialLaw& law, const SpaceGrid& space);

/// Forward conservative upwind sweep with implicit diffusion and zero
/// boundary density; the drift is feedback + bbar(t, x, mflow.means[j]).
DensityField solve_kfp(const CoefficientSet& coeffs, const TimeGrid& grid,
                       const SpaceGrid& space, const ValueField& value,
                       std::span<const double> initial, const MeasureFlow& mflow,
                       int linear_sweeps = 40);

/// Conditional flow m(t,.)/mass(t): survival, w-means and normalized slices.
MeasureFlow renormalize(const DensityField& density, const CoefficientSet& coeffs,
                        double mass_floor = 1e-8);

/// Markov feedback read off a ValueField by interpolation in x at the
/// slice t_j <= t.
class GridFeedback final : public Feedback {
 public:
  explicit GridFeedback(std::shared_ptr<const ValueField> field) : field_(std::move(field)) {}
  void action(const FeedbackQuery& q, Vec& out) const override;

 private:
  std::shared_ptr<const ValueField> field_;
};

// Serialization: CSV (t, x..., value) and a binary layout
//   magic "MFGAFLD1", u32 version = 1, u32 kind (0 value, 1 density),
//   u64 n_steps, f64 horizon, u32 dim, u32 pad, u64 nodes[2],
//   f64 lower[2], f64 upper[2], then row-major little-endian f64 payload:
//   value fields: values, gradients, feedback; density fields: densities, masses.
void write_csv(std::ostream& out, const ValueField& field);
void write_csv(std::ostream& out, const DensityField& field);
void write_binary(std::ostream& out, const ValueField& field);
void write_binary(std::ostream& out, const DensityField& field);
ValueField read_value_field(std::istream& in);
DensityField read_density_field(std::istream& in);

}  // namespace mfga
