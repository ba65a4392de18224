#include <algorithm>
#include <cmath>

#include "mfga/error.hpp"
#include "mfga/json_io.hpp"
#include "mfga/model.hpp"

namespace mfga {

using io::json;

ActionBox::ActionBox(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() == upper_.size() && lower_.size() > 0, ErrorKind::configuration,
          "action box bounds must have equal positive length");
  for (int k = 0; k < lower_.size(); ++k) {
    require(std::isfinite(lower_[k]) && std::isfinite(upper_[k]) && lower_[k] <= upper_[k],
            ErrorKind::configuration, "action box requires finite lower <= upper");
  }
}

std::vector<bool> ActionBox::active_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(dim()));
  for (int k = 0; k < dim(); ++k) mask[static_cast<std::size_t>(k)] = active(k);
  return mask;
}

bool ActionBox::contains(const Vec& gamma, double tol) const {
  if (gamma.size() != lower_.size()) return false;
  for (int k = 0; k < dim(); ++k) {
    if (!(gamma[k] >= lower_[k] - tol && gamma[k] <= upper_[k] + tol)) return false;
  }
  return true;
}

Vec ActionBox::project(const Vec& gamma) const {
  Vec out(dim());
  for (int k = 0; k < dim(); ++k) out[k] = std::clamp(gamma[k], lower_[k], upper_[k]);
  return out;
}

double ActionBox::max_norm() const {
  double sq = 0.0;
  for (int k = 0; k < dim(); ++k) {
    const double m = std::max(std::abs(lower_[k]), std::abs(upper_[k]));
    sq += m * m;
  }
  return std::sqrt(sq);
}

// ---------------------------------------------------------------------------

AbsorbingDomain AbsorbingDomain::box(Vec lower, Vec upper) {
  require(lower.size() == upper.size() && lower.size() > 0, ErrorKind::configuration,
          "box domain bounds must have equal positive length");
  for (int k = 0; k < lower.size(); ++k) {
    require(lower[k] < upper[k], ErrorKind::configuration,
            "box domain must be nonempty (lower < upper)");
  }
  AbsorbingDomain d;
  d.kind_ = DomainKind::box;
  d.bound_lower_ = std::move(lower);
  d.bound_upper_ = std::move(upper);
  d.radius_bound_ = d.bound_lower_.cwiseAbs().cwiseMax(d.bound_upper_.cwiseAbs()).norm();
  return d;
}

AbsorbingDomain AbsorbingDomain::ball(Vec center, double radius) {
  require(center.size() > 0 && radius > 0.0, ErrorKind::configuration,
          "ball domain needs a center and a positive radius");
  AbsorbingDomain d;
  d.kind_ = DomainKind::ball;
  d.center_ = center;
  d.radius_ = radius;
  d.bound_lower_ = center.array() - radius;
  d.bound_upper_ = center.array() + radius;
  d.radius_bound_ = center.norm() + radius;
  return d;
}

AbsorbingDomain AbsorbingDomain::halfspaces(Mat normals, Vec offsets, double bounding_radius) {
  require(normals.rows() == offsets.size() && normals.rows() > 0 && normals.cols() > 0,
          ErrorKind::configuration, "halfspace domain needs one offset per normal");
  require(normals.cols() <= kMaxDim, ErrorKind::configuration, "dimension too large");
  require(bounding_radius > 0.0, ErrorKind::configuration,
          "halfspace domain needs a positive bounding radius");
  AbsorbingDomain d;
  d.kind_ = DomainKind::halfspace_intersection;
  const int dim = static_cast<int>(normals.cols());
  d.normals_ = std::move(normals);
  d.offsets_ = std::move(offsets);
  d.bound_lower_ = Vec::Constant(dim, -bounding_radius);
  d.bound_upper_ = Vec::Constant(dim, bounding_radius);
  d.radius_bound_ = bounding_radius;
  return d;
}

AbsorbingDomain AbsorbingDomain::counterexample() {
  AbsorbingDomain d;
  d.kind_ = DomainKind::counterexample;
  d.bound_lower_ = Vec(3);
  d.bound_lower_ << -4.0, -2.0, -1.0;
  d.bound_upper_ = Vec(3);
  d.bound_upper_ << 1.0 + std::exp(1.2), 2.0, 2.2;
  d.radius_bound_ = d.bound_lower_.cwiseAbs().cwiseMax(d.bound_upper_.cwiseAbs()).norm();
  return d;
}

bool AbsorbingDomain::contains(const Vec& x) const {
  if (x.size() != bound_lower_.size()) return false;
  switch (kind_) {
    case DomainKind::box:
      for (int k = 0; k < x.size(); ++k) {
        if (!(x[k] > bound_lower_[k] && x[k] < bound_upper_[k])) return false;
      }
      return true;
    case DomainKind::ball:
      return (x - center_).squaredNorm() < radius_ * radius_;
    case DomainKind::halfspace_intersection: {
      if (!(x.norm() < radius_bound_)) return false;
      for (Eigen::Index i = 0; i < normals_.rows(); ++i) {
        double dot = 0.0;
        for (int k = 0; k < x.size(); ++k) dot += normals_(i, k) * x[k];
        if (!(dot < offsets_[i])) return false;
      }
      return true;
    }
    case DomainKind::counterexample:
      return x[0] > -4.0 && x[1] > -2.0 && x[1] < 2.0 && x[2] > -1.0 && x[2] < 2.2 &&
             x[0] < 1.0 + std::exp(x[2] - 1.0);
  }
  return false;
}

json AbsorbingDomain::to_json() const {
  switch (kind_) {
    case DomainKind::box:
      return {{"kind", "box"},
              {"lower", io::vec_to_json(bound_lower_)},
              {"upper", io::vec_to_json(bound_upper_)}};
    case DomainKind::ball:
      return {{"kind", "ball"},
              {"center", io::vec_to_json(center_)},
              {"radius", io::real_to_json(radius_)}};
    case DomainKind::halfspace_intersection:
      return {{"kind", "halfspace_intersection"},
              {"normals", io::mat_to_json(normals_)},
              {"offsets", io::vec_to_json(offsets_)},
              {"bounding_radius", io::real_to_json(radius_bound_)}};
    case DomainKind::counterexample:
      return {{"kind", "counterexample"}};
  }
  return {};
}

AbsorbingDomain AbsorbingDomain::from_json(const json& j) {
  const std::string kind = io::at(j, "kind", "domain").get<std::string>();
  if (kind == "box") {
    return box(io::vec_from_json(io::at(j, "lower", "domain")),
               io::vec_from_json(io::at(j, "upper", "domain")));
  }
  if (kind == "ball") {
    return ball(io::vec_from_json(io::at(j, "center", "domain")),
                io::real_from_json(io::at(j, "radius", "domain")));
  }
  if (kind == "halfspace_intersection") {
    Mat normals = io::mat_from_json(io::at(j, "normals", "domain"));
    Vec offsets = io::vec_from_json(io::at(j, "offsets", "domain"));
    return halfspaces(std::move(normals), std::move(offsets),
                      io::real_from_json(io::at(j, "bounding_radius", "domain")));
  }
  if (kind == "counterexample") return counterexample();
  fail(ErrorKind::configuration, "unknown domain kind '" + kind + "'");
}

// ---------------------------------------------------------------------------

InitialLaw InitialLaw::dirac(Vec point) {
  InitialLaw law;
  law.kind_ = InitialLawKind::dirac;
  law.a_ = std::move(point);
  return law;
}

InitialLaw InitialLaw::product_of_atoms(std::vector<AtomAxis> axes) {
  require(!axes.empty() && axes.size() <= static_cast<std::size_t>(kMaxDim),
          ErrorKind::configuration, "product law needs 1..kMaxDim axes");
  for (auto& axis : axes) {
    require(!axis.values.empty() && axis.values.size() == axis.weights.size(),
            ErrorKind::configuration, "each atom axis needs matching values and weights");
    double total = 0.0;
    for (double w : axis.weights) {
      require(w >= 0.0, ErrorKind::configuration, "atom weights must be nonnegative");
      total += w;
    }
    require(std::abs(total - 1.0) < 1e-12, ErrorKind::configuration,
            "atom weights must sum to one");
  }
  InitialLaw law;
  law.kind_ = InitialLawKind::product_of_atoms;
  law.axes_ = std::move(axes);
  return law;
}

InitialLaw InitialLaw::uniform_on_box(Vec lower, Vec upper) {
  require(lower.size() == upper.size() && lower.size() > 0, ErrorKind::configuration,
          "uniform law bounds must have equal positive length");
  for (int k = 0; k < lower.size(); ++k) {
    require(lower[k] < upper[k], ErrorKind::configuration, "uniform law box is empty");
  }
  InitialLaw law;
  law.kind_ = InitialLawKind::uniform_on_box;
  law.a_ = std::move(lower);
  law.b_ = std::move(upper);
  return law;
}

InitialLaw InitialLaw::gaussian_truncated(Vec mean, Vec stddev) {
  require(mean.size() == stddev.size() && mean.size() > 0, ErrorKind::configuration,
          "gaussian law needs matching mean and stddev");
  require((stddev.array() > 0.0).all(), ErrorKind::configuration,
          "gaussian law needs positive stddev");
  InitialLaw law;
  law.kind_ = InitialLawKind::gaussian_truncated;
  law.a_ = std::move(mean);
  law.b_ = std::move(stddev);
  return law;
}

int InitialLaw::dim() const {
  if (kind_ == InitialLawKind::product_of_atoms) return static_cast<int>(axes_.size());
  return static_cast<int>(a_.size());
}

Vec InitialLaw::sample(const NoiseStream& stream, const AbsorbingDomain& domain) const {
  const int d = dim();
  switch (kind_) {
    case InitialLawKind::dirac:
      return a_;
    case InitialLawKind::product_of_atoms: {
      Vec x(d);
      for (int k = 0; k < d; ++k) {
        const double u = stream.uniform_pair(0, DrawPurpose::initial_state,
                                             static_cast<std::uint32_t>(k / 2))[k % 2];
        const auto& axis = axes_[static_cast<std::size_t>(k)];
        double cumulative = 0.0;
        x[k] = axis.values.back();
        for (std::size_t i = 0; i < axis.values.size(); ++i) {
          cumulative += axis.weights[i];
          if (u < cumulative) {
            x[k] = axis.values[i];
            break;
          }
        }
      }
      return x;
    }
    case InitialLawKind::uniform_on_box: {
      Vec x(d);
      for (int k = 0; k < d; ++k) {
        const double u = stream.uniform_pair(0, DrawPurpose::initial_state,
                                             static_cast<std::uint32_t>(k / 2))[k % 2];
        x[k] = a_[k] + u * (b_[k] - a_[k]);
      }
      return x;
    }
    case InitialLawKind::gaussian_truncated: {
      constexpr std::uint32_t kMaxAttempts = 100000;
      Vec z(d);
      for (std::uint32_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
        stream.normals(attempt, d, z, DrawPurpose::initial_state);
        Vec x = a_ + b_.cwiseProduct(z);
        if (domain.contains(x)) return x;
      }
      fail(ErrorKind::precondition, "truncated gaussian law has negligible mass in O");
    }
  }
  return a_;
}

std::vector<std::pair<Vec, double>> InitialLaw::atoms() const {
  require(atomic(), ErrorKind::precondition, "atoms() requires an atomic initial law");
  if (kind_ == InitialLawKind::dirac) return {{a_, 1.0}};
  std::vector<std::pair<Vec, double>> out{{Vec(0), 1.0}};
  for (const auto& axis : axes_) {
    std::vector<std::pair<Vec, double>> next;
    for (const auto& [prefix, weight] : out) {
      for (std::size_t i = 0; i < axis.values.size(); ++i) {
        if (axis.weights[i] == 0.0) continue;
        Vec x(prefix.size() + 1);
        x.head(prefix.size()) = prefix;
        x[prefix.size()] = axis.values[i];
        next.emplace_back(std::move(x), weight * axis.weights[i]);
      }
    }
    out = std::move(next);
  }
  return out;
}

double InitialLaw::density(const Vec& x) const {
  switch (kind_) {
    case InitialLawKind::uniform_on_box:
      for (int k = 0; k < x.size(); ++k) {
        if (x[k] < a_[k] || x[k] > b_[k]) return 0.0;
      }
      return 1.0;
    case InitialLawKind::gaussian_truncated: {
      const double q = ((x - a_).array() / b_.array()).square().sum();
      return std::exp(-0.5 * q);
    }
    default:
      fail(ErrorKind::precondition, "density() requires a continuous initial law");
  }
}

json InitialLaw::to_json() const {
  switch (kind_) {
    case InitialLawKind::dirac:
      return {{"kind", "dirac"}, {"point", io::vec_to_json(a_)}};
    case InitialLawKind::product_of_atoms: {
      json axes = json::array();
      for (const auto& axis : axes_) {
        json values = json::array();
        json weights = json::array();
        for (double v : axis.values) values.push_back(io::real_to_json(v));
        for (double w : axis.weights) weights.push_back(io::real_to_json(w));
        axes.push_back({{"values", values}, {"weights", weights}});
      }
      return {{"kind", "product_of_atoms"}, {"axes", axes}};
    }
    case InitialLawKind::uniform_on_box:
      return {{"kind", "uniform_on_box"},
              {"lower", io::vec_to_json(a_)},
              {"upper", io::vec_to_json(b_)}};
    case InitialLawKind::gaussian_truncated:
      return {{"kind", "gaussian_truncated"},
              {"mean", io::vec_to_json(a_)},
              {"stddev", io::vec_to_json(b_)}};
  }
  return {};
}

InitialLaw InitialLaw::from_json(const json& j) {
  const std::string kind = io::at(j, "kind", "initial_law").get<std::string>();
  if (kind == "dirac") return dirac(io::vec_from_json(io::at(j, "point", "initial_law")));
  if (kind == "product_of_atoms") {
    std::vector<AtomAxis> axes;
    for (const auto& a : io::at(j, "axes", "initial_law")) {
      AtomAxis axis;
      for (const auto& v : io::at(a, "values", "initial_law axis")) {
        axis.values.push_back(io::real_from_json(v));
      }
      for (const auto& w : io::at(a, "weights", "initial_law axis")) {
        axis.weights.push_back(io::real_from_json(w));
      }
      axes.push_back(std::move(axis));
    }
    return product_of_atoms(std::move(axes));
  }
  if (kind == "uniform_on_box") {
    return uniform_on_box(io::vec_from_json(io::at(j, "lower", "initial_law")),
                          io::vec_from_json(io::at(j, "upper", "initial_law")));
  }
  if (kind == "gaussian_truncated") {
    return gaussian_truncated(io::vec_from_json(io::at(j, "mean", "initial_law")),
                              io::vec_from_json(io::at(j, "stddev", "initial_law")));
  }
  fail(ErrorKind::configuration, "unknown initial law kind '" + kind + "'");
}

}  // namespace mfga
