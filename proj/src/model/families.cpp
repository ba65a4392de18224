#include <algorithm>
#include <cmath>

#include "mfga/error.hpp"
#include "mfga/json_io.hpp"
#include "mfga/model.hpp"

namespace mfga {

using io::json;

namespace {

const json& params_of(const json& descriptor) {
  static const json kEmpty = json::object();
  if (descriptor.contains("params")) return descriptor.at("params");
  return kEmpty;
}

std::string family_of(const json& descriptor, const std::string& context) {
  return io::at(descriptor, "family", context).get<std::string>();
}

double real_or(const json& params, const char* key, double fallback) {
  return params.contains(key) ? io::real_from_json(params.at(key)) : fallback;
}

Vec vec_or(const json& params, const char* key, int size, const std::string& context) {
  if (!params.contains(key)) return Vec::Zero(size);
  Vec v = io::vec_from_json(params.at(key));
  require(v.size() == size, ErrorKind::configuration,
          context + ": '" + key + "' has wrong length");
  return v;
}

Mat mat_or(const json& params, const char* key, int rows, int cols, const std::string& context) {
  if (!params.contains(key)) return Mat::Zero(rows, cols);
  Mat m = io::mat_from_json(params.at(key));
  require(m.rows() == rows && m.cols() == cols, ErrorKind::configuration,
          context + ": '" + key + "' has wrong shape");
  return m;
}

}  // namespace

Drift make_drift(const json& descriptor, int d, int d0) {
  const std::string family = family_of(descriptor, "drift");
  const json& p = params_of(descriptor);
  Drift out;
  out.family = family;
  if (family == "zero") {
    out.params = json::object();
    out.eval = [d](double, const Vec&, const Vec&) { return Vec(Vec::Zero(d)); };
  } else if (family == "constant") {
    Vec value = vec_or(p, "value", d, "drift");
    out.params = {{"value", io::vec_to_json(value)}};
    out.eval = [value](double, const Vec&, const Vec&) { return value; };
  } else if (family == "affine") {
    Mat a = mat_or(p, "state_matrix", d, d, "drift");
    Mat b = mat_or(p, "measure_matrix", d, d0, "drift");
    Vec c = vec_or(p, "offset", d, "drift");
    out.params = {{"state_matrix", io::mat_to_json(a)},
                  {"measure_matrix", io::mat_to_json(b)},
                  {"offset", io::vec_to_json(c)}};
    out.measure_dependent = !b.isZero(0.0);
    out.eval = [a, b, c](double, const Vec& x, const Vec& y) {
      Vec r = c;
      r.noalias() += a * x;
      r.noalias() += b * y;
      return r;
    };
  } else if (family == "saturated_norm") {
    // offset - direction * min(|y|, cap)
    Vec offset = vec_or(p, "offset", d, "drift");
    Vec direction = vec_or(p, "direction", d, "drift");
    const double cap = real_or(p, "cap", 0.0);
    require(cap >= 0.0, ErrorKind::configuration, "drift: cap must be nonnegative");
    out.params = {{"offset", io::vec_to_json(offset)},
                  {"direction", io::vec_to_json(direction)},
                  {"cap", io::real_to_json(cap)}};
    out.measure_dependent = !direction.isZero(0.0) && cap > 0.0;
    out.eval = [offset, direction, cap](double, const Vec&, const Vec& y) {
      return Vec(offset - direction * std::min(y.norm(), cap));
    };
  } else {
    fail(ErrorKind::configuration, "unknown drift family '" + family + "'");
  }
  return out;
}

MeasureIntegrand make_integrand(const json& descriptor, int d, int d0) {
  const std::string family = family_of(descriptor, "w");
  const json& p = params_of(descriptor);
  MeasureIntegrand out;
  out.family = family;
  Mat m;
  if (family == "linear") {
    m = mat_or(p, "matrix", d0, d, "w");
  } else if (family == "coordinate") {
    require(d0 == 1, ErrorKind::configuration, "w: coordinate family needs d0 = 1");
    const int index = io::at(p, "index", "w").get<int>();
    require(index >= 0 && index < d, ErrorKind::configuration, "w: index out of range");
    m = Mat::Zero(1, d);
    m(0, index) = 1.0;
  } else {
    fail(ErrorKind::configuration, "unknown w family '" + family + "'");
  }
  const double clip = real_or(p, "clip", 0.0);
  require(clip >= 0.0, ErrorKind::configuration, "w: clip must be nonnegative");
  out.params = p.contains("index") ? json{{"index", p.at("index")}}
                                   : json{{"matrix", io::mat_to_json(m)}};
  if (clip > 0.0) out.params["clip"] = io::real_to_json(clip);
  out.eval = [m, clip](const Vec& x) {
    Vec y = m * x;
    if (clip > 0.0) y = y.cwiseMax(-clip).cwiseMin(clip);
    return y;
  };
  return out;
}

RunningCost make_running_cost(const json& descriptor, int d, int d0) {
  const std::string family = family_of(descriptor, "f");
  const json& p = params_of(descriptor);
  RunningCost out;
  out.family = family;
  if (family == "constant") {
    const double value = real_or(p, "value", 0.0);
    out.params = {{"value", io::real_to_json(value)}};
    out.structure = ControlStructure::independent;
    out.eval = [value](double, const Vec&, const Vec&, const Vec&) { return value; };
  } else if (family == "quadratic") {
    // c + a_g |gamma|^2 + a_x |x - x_c|^2 + a_y |y - y_c|^2
    const double c = real_or(p, "constant", 0.0);
    const double ag = real_or(p, "control", 0.0);
    const double ax = real_or(p, "state", 0.0);
    const double ay = real_or(p, "measure", 0.0);
    Vec xc = vec_or(p, "state_center", d, "f");
    Vec yc = vec_or(p, "measure_center", d0, "f");
    require(ag >= 0.0, ErrorKind::configuration, "f: control weight must be nonnegative");
    out.params = {{"constant", io::real_to_json(c)},     {"control", io::real_to_json(ag)},
                  {"state", io::real_to_json(ax)},       {"measure", io::real_to_json(ay)},
                  {"state_center", io::vec_to_json(xc)}, {"measure_center", io::vec_to_json(yc)}};
    out.structure = ag > 0.0 ? ControlStructure::quadratic : ControlStructure::independent;
    out.control_weight = ag;
    out.measure_dependent = ay != 0.0;
    out.eval = [=](double, const Vec& x, const Vec& y, const Vec& g) {
      return c + ag * g.squaredNorm() + ax * (x - xc).squaredNorm() +
             ay * (y - yc).squaredNorm();
    };
  } else if (family == "power_control") {
    // c + a_x |x|^2 + weight * sum_k |gamma_k|^q, q >= 1
    const double c = real_or(p, "constant", 0.0);
    const double ax = real_or(p, "state", 0.0);
    const double weight = real_or(p, "weight", 1.0);
    const double q = real_or(p, "exponent", 2.0);
    require(q >= 1.0 && weight >= 0.0, ErrorKind::configuration,
            "f: power_control needs exponent >= 1 and weight >= 0");
    out.params = {{"constant", io::real_to_json(c)},
                  {"state", io::real_to_json(ax)},
                  {"weight", io::real_to_json(weight)},
                  {"exponent", io::real_to_json(q)}};
    out.structure = ControlStructure::separable_convex;
    out.coordinate_cost = [weight, q](int, double g) { return weight * std::pow(std::abs(g), q); };
    out.eval = [=](double, const Vec& x, const Vec&, const Vec& g) {
      double s = 0.0;
      for (int k = 0; k < g.size(); ++k) s += std::pow(std::abs(g[k]), q);
      return c + ax * x.squaredNorm() + weight * s;
    };
  } else if (family == "oscillating_control") {
    // c + a (1 + cos(omega * sum_k gamma_k)); not convex in gamma.
    const double c = real_or(p, "constant", 0.0);
    const double a = real_or(p, "amplitude", 1.0);
    const double omega = real_or(p, "frequency", 1.0);
    out.params = {{"constant", io::real_to_json(c)},
                  {"amplitude", io::real_to_json(a)},
                  {"frequency", io::real_to_json(omega)}};
    out.structure = ControlStructure::general;
    out.eval = [=](double, const Vec&, const Vec&, const Vec& g) {
      return c + a * (1.0 + std::cos(omega * g.sum()));
    };
  } else {
    fail(ErrorKind::configuration, "unknown f family '" + family + "'");
  }
  return out;
}

TerminalCost make_terminal_cost(const json& descriptor, int d) {
  const std::string family = family_of(descriptor, "F");
  const json& p = params_of(descriptor);
  TerminalCost out;
  out.family = family;
  if (family == "zero") {
    out.params = json::object();
    out.eval = [](double, const Vec&) { return 0.0; };
  } else if (family == "constant") {
    const double value = real_or(p, "value", 0.0);
    out.params = {{"value", io::real_to_json(value)}};
    out.eval = [value](double, const Vec&) { return value; };
  } else if (family == "quadratic") {
    const double c = real_or(p, "constant", 0.0);
    const double a = real_or(p, "weight", 0.0);
    Vec center = vec_or(p, "center", d, "F");
    out.params = {{"constant", io::real_to_json(c)},
                  {"weight", io::real_to_json(a)},
                  {"center", io::vec_to_json(center)}};
    out.eval = [=](double, const Vec& x) { return c + a * (x - center).squaredNorm(); };
  } else if (family == "bilinear") {
    // c + coef * x_i * x_j
    const double c = real_or(p, "constant", 0.0);
    const double coef = real_or(p, "coef", 0.0);
    const int i = io::at(p, "i", "F").get<int>();
    const int j = io::at(p, "j", "F").get<int>();
    require(i >= 0 && i < d && j >= 0 && j < d, ErrorKind::configuration,
            "F: bilinear indices out of range");
    out.params = {{"constant", io::real_to_json(c)}, {"coef", io::real_to_json(coef)},
                  {"i", i}, {"j", j}};
    out.eval = [=](double, const Vec& x) { return c + coef * x[i] * x[j]; };
  } else {
    fail(ErrorKind::configuration, "unknown F family '" + family + "'");
  }
  return out;
}

}  // namespace mfga
