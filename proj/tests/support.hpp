#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <json.hpp>

#include "mfga/model.hpp"

namespace mfga::test {

inline std::string source_path(const std::string& relative) {
  return std::string(MFGA_SOURCE_DIR) + "/" + relative;
}

inline nlohmann::json model_json(const std::string& name) {
  std::ifstream in(source_path("configs/models/" + name + ".json"));
  return nlohmann::json::parse(in);
}

inline CoefficientSet model(const std::string& name) {
  return coefficients_from_json(model_json(name));
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<int>(xs.size()));
  int k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

// Brownian motion from the centre of (-a, a), unit diffusion:
// P(tau > t) = (4/pi) sum_k (-1)^k/(2k+1) exp(-lambda_k t), lambda_k = (2k+1)^2 pi^2 / (8 a^2).
inline double bm_survival(double t, double a = 1.0) {
  double s = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double n = 2.0 * k + 1.0;
    const double lambda = n * n * std::numbers::pi * std::numbers::pi / (8.0 * a * a);
    s += (k % 2 == 0 ? 1.0 : -1.0) / n * std::exp(-lambda * t);
  }
  return 4.0 / std::numbers::pi * s;
}

// E[tau ^ T] = integral_0^T P(tau > t) dt, term by term.
inline double bm_expected_exit(double T, double a = 1.0) {
  double s = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double n = 2.0 * k + 1.0;
    const double lambda = n * n * std::numbers::pi * std::numbers::pi / (8.0 * a * a);
    s += (k % 2 == 0 ? 1.0 : -1.0) / n * (1.0 - std::exp(-lambda * T)) / lambda;
  }
  return 4.0 / std::numbers::pi * s;
}

}  // namespace mfga::test
