#include "mfga/json_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "mfga/error.hpp"

namespace mfga::io {

std::string format_real(double value) {
  require(std::isfinite(value), ErrorKind::numeric, "cannot serialize non-finite real");
  return fmt::format("{}", value);
}

json real_to_json(double value) { return format_real(value); }

double real_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
      fail(ErrorKind::configuration, "malformed decimal string '" + s + "'");
    }
    return v;
  }
  fail(ErrorKind::configuration, "expected a real, got " + j.dump());
}

json vec_to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(real_to_json(v[i]));
  return out;
}

Vec vec_from_json(const json& j) {
  require(j.is_array(), ErrorKind::configuration, "expected an array of reals");
  require(j.size() <= static_cast<std::size_t>(kMaxDim), ErrorKind::configuration,
          "vector longer than supported dimension");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = real_from_json(j[i]);
  return v;
}

json mat_to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(real_to_json(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

Mat mat_from_json(const json& j) {
  require(j.is_array() && !j.empty(), ErrorKind::configuration, "expected a matrix");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Mat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    require(j[r].is_array() && j[r].size() == cols, ErrorKind::configuration,
            "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = real_from_json(j[r][c]);
  }
  return m;
}

const json& at(const json& j, const std::string& key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ErrorKind::configuration, context + ": missing key '" + key + "'");
  }
  return j.at(key);
}

}  // namespace mfga::io
