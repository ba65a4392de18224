#include <cstring>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "mfga/error.hpp"
#include "mfga/hjb_kfp.hpp"
#include "mfga/json_io.hpp"

namespace mfga {

namespace {

constexpr char kMagic[8] = {'M', 'F', 'G', 'A', 'F', 'L', 'D', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(in), ErrorKind::precondition, "truncated field file");
  return v;
}

void put_array(std::ostream& out, const std::vector<double>& a) {
  out.write(reinterpret_cast<const char*>(a.data()),
            static_cast<std::streamsize>(a.size() * sizeof(double)));
}

void get_array(std::istream& in, std::vector<double>& a, std::size_t n) {
  a.resize(n);
  in.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(n * sizeof(double)));
  require(static_cast<bool>(in), ErrorKind::precondition, "truncated field payload");
}

void write_header(std::ostream& out, std::uint32_t kind, const TimeGrid& grid,
                  const SpaceGrid& space) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, kind);
  put<std::uint64_t>(out, grid.n_steps);
  put<double>(out, grid.horizon);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(space.dim));
  put<std::uint32_t>(out, 0);
  for (auto n : space.nodes) put<std::uint64_t>(out, n);
  for (double v : space.lower) put<double>(out, v);
  for (double v : space.upper) put<double>(out, v);
}

void read_header(std::istream& in, std::uint32_t expected_kind, TimeGrid& grid, SpaceGrid& space) {
  char magic[8];
  in.read(magic, sizeof(magic));
  require(in && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, ErrorKind::precondition,
          "not a field file");
  require(get<std::uint32_t>(in) == kVersion, ErrorKind::precondition, "unsupported field version");
  require(get<std::uint32_t>(in) == expected_kind, ErrorKind::precondition,
          "field file holds a different kind of field");
  const auto n_steps = get<std::uint64_t>(in);
  const double horizon = get<double>(in);
  grid = TimeGrid::uniform(horizon, n_steps);
  space.dim = static_cast<int>(get<std::uint32_t>(in));
  (void)get<std::uint32_t>(in);
  for (auto& n : space.nodes) n = get<std::uint64_t>(in);
  for (double& v : space.lower) v = get<double>(in);
  for (double& v : space.upper) v = get<double>(in);
  require(space.dim == 1 || space.dim == 2, ErrorKind::precondition, "bad field dimension");
  for (int a = 0; a < space.dim; ++a) {
    require(space.nodes[a] >= 3, ErrorKind::precondition, "bad field node count");
    space.spacing[a] = (space.upper[a] - space.lower[a]) / static_cast<double>(space.nodes[a] - 1);
  }
}

template <class Value>
void write_rows(std::ostream& out, const TimeGrid& grid, const SpaceGrid& space,
                const std::string& column, const Value& value) {
  out << "t";
  for (int a = 0; a < space.dim; ++a) out << ",x" << a + 1;
  out << "," << column << "\n";
  for (std::size_t j = 0; j < grid.size(); ++j) {
    for (std::size_t k = 0; k < space.size(); ++k) {
      const Vec x = space.point(k);
      out << io::format_real(grid.times[j]);
      for (int a = 0; a < space.dim; ++a) out << ',' << io::format_real(x[a]);
      out << ',' << io::format_real(value(j, k)) << '\n';
    }
  }
}

}  // namespace

void write_csv(std::ostream& out, const ValueField& field) {
  write_rows(out, field.grid, field.space, "value",
             [&](std::size_t j, std::size_t k) { return field.value(j, k); });
}

void write_csv(std::ostream& out, const DensityField& field) {
  write_rows(out, field.grid, field.space, "density",
             [&](std::size_t j, std::size_t k) { return field.density(j, k); });
}

void write_binary(std::ostream& out, const ValueField& field) {
  write_header(out, 0, field.grid, field.space);
  put_array(out, field.values);
  put_array(out, field.gradients);
  put_array(out, field.feedback);
}

void write_binary(std::ostream& out, const DensityField& field) {
  write_header(out, 1, field.grid, field.space);
  put_array(out, field.densities);
  put_array(out, field.masses);
}

ValueField read_value_field(std::istream& in) {
  ValueField f;
  read_header(in, 0, f.grid, f.space);
  f.dim = f.space.dim;
  const std::size_t n = f.grid.size() * f.space.size();
  get_array(in, f.values, n);
  get_array(in, f.gradients, n * f.dim);
  get_array(in, f.feedback, n * f.dim);
  return f;
}

DensityField read_density_field(std::istream& in) {
  DensityField f;
  read_header(in, 1, f.grid, f.space);
  get_array(in, f.densities, f.grid.size() * f.space.size());
  get_array(in, f.masses, f.grid.size());
  return f;
}

}  // namespace mfga
