#include "qpl/field_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace qpl {

namespace {

constexpr char kMagic[8] = {'Q', 'P', 'L', 'F', 'I', 'E', 'L', 'D'};

static_assert(std::endian::native == std::endian::little, "binary field I/O assumes little-endian");

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("truncated field file");
  return v;
}

}  // namespace

void write_field_binary(std::ostream& os, const ScalarField& f) {
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, f.is_torus() ? 0u : 1u);
  put<std::uint64_t>(os, f.nx());
  put<std::uint64_t>(os, f.ny());
  std::array<double, 6> g{};
  if (f.is_torus()) {
    g = {f.torus().b1.x, f.torus().b1.y, f.torus().b2.x, f.torus().b2.y, 0.0, 0.0};
  } else {
    g = {f.window().center.x, f.window().center.y, f.window().half_width, f.window().spacing, 0.0,
         0.0};
  }
  for (double x : g) put(os, x);
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!os) throw std::runtime_error("failed writing field");
}

ScalarField read_field_binary(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw std::runtime_error("not a field file (bad magic)");
  }
  if (get<std::uint32_t>(is) != 1) throw std::runtime_error("unsupported field version");
  const auto geom = get<std::uint32_t>(is);
  const auto nx = get<std::uint64_t>(is);
  const auto ny = get<std::uint64_t>(is);
  std::array<double, 6> g{};
  for (double& x : g) x = get<double>(is);
  std::vector<double> vals(nx * ny);
  is.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(double)));
  if (!is) throw std::runtime_error("truncated field values");
  if (geom == 0) return ScalarField(TorusGeometry{{g[0], g[1]}, {g[2], g[3]}}, nx, ny, std::move(vals));
  if (geom == 1) return ScalarField(WindowGeometry{{g[0], g[1]}, g[2], g[3]}, nx, ny, std::move(vals));
  throw std::runtime_error("unknown field geometry tag");
}

void save_field_binary(const std::string& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_field_binary(os, f);
}

ScalarField load_field_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_field_binary(is);
}

void write_field_csv(std::ostream& os, const ScalarField& f, std::size_t max_cells) {
  if (f.size() > max_cells) {
    throw std::runtime_error("field too large for CSV export (" + std::to_string(f.size()) +
                             " cells)");
  }
  os << "i,j,x,y,value\n" << std::setprecision(17);
  for (std::size_t j = 0; j < f.ny(); ++j)
    for (std::size_t i = 0; i < f.nx(); ++i) {
      const Vec2 p = f.position(static_cast<double>(i), static_cast<double>(j));
      os << i << ',' << j << ',' << p.x << ',' << p.y << ',' << f(i, j) << '\n';
    }
}

}  // namespace qpl
