// Naive reference labeling: BFS with explicit lifts and O(n^2) diameters.
// Deliberately shares no code with the library beyond ScalarField.
#ifndef QPL_TESTS_REFERENCE_HPP
#define QPL_TESTS_REFERENCE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "qpl/levelset.hpp"
#include "qpl/sampler.hpp"

namespace ref {

using qpl::LatticeVec;
using qpl::ScalarField;
using qpl::Vec2;

// Lattice generated by a list of integer vectors, as (a, b), (0, d) with a >= 0, d >= 0.
struct Lattice {
  LatticeVec u;
  LatticeVec v;
  int rank() const {
    const bool nu = u.i != 0 || u.j != 0, nv = v.i != 0 || v.j != 0;
    return static_cast<int>(nu) + static_cast<int>(nv);
  }
};

inline Lattice span(std::vector<LatticeVec> gens) {
  // Euclid on the first coordinate across all generators.
  for (;;) {
    std::size_t best = gens.size();
    for (std::size_t k = 0; k < gens.size(); ++k)
      if (gens[k].i != 0 && (best == gens.size() || std::llabs(gens[k].i) < std::llabs(gens[best].i))) best = k;
    if (best == gens.size()) break;
    bool reduced = false;
    for (std::size_t k = 0; k < gens.size(); ++k) {
      if (k == best || gens[k].i == 0) continue;
      const std::int64_t q = gens[k].i / gens[best].i;
      gens[k] = gens[k] - q * gens[best];
      reduced = true;
    }
    if (!reduced) break;
  }
  Lattice out;
  std::int64_t d = 0;
  for (const auto& g : gens) {
    if (g.i != 0) {
      out.u = g.i < 0 ? LatticeVec{-g.i, -g.j} : g;
    } else {
      d = std::gcd(d, std::llabs(g.j));
    }
  }
  out.v = {0, d};
  if (out.u.i == 0 && d != 0) {
    out.u = out.v;
    out.v = {0, 0};
  } else if (d != 0) {
    out.u.j = ((out.u.j % d) + d) % d;
  }
  return out;
}

inline bool contains(const Lattice& L, LatticeVec w) {
  const LatticeVec a = L.u, b = L.v;
  const bool na = a.i != 0 || a.j != 0, nb = b.i != 0 || b.j != 0;
  if (!na && !nb) return w.i == 0 && w.j == 0;
  if (na && nb) {
    const double det = static_cast<double>(a.i) * b.j - static_cast<double>(a.j) * b.i;
    const double s = (static_cast<double>(w.i) * b.j - static_cast<double>(w.j) * b.i) / det;
    const double t = (static_cast<double>(a.i) * w.j - static_cast<double>(a.j) * w.i) / det;
    return std::fabs(s - std::round(s)) < 1e-9 && std::fabs(t - std::round(t)) < 1e-9;
  }
  const LatticeVec g = na ? a : b;
  if (static_cast<__int128>(g.i) * w.j != static_cast<__int128>(g.j) * w.i) return false;
  const std::int64_t num = g.i != 0 ? w.i : w.j, den = g.i != 0 ? g.i : g.j;
  return num % den == 0;
}

inline bool same_lattice(const Lattice& A, const Lattice& B) {
  return contains(A, B.u) && contains(A, B.v) && contains(B, A.u) && contains(B, A.v);
}

struct Component {
  std::vector<std::size_t> cells;
  std::vector<std::array<std::int64_t, 2>> lifts;
  Lattice lattice;
  bool touches_boundary = false;
  double diameter = 0.0;  // inf when wrapping
};

struct Result {
  std::vector<int> labels;
  std::vector<Component> components;
};

// Neighbour steps chosen by physical length: every step as short as the shortest axis step.
inline std::vector<std::array<int, 2>> neighbours(const ScalarField& f) {
  std::vector<std::array<int, 2>> out{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  if (!f.is_torus()) return out;
  const Vec2 a = f.step_i(), b = f.step_j();
  const double shortest = std::min(qpl::norm(a), qpl::norm(b));
  for (const auto& d : {std::array<int, 2>{1, 1}, std::array<int, 2>{1, -1}}) {
    const double len = qpl::norm(static_cast<double>(d[0]) * a + static_cast<double>(d[1]) * b);
    if (len <= shortest * (1.0 + 1e-6)) {
      out.push_back(d);
      out.push_back({-d[0], -d[1]});
    }
  }
  return out;
}

inline Result label(const ScalarField& f, double level, qpl::Side side) {
  const auto nx = static_cast<std::int64_t>(f.nx()), ny = static_cast<std::int64_t>(f.ny());
  auto inside = [&](std::size_t idx) {
    const double v = f.at(idx);
    return side == qpl::Side::below ? v <= level : v > level;
  };
  const auto steps = neighbours(f);
  Result res;
  res.labels.assign(f.size(), -1);
  std::vector<std::array<std::int64_t, 2>> lift(f.size());
  for (std::size_t start = 0; start < f.size(); ++start) {
    if (!inside(start) || res.labels[start] >= 0) continue;
    const int id = static_cast<int>(res.components.size());
    Component comp;
    std::vector<LatticeVec> windings;
    std::deque<std::size_t> queue{start};
    res.labels[start] = id;
    lift[start] = {0, 0};
    while (!queue.empty()) {
      const std::size_t c = queue.front();
      queue.pop_front();
      comp.cells.push_back(c);
      const std::int64_t i = static_cast<std::int64_t>(c) % nx, j = static_cast<std::int64_t>(c) / nx;
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) comp.touches_boundary = true;
      for (const auto& d : steps) {
        std::int64_t ni = i + d[0], nj = j + d[1];
        std::array<std::int64_t, 2> l = lift[c];
        if (f.is_torus()) {
          if (ni < 0) { ni += nx; l[0] -= 1; }
          if (ni >= nx) { ni -= nx; l[0] += 1; }
          if (nj < 0) { nj += ny; l[1] -= 1; }
          if (nj >= ny) { nj -= ny; l[1] += 1; }
        } else if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) {
          continue;
        }
        const auto n = static_cast<std::size_t>(nj * nx + ni);
        if (!inside(n)) continue;
        if (res.labels[n] < 0) {
          res.labels[n] = id;
          lift[n] = l;
          queue.push_back(n);
        } else {
          const LatticeVec w{l[0] - lift[n][0], l[1] - lift[n][1]};
          if (w.i != 0 || w.j != 0) windings.push_back(w);
        }
      }
    }
    if (f.is_torus()) comp.touches_boundary = false;
    comp.lattice = span(windings);
    for (auto c : comp.cells) comp.lifts.push_back(lift[c]);
    if (comp.lattice.rank() > 0) {
      comp.diameter = std::numeric_limits<double>::infinity();
    } else {
      std::vector<Vec2> pts;
      for (std::size_t k = 0; k < comp.cells.size(); ++k) {
        const auto c = static_cast<std::int64_t>(comp.cells[k]);
        pts.push_back(f.position(static_cast<double>(c % nx + comp.lifts[k][0] * nx),
                                 static_cast<double>(c / nx + comp.lifts[k][1] * ny)));
      }
      double best = 0.0;
      for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) best = std::max(best, qpl::norm(pts[a] - pts[b]));
      comp.diameter = best;
    }
    res.components.push_back(std::move(comp));
  }
  return res;
}

// Random test field: i.i.d. noise or a smooth random trigonometric sum.
inline ScalarField random_field(std::mt19937_64& rng, bool torus, bool smooth) {
  std::uniform_int_distribution<int> size(3, 64);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t nx = static_cast<std::size_t>(size(rng));
  const std::size_t ny = torus ? nx : static_cast<std::size_t>(size(rng));
  std::vector<double> values(nx * ny);
  if (smooth) {
    std::array<double, 12> c{};
    for (auto& x : c) x = u(rng);
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        const double x = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(nx);
        const double y = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(ny);
        double v = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double fx = 1.0 + std::floor(3.0 * c[4 * k]), fy = std::floor(3.0 * c[4 * k + 1]);
          v += std::cos(fx * x + fy * y + 6.283 * c[4 * k + 2]) * (0.5 + c[4 * k + 3]);
        }
        values[j * nx + i] = v;
      }
  } else {
    for (auto& v : values) v = u(rng);
  }
  if (torus) {
    // alternate 60-degree, 120-degree and square cells
    const int kind = static_cast<int>(u(rng) * 3.0);
    const Vec2 b1{1.0, 0.0};
    const Vec2 b2 = kind == 0 ? Vec2{0.5, std::sqrt(3.0) / 2.0}
                              : (kind == 1 ? Vec2{-0.5, std::sqrt(3.0) / 2.0} : Vec2{0.0, 1.0});
    return ScalarField(qpl::TorusGeometry{b1, b2}, nx, ny, std::move(values));
  }
  const double h = 0.25;
  return ScalarField(qpl::WindowGeometry{{0.0, 0.0}, h * static_cast<double>(nx / 2), h}, nx, ny,
                     std::move(values));
}

struct Mismatch {
  std::size_t partition = 0;
  std::size_t wrap = 0;
  std::size_t diameter = 0;
  std::size_t boundary = 0;
  std::size_t count = 0;
  bool any() const { return partition + wrap + diameter + boundary + count > 0; }
};

// Compares library labeling against the reference on one field/level/side.
inline Mismatch compare(const ScalarField& f, double level, qpl::Side side) {
  Mismatch m;
  const auto lib = qpl::label_components(f, level, side);
  const auto want = label(f, level, side);
  if (lib.components.size() != want.components.size()) {
    ++m.count;
    return m;
  }
  std::vector<int> to_lib(want.components.size(), -1), to_ref(lib.components.size(), -1);
  for (std::size_t c = 0; c < f.size(); ++c) {
    const int a = want.labels[c], b = lib.labels[c];
    if ((a < 0) != (b < 0)) {
      ++m.partition;
      continue;
    }
    if (a < 0) continue;
    if (to_lib[static_cast<std::size_t>(a)] < 0 && to_ref[static_cast<std::size_t>(b)] < 0) {
      to_lib[static_cast<std::size_t>(a)] = b;
      to_ref[static_cast<std::size_t>(b)] = a;
    } else if (to_lib[static_cast<std::size_t>(a)] != b || to_ref[static_cast<std::size_t>(b)] != a) {
      ++m.partition;
    }
  }
  if (m.partition) return m;
  for (std::size_t a = 0; a < want.components.size(); ++a) {
    const auto& r = want.components[a];
    const auto& l = lib.components[static_cast<std::size_t>(to_lib[a])];
    const Lattice ll{l.wrap.lattice.basis()[0], l.wrap.lattice.basis()[1]};
    if (l.wrap.rank != r.lattice.rank() || !same_lattice(ll, r.lattice)) ++m.wrap;
    if (std::isinf(r.diameter) != std::isinf(l.diameter) ||
        (!std::isinf(r.diameter) && std::fabs(r.diameter - l.diameter) > 1e-9 * (1.0 + r.diameter)))
      ++m.diameter;
    if (!f.is_torus() && r.touches_boundary != l.touches_boundary) ++m.boundary;
    if (l.cell_count != r.cells.size()) ++m.count;
  }
  return m;
}

}  // namespace ref

#endif  // QPL_TESTS_REFERENCE_HPP
