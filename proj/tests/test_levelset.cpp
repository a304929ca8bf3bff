#include <cmath>
#include <random>

#include "doctest.h"
#include "qpl/levelset.hpp"
#include "qpl/potential.hpp"
#include "qpl/sampler.hpp"
#include "reference.hpp"

using namespace qpl;

namespace {

ScalarField from_function(std::size_t nx, std::size_t ny, double h, const std::function<double(double, double)>& f) {
  std::vector<double> v(nx * ny);
  const double cx = static_cast<double>(nx / 2), cy = static_cast<double>(ny / 2);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) v[j * nx + i] = f(h * (static_cast<double>(i) - cx), h * (static_cast<double>(j) - cy));
  return ScalarField(WindowGeometry{{0, 0}, h * cx, h}, nx, ny, std::move(v));
}

ScalarField torus_from(std::size_t n, Vec2 b1, Vec2 b2, const std::vector<double>& v) {
  return ScalarField(TorusGeometry{b1, b2}, n, n, v);
}

}  // namespace

TEST_CASE("ties go to the below-set") {
  CHECK(in_side(1.0, 1.0, Side::below));
  CHECK_FALSE(in_side(1.0, 1.0, Side::above));
  CHECK(in_side(1.5, 1.0, Side::above));
}

TEST_CASE("connectivity follows the cell shape") {
  const std::vector<double> z(16, 0.0);
  CHECK(resolve_connectivity(torus_from(4, {1, 0}, {0.5, std::sqrt(3.0) / 2}, z), Connectivity::automatic) ==
        Connectivity::six);
  CHECK(resolve_connectivity(torus_from(4, {1, 0}, {0, 1}, z), Connectivity::automatic) == Connectivity::four);
  const ScalarField w(WindowGeometry{{0, 0}, 1.5, 1.0}, 4, 4, z);
  CHECK(resolve_connectivity(w, Connectivity::automatic) == Connectivity::four);
  const auto fwd = forward_neighbors(torus_from(4, {1, 0}, {-0.5, std::sqrt(3.0) / 2}, z), Connectivity::six);
  CHECK(fwd.size() == 3);
  CHECK(fwd[2] == std::array<int, 2>{1, 1});
}

TEST_CASE("winding lattice normal form") {
  WindingLattice L;
  CHECK(L.rank() == 0);
  L.add({2, 4});
  CHECK(L.rank() == 1);
  CHECK(L.direction() == LatticeVec{1, 2});
  L.add({-3, -6});
  CHECK(L.rank() == 1);
  CHECK(L.basis()[0] == LatticeVec{1, 2});
  L.add({0, 2});
  CHECK(L.rank() == 2);
  CHECK(L.direction() == LatticeVec{0, 0});
  WindingLattice M;
  M.add({1, 0});
  M.add({1, 2});
  CHECK(M == L);
}

TEST_CASE("point set diameter") {
  CHECK(point_set_diameter({}) == 0.0);
  CHECK(point_set_diameter({{1, 1}}) == 0.0);
  CHECK(point_set_diameter({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(point_set_diameter({{0, 0}, {1, 0}, {2, 0}, {5, 0}}) == doctest::Approx(5.0));
  std::vector<Vec2> circle;
  for (int k = 0; k < 360; ++k) circle.push_back({3 * std::cos(k * kPi / 180), 3 * std::sin(k * kPi / 180)});
  CHECK(point_set_diameter(circle) == doctest::Approx(6.0));
}

TEST_CASE("window components: disc and boundary contact") {
  // paraboloid: below-set at level R^2 is a disc of diameter ~2R
  const auto f = from_function(101, 101, 0.1, [](double x, double y) { return x * x + y * y; });
  const auto below = label_components(f, 4.0, Side::below);
  REQUIRE(below.components.size() == 1);
  CHECK(below.components[0].diameter == doctest::Approx(4.0).epsilon(0.03));
  CHECK_FALSE(below.components[0].touches_boundary);
  CHECK(below.components[0].wrap.bounded());
  const auto above = label_components(f, 4.0, Side::above);
  REQUIRE(above.components.size() == 1);
  CHECK(above.components[0].touches_boundary);
  CHECK(component_diameter(below, f, 0).value == doctest::Approx(below.components[0].diameter));
  CHECK_THROWS_AS(component_diameter(below, f, 3), DomainError);
}

TEST_CASE("torus wrap classes of stripes") {
  // value depends on i only: a below-stripe wraps along b2
  const std::size_t n = 12;
  std::vector<double> v(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) v[j * n + i] = std::cos(2 * kPi * static_cast<double>(i) / n);
  const auto f = torus_from(n, {1, 0}, {0, 1}, v);
  const auto below = label_components(f, 0.0, Side::below);
  REQUIRE(below.components.size() == 1);
  CHECK(below.components[0].wrap.rank == 1);
  CHECK(below.components[0].wrap.direction == LatticeVec{0, 1});
  CHECK(std::isinf(below.components[0].diameter));
  CHECK(below.wrapping_count() == 1);
  CHECK(has_wrapping_component(f, 0.0, Side::above));
  CHECK_FALSE(has_wrapping_component(f, -2.0, Side::below));
  // whole torus below: rank 2
  const auto all = label_components(f, 5.0, Side::below);
  CHECK(all.components[0].wrap.rank == 2);
}

TEST_CASE("labeling agrees with the brute-force reference") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t total = 0;
  for (int t = 0; t < 60; ++t) {
    const bool torus = t % 2 == 0, smooth = t % 3 != 0;
    const auto f = ref::random_field(rng, torus, smooth);
    const double level = f.min() + (0.2 + 0.6 * u(rng)) * (f.max() - f.min());
    for (Side side : {Side::below, Side::above}) {
      const auto m = ref::compare(f, level, side);
      CHECK_FALSE(m.any());
      ++total;
    }
  }
  CHECK(total == 120);
}

TEST_CASE("three-cosine percolation level is the saddle value") {
  const auto f = sample_torus(three_cosine_potential(), 63);
  const auto p = percolation_level(f);
  CHECK(p.c_low == doctest::Approx(-1.0).epsilon(2e-2));
  CHECK(p.c_high == doctest::Approx(-1.0).epsilon(2e-2));
  CHECK(std::fabs(p.c_high - p.c_low) <= 2 * p.tolerance + 1e-12);
  CHECK(p.spacing == doctest::Approx(1.0 / 63));
  const auto oi = open_interval(f);
  CHECK(oi.width() >= 0.0);
  CHECK(oi.width() <= 2 * p.tolerance + 1e-12);
}

TEST_CASE("percolation reports non-convergence") {
  const auto f = sample_torus(three_cosine_potential(), 32);
  PercolationOptions po;
  po.tolerance = 1e-15;
  po.max_iterations = 4;
  CHECK_THROWS_AS(percolation_level(f, po), NonConvergenceError);
  const auto w = from_function(9, 9, 1.0, [](double x, double) { return x; });
  CHECK_THROWS_AS(percolation_level(w), DomainError);
}

TEST_CASE("situation classification on nested windows") {
  // single-layer three-cosine windows: below-set bounded under -1, percolating above
  const auto layer = three_cosine_potential();
  auto make = [&](double hw) {
    return from_function(static_cast<std::size_t>(2 * hw / 0.05) + 1, static_cast<std::size_t>(2 * hw / 0.05) + 1,
                         0.05, [&](double x, double y) { return layer.value({x + 0.01, y + 0.02}); });
  };
  const std::vector<ScalarField> windows{make(3.0), make(6.0)};
  CHECK(classify_situation(windows, -1.25, {}) == Situation::A_minus);
  CHECK(classify_situation(windows, 0.5, {}) == Situation::A_plus);
  CHECK_THROWS_AS(classify_situation({windows[0]}, 0.0, {}), DomainError);
}

TEST_CASE("diameter of a parallelogram with parallel hull edges") {
  const double s = std::sqrt(3.0) / 2.0;
  // four cells of a 60-degree grid: two parallel hull edges
  const std::vector<Vec2> pts{{23 + 19 * 0.5, 19 * s}, {23 + 20 * 0.5, 20 * s}, {22 + 21 * 0.5, 21 * s},
                              {22 + 22 * 0.5, 22 * s}};
  CHECK(point_set_diameter(pts) == doctest::Approx(std::sqrt(7.0)));
  CHECK(point_set_diameter({{0, 0}, {2, 0}, {3, 1}, {1, 1}}) == doctest::Approx(std::sqrt(10.0)));
}
