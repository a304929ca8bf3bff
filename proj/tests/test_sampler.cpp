#include <cmath>

#include "doctest.h"
#include "qpl/geometry.hpp"
#include "qpl/potential.hpp"
#include "qpl/sampler.hpp"

using namespace qpl;

TEST_CASE("torus samples match direct evaluation") {
  const auto magic = magic_angle(2, 1);
  const auto layer = make_symmetric_potential(random_potential_spec(3, true, 4));
  const BilayerPotential v(layer, magic.alpha, {0.1, 0.05});
  const std::size_t n = 40;
  const auto f = sample_torus(v, magic, n);
  CHECK(f.is_torus());
  CHECK(f.nx() == n);
  CHECK(f.ny() == n);
  for (std::size_t j = 0; j < n; j += 7)
    for (std::size_t i = 0; i < n; i += 5) {
      const Vec2 p = (static_cast<double>(i) / n) * magic.b1 + (static_cast<double>(j) / n) * magic.b2;
      CHECK(norm(f.position(i, j) - p) < 1e-12);
      CHECK(f(i, j) == doctest::Approx(v.value(p)).epsilon(1e-10));
    }
  CHECK(f.spacing() == doctest::Approx(magic.L / n));
  CHECK(f.extent() == doctest::Approx(magic.L));
  // lifted index is the same sample one period away
  CHECK(norm(f.position(n + 3.0, 2.0) - f.position(3.0, 2.0) - magic.b1) < 1e-12);
}

TEST_CASE("torus sampling rejects a foreign angle") {
  const BilayerPotential v(three_cosine_potential(), 0.3, {0, 0});
  CHECK_THROWS_AS(sample_torus(v, magic_angle(2, 1), 16), DomainError);
}

TEST_CASE("single-layer torus") {
  const auto layer = three_cosine_potential();
  const auto f = sample_torus(layer, 12);
  CHECK(f.max() == doctest::Approx(3.0));
  CHECK(f(6, 0) == doctest::Approx(-1.0));  // (1/2, 0) saddle
  CHECK(f.min() == doctest::Approx(-1.5));  // (1/3, 1/3) lies on the 12-grid
}

TEST_CASE("window geometry, cropping and negation") {
  const BilayerPotential v(three_cosine_potential(), 0.3, {0, 0});
  const Vec2 c{1.5, -0.5};
  const auto f = sample_window(v, c, 4.0, 64);
  CHECK(f.nx() == 65);
  CHECK(f.ny() == 65);
  CHECK(f.spacing() == doctest::Approx(0.125));
  CHECK(f.extent() == doctest::Approx(8.0));
  CHECK(norm(f.position(32, 32) - c) < 1e-12);
  CHECK(f(32, 32) == doctest::Approx(v.value(c)));
  CHECK(f(0, 64) == doctest::Approx(v.value(c + Vec2{-4.0, 4.0})));

  const auto g = crop_window(f, 1.0);
  CHECK(g.nx() == 17);
  CHECK(g.spacing() == f.spacing());
  CHECK(g(8, 8) == f(32, 32));
  CHECK(g(0, 0) == f(24, 24));
  CHECK_THROWS_AS(crop_window(f, 0.01), DomainError);

  const auto h = negated(f);
  CHECK(h.max() == doctest::Approx(-f.min()));
  CHECK(h(3, 4) == -f(3, 4));
}

TEST_CASE("resolution and tolerance guard") {
  // h = extent / N <= tau / (2 C1)
  const auto n = resolution_for_tolerance(3.0, 2.0, 0.01);
  CHECK(2.0 / static_cast<double>(n) <= 0.01 / 6.0 + 1e-15);
  CHECK(2.0 / static_cast<double>(n - 1) > 0.01 / 6.0);
  const BilayerPotential v(three_cosine_potential(), 0.3, {0, 0});
  SampleOptions opts;
  opts.level_tolerance = 1e-6;
  CHECK_THROWS_AS(sample_window(v, {0, 0}, 4.0, 16, opts), DomainError);
  CHECK_THROWS_AS(sample_window(v, {0, 0}, -1.0, 16), DomainError);
  CHECK_THROWS_AS(ScalarField(WindowGeometry{{0, 0}, 1.0, 0.5}, 3, 3, std::vector<double>(8)), DomainError);
}
