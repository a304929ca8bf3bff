#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "qpl/contours.hpp"
#include "qpl/potential.hpp"
#include "qpl/sampler.hpp"

using namespace qpl;

namespace {

ScalarField window_of(std::size_t n, double h, const std::function<double(double, double)>& f) {
  std::vector<double> v(n * n);
  const double c = static_cast<double>(n / 2);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) v[j * n + i] = f(h * (static_cast<double>(i) - c), h * (static_cast<double>(j) - c));
  return ScalarField(WindowGeometry{{0, 0}, h * c, h}, n, n, std::move(v));
}

double length(const Polyline& l) {
  double s = 0.0;
  for (std::size_t k = 1; k < l.points.size(); ++k) s += norm(l.points[k] - l.points[k - 1]);
  return s;
}

}  // namespace

TEST_CASE("circle contour: length, area and orientation") {
  // f = -(x^2 + y^2): the above-set is the disc, so the area is positive
  const auto f = window_of(201, 0.05, [](double x, double y) { return -(x * x + y * y); });
  const auto cs = trace_contours(f, -9.0);
  REQUIRE(cs.lines.size() == 1);
  const auto& l = cs.lines[0];
  CHECK(l.closed);
  CHECK(l.wrap == LatticeVec{0, 0});
  CHECK(l.winding == 1);
  CHECK_FALSE(l.is_open_line());
  CHECK(l.signed_area == doctest::Approx(kPi * 9.0).epsilon(5e-3));
  CHECK(length(l) == doctest::Approx(2 * kPi * 3.0).epsilon(5e-3));
  for (const auto& p : l.points) CHECK(norm(p) == doctest::Approx(3.0).epsilon(5e-3));
  // negated field: same curve, opposite orientation
  const auto g = trace_contours(negated(f), 9.0);
  REQUIRE(g.lines.size() == 1);
  CHECK(g.lines[0].signed_area == doctest::Approx(-l.signed_area));
}

TEST_CASE("above-set lies on the left") {
  // f = x, level 0: left of a downward walk is +x
  const auto f = window_of(21, 0.1, [](double x, double) { return x + 0.0123; });
  const auto cs = trace_contours(f, 0.0);
  REQUIRE(cs.lines.size() == 1);
  const auto& l = cs.lines[0];
  CHECK_FALSE(l.closed);
  CHECK(l.is_open_line());
  CHECK(l.points.back().y < l.points.front().y);
  for (const auto& p : l.points) CHECK(p.x == doctest::Approx(-0.0123).epsilon(1e-9));
}

TEST_CASE("levels outside the range give no lines") {
  const auto f = window_of(21, 0.1, [](double x, double y) { return x * y; });
  CHECK(trace_contours(f, f.min() - 1.0).lines.empty());
  CHECK(trace_contours(f, f.max() + 1.0).lines.empty());
  const std::string svg = contours_svg(f, {trace_contours(f, f.min() - 1.0)});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<path") == std::string::npos);
}

TEST_CASE("stripe field on a torus: wrapping lines") {
  const std::size_t n = 32;
  std::vector<double> v(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) v[j * n + i] = std::cos(2 * kPi * (static_cast<double>(i) + 0.3) / n);
  const ScalarField f(TorusGeometry{{1, 0}, {0.5, std::sqrt(3.0) / 2}}, n, n, v);
  const auto cs = trace_contours(f, 0.1);
  REQUIRE(cs.lines.size() == 2);
  for (const auto& l : cs.lines) {
    CHECK(l.closed);
    CHECK(l.is_open_line());
    CHECK(l.wrap.i == 0);
    CHECK(std::abs(l.wrap.j) == 1);
    // the planar lift ends one period away
    CHECK(norm(l.points.back() - l.points.front() - static_cast<double>(l.wrap.j) * f.torus().b2) < 1e-9);
  }
  // the two lines run in opposite directions
  CHECK(cs.lines[0].wrap.j == -cs.lines[1].wrap.j);
}

TEST_CASE("three-cosine singular net: three degree-4 junctions") {
  const auto layer = three_cosine_potential();
  for (std::size_t n : {63u, 128u}) {
    const auto f = sample_torus(layer, n);
    const auto net = trace_contours(f, -1.0);
    const auto g = contour_graph(f, net);
    const auto deg = g.degree_sequence();
    CHECK(deg == std::vector<int>{4, 4, 4});
    std::vector<Vec2> want{0.5 * layer.e1(), 0.5 * layer.e2(), 0.5 * (layer.e1() + layer.e2())};
    for (const auto& w : want) {
      double best = 1e9;
      for (const auto& j : g.junctions) {
        // distance modulo the cell
        for (int a = -1; a <= 1; ++a)
          for (int b = -1; b <= 1; ++b)
            best = std::min(best, norm(j.position + static_cast<double>(a) * layer.e1() +
                                       static_cast<double>(b) * layer.e2() - w));
      }
      CHECK(best < 3.0 * f.spacing());
    }
    // off-critical levels: loops only, no junctions
    for (double c : {-1.2, -0.8, 1.0}) {
      const auto cs = trace_contours(f, c);
      CHECK(contour_graph(f, cs).junctions.empty());
      for (const auto& l : cs.lines) CHECK_FALSE(l.is_open_line());
    }
  }
}

TEST_CASE("three-cosine loops enclose the right set") {
  const auto f = sample_torus(three_cosine_potential(), 96);
  const auto low = trace_contours(f, -1.3);  // around the two minima
  CHECK(low.lines.size() == 2);
  for (const auto& l : low.lines) CHECK(l.signed_area < 0.0);
  const auto high = trace_contours(f, 2.0);  // around the maximum
  CHECK(high.lines.size() == 1);
  CHECK(high.lines[0].signed_area > 0.0);
}

TEST_CASE("svg output is deterministic and coloured by kind") {
  const auto f = sample_torus(three_cosine_potential(), 48);
  const std::vector<ContourSet> sets{trace_contours(f, -1.3), trace_contours(f, 2.0)};
  const auto a = contours_svg(f, sets), b = contours_svg(f, sets);
  CHECK(a == b);
  CHECK(a.find("#1f77b4") != std::string::npos);
  CHECK(a.find("#ff7f0e") != std::string::npos);
  CHECK(a.find("#d62728") == std::string::npos);
}
