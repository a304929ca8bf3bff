#ifndef QPL_CONTOURS_HPP
#define QPL_CONTOURS_HPP

#include <string>
#include <vector>

#include "qpl/geometry.hpp"
#include "qpl/sampler.hpp"

namespace qpl {

/// One traced level line. Points are in the plane; on a torus they follow the
/// planar lift, so a wrapping line ends one period (wrap) away from its start.
/// Segments are oriented with the above-set (V > c) on the left.
struct Polyline {
  std::vector<Vec2> points;
  /// Returns to its starting crossing (always true on a torus).
  bool closed = false;
  /// Net period offset (b1, b2 units) after one traversal; (0, 0) for bounded lines.
  LatticeVec wrap;
  /// |turning number| of a bounded closed line; 0 otherwise.
  int winding = 0;
  /// Signed planar area; positive when the above-set lies inside.
  double signed_area = 0.0;
  bool is_open_line() const { return wrap.i != 0 || wrap.j != 0 || !closed; }
};

struct ContourSet {
  double level = 0.0;
  GridKind grid = GridKind::window;
  std::vector<Polyline> lines;
};

/// Marching squares; ambiguous cells are resolved by the mean of their corners.
ContourSet trace_contours(const ScalarField& field, double level);

struct ContourVertex {
  Vec2 position;
  int degree = 0;
};

struct ContourGraph {
  /// Points where distinct strands nearly touch (degree = 2 * strands); these are
  /// the grid images of saddle crossings in a singular net.
  std::vector<ContourVertex> junctions;
  /// Ends of non-closed lines (window boundary), degree 1.
  std::vector<ContourVertex> endpoints;
  std::vector<int> degree_sequence() const;
};

/// Builds the junction graph. `snap` is the contact distance; <= 0 uses 1.5 grid spacings.
ContourGraph contour_graph(const ScalarField& field, const ContourSet& contours, double snap = 0.0);

struct SvgOptions {
  int pixels = 800;
  /// Stroke width in pixels.
  double stroke = 1.0;
};

/// Level lines coloured by kind: wrapping lines red, loops enclosing the
/// above-set orange, loops enclosing the below-set blue, boundary-cut lines grey.
std::string contours_svg(const ScalarField& field, const std::vector<ContourSet>& sets,
                         const SvgOptions& opts = {});

}  // namespace qpl

#endif  // QPL_CONTOURS_HPP
