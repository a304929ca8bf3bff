#ifndef QPL_LEVELSET_HPP
#define QPL_LEVELSET_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpl/geometry.hpp"
#include "qpl/sampler.hpp"

namespace qpl {

class NonConvergenceError : public std::runtime_error {
 public:
  explicit NonConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// below: value <= c (ties go below), above: value > c.
enum class Side { below, above };

/// automatic: six-neighbour (triangular) on torus cells with a 60/120-degree basis,
/// four-neighbour otherwise.
enum class Connectivity { automatic, four, six, eight };

std::string to_string(Side s);
std::string to_string(Connectivity c);

/// Sublattice of Z^2 spanned by observed winding vectors, kept in Hermite form
/// basis[0] = (a, b), basis[1] = (0, d).
class WindingLattice {
 public:
  void add(LatticeVec v);
  void merge(const WindingLattice& other);
  int rank() const;
  const std::array<LatticeVec, 2>& basis() const { return basis_; }
  /// Primitive generator for rank 1, sign-normalized; (0, 0) otherwise.
  LatticeVec direction() const;
  friend bool operator==(const WindingLattice&, const WindingLattice&) = default;

 private:
  std::array<LatticeVec, 2> basis_{};
};

struct WrapClass {
  int rank = 0;
  /// (p, q) winding in the (b1, b2) basis for rank 1; (0, 0) when bounded or rank 2.
  LatticeVec direction;
  WindingLattice lattice;
  bool bounded() const { return rank == 0; }
};

struct BoundingBox {
  Vec2 lo;
  Vec2 hi;
  double diagonal() const { return norm(hi - lo); }
};

struct ComponentStats {
  int id = 0;
  std::size_t cell_count = 0;
  BoundingBox bounding_box;
  /// Max pairwise distance of the planar lift; +inf for wrapping components.
  double diameter = 0.0;
  WrapClass wrap;
  bool touches_boundary = false;
  /// First cell in row-major order.
  std::size_t seed_cell = 0;
};

struct ComponentSet {
  Side side = Side::below;
  double level = 0.0;
  Connectivity connectivity = Connectivity::four;
  GridKind grid = GridKind::window;
  std::size_t nx = 0;
  std::size_t ny = 0;
  double spacing = 0.0;
  /// Component id per cell, -1 for cells on the other side.
  std::vector<std::int32_t> labels;
  /// Torus only: per-cell lift (periods along b1, b2) relative to the component's seed copy.
  std::vector<std::array<std::int32_t, 2>> lift;
  std::vector<ComponentStats> components;

  std::size_t wrapping_count() const;
  const ComponentStats* largest_bounded() const;
  double max_bounded_diameter() const;
};

struct LabelOptions {
  Connectivity connectivity = Connectivity::automatic;
  /// Skip hull/diameter computation (wrap detection only).
  bool compute_diameters = true;
};

Connectivity resolve_connectivity(const ScalarField& field, Connectivity c);

/// Neighbour offsets (di, dj) for the connectivity on this field, forward half only.
std::vector<std::array<int, 2>> forward_neighbors(const ScalarField& field, Connectivity c);

bool in_side(double value, double level, Side side);

ComponentSet label_components(const ScalarField& field, double level, Side side,
                              const LabelOptions& opts = {});

/// True when some component of the side wraps the torus.
bool has_wrapping_component(const ScalarField& field, double level, Side side,
                            Connectivity connectivity = Connectivity::automatic);

struct Diameter {
  double value = 0.0;
  /// Grid uncertainty (one spacing).
  double uncertainty = 0.0;
};

/// Exact diameter of the lifted cell centres (convex hull + rotating calipers).
Diameter component_diameter(const ComponentSet& set, const ScalarField& field, int id);

/// Diameter of a planar point set (convex hull + rotating calipers).
double point_set_diameter(std::vector<Vec2> points);

enum class Situation { A_minus, A_plus, critical, undetermined };
std::string to_string(Situation s);

struct SituationOptions {
  /// A component "spans" a window when it touches the boundary and its diameter
  /// exceeds margin * window width.
  double margin = 0.5;
  /// When positive, a label flip between c - tol and c + tol marks c as critical.
  double level_tolerance = 0.0;
};

struct SituationDetail {
  Situation label = Situation::undetermined;
  std::vector<std::size_t> spanning_above;
  std::vector<std::size_t> spanning_below;
};

/// Nested windows, smallest first (at least two).
SituationDetail classify_situation_detail(const std::vector<ScalarField>& windows, double level,
                                          const SituationOptions& opts = {});
Situation classify_situation(const std::vector<ScalarField>& windows, double level,
                             const SituationOptions& opts = {});

struct PercolationOptions {
  /// Absolute level tolerance; unset means 1e-4 of the value range.
  std::optional<double> tolerance;
  int max_iterations = 60;
  Connectivity connectivity = Connectivity::automatic;
};

struct PercolationResult {
  /// sup{c : below-set has no wrapping component}
  double c_low = 0.0;
  /// inf{c : above-set has no wrapping component}
  double c_high = 0.0;
  double tolerance = 0.0;
  double spacing = 0.0;
  int iterations = 0;
  std::vector<double> low_widths;
  std::vector<double> high_widths;
  double midpoint() const { return 0.5 * (c_low + c_high); }
};

PercolationResult percolation_level(const ScalarField& field, const PercolationOptions& opts = {});

struct OpenInterval {
  double c1 = 0.0;
  double c2 = 0.0;
  double width() const { return c2 - c1; }
  PercolationResult percolation;
  /// Distinct wrap directions seen at the interval midpoint (both sides).
  std::vector<LatticeVec> directions;
  bool common_direction = true;
};

/// Levels at which a periodic open level line exists on the torus.
OpenInterval open_interval(const ScalarField& field, const PercolationOptions& opts = {});

}  // namespace qpl

#endif  // QPL_LEVELSET_HPP
