#ifndef QPL_POTENTIAL_HPP
#define QPL_POTENTIAL_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qpl/geometry.hpp"

namespace qpl {

enum class LatticeKind { triangular, square };

/// One cosine term A*cos(k.r + phase); k = 2*pi*(h*g1 + l*g2) in reciprocal units.
struct Harmonic {
  LatticeVec q;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Seed term for symmetry projection: its full orbit enters the potential.
struct OrbitSpec {
  int h = 1;
  int l = 0;
  double amplitude = 1.0;
  double phase = 0.0;
};

struct PotentialSpec {
  int order = 6;
  bool reflection = true;
  /// Mirror axis angle; NaN picks the default for the order.
  double reflection_axis = std::numeric_limits<double>::quiet_NaN();
  std::vector<OrbitSpec> orbits{OrbitSpec{}};
  double period = 1.0;
  /// Rescale so that max |V1| is ~1 after projection.
  bool normalize = false;
  /// Unset means "implied by order".
  std::optional<LatticeKind> lattice;
};

struct Mat2 {
  double xx = 0, xy = 0, yx = 0, yy = 0;
};

/// Periodic single-layer potential with a rotational symmetry of order 3, 4 or 6
/// about the origin, optionally also mirror-symmetric about a stored axis.
class SymmetricPotential {
 public:
  SymmetricPotential() = default;
  SymmetricPotential(int order, bool reflection, double reflection_axis, LatticeKind lattice,
                     double period, std::vector<Harmonic> harmonics);

  int order() const { return order_; }
  bool reflection() const { return reflection_; }
  double reflection_axis() const { return reflection_axis_; }
  LatticeKind lattice() const { return lattice_; }
  double period() const { return period_; }
  const std::vector<Harmonic>& harmonics() const { return harmonics_; }

  Vec2 e1() const;
  Vec2 e2() const;
  Vec2 coords(const Vec2& r) const;
  Vec2 wavevector(const Harmonic& h) const;

  double value(const Vec2& r) const;
  Vec2 gradient(const Vec2& r) const;
  Mat2 hessian(const Vec2& r) const;

  /// Rotation centres of order >= 3 inside the unit cell.
  std::vector<Vec2> symmetry_centers() const;

  /// Sum of |amplitude|, an upper bound for max |V1|.
  double amplitude_sum() const;
  /// Sum of |amplitude| * |k|, an upper bound for max |grad V1|.
  double gradient_bound() const;

  SymmetricPotential scaled(double factor) const;

 private:
  int order_ = 6;
  bool reflection_ = false;
  double reflection_axis_ = 0.0;
  LatticeKind lattice_ = LatticeKind::triangular;
  double period_ = 1.0;
  std::vector<Harmonic> harmonics_;
};

/// Symmetry-projects the seed orbits and builds the potential.
SymmetricPotential make_symmetric_potential(const PotentialSpec& spec);

/// Random spectrum: `orbits` distinct seed vectors from the first reciprocal shells,
/// random amplitudes and phases, normalized to max |V1| ~ 1.
PotentialSpec random_potential_spec(int order, bool reflection, std::uint64_t seed, int orbits = 3,
                                    double period = 1.0);

/// Minimal triangular potential cos(k1.r) + cos(k2.r) + cos(k3.r), k1 + k2 + k3 = 0.
SymmetricPotential three_cosine_potential(double period = 1.0);

enum class Superposition { linear, nonlinear };

/// V(r) = Q(V1(r), V2(r)), V2(r) = V1(reflect_x(rotate(r - a, -alpha))).
class BilayerPotential {
 public:
  BilayerPotential() = default;
  BilayerPotential(SymmetricPotential layer, double alpha, Vec2 shift,
                   Superposition kind = Superposition::linear, double lambda = 0.0);

  const SymmetricPotential& layer() const { return layer_; }
  double alpha() const { return alpha_; }
  const Vec2& shift() const { return shift_; }
  Superposition superposition() const { return kind_; }
  double lambda() const { return lambda_; }

  /// Planar point -> argument of the second layer.
  Vec2 second_layer_point(const Vec2& r) const;
  std::array<double, 4> embed(const Vec2& r) const;

  double layer1(const Vec2& r) const { return layer_.value(r); }
  double layer2(const Vec2& r) const;
  double combine(double v1, double v2) const;
  double value(const Vec2& r) const { return combine(layer1(r), layer2(r)); }
  /// Q(V2, V1); equal to value() for every symmetric Q.
  double value_swapped(const Vec2& r) const { return combine(layer2(r), layer1(r)); }
  Vec2 gradient(const Vec2& r) const;
  Mat2 hessian(const Vec2& r) const;

  /// The 4-periodic lift F(z1, z2, z3, z4).
  double lift(const std::array<double, 4>& z) const;

  BilayerPotential with_shift(const Vec2& shift) const;
  BilayerPotential with_layer(SymmetricPotential layer) const;

 private:
  SymmetricPotential layer_;
  double alpha_ = 0.0;
  Vec2 shift_;
  Superposition kind_ = Superposition::linear;
  double lambda_ = 0.0;
  double cos_a_ = 1.0;
  double sin_a_ = 0.0;
};

/// Evaluates the bilayer; free-function form of BilayerPotential::value.
inline double eval(const BilayerPotential& v, const Vec2& r) { return v.value(r); }

struct LipschitzBound {
  double C1 = 0.0;
};

/// Certified |grad_z F| <= C1 from the finite spectrum.
LipschitzBound lipschitz_bound(const BilayerPotential& v);

/// Empirical max |grad V1| over the unit cell (dense grid plus local ascent).
double measured_gradient_max(const SymmetricPotential& layer, int grid = 96);

/// Empirical max |grad_z F|, used where a tight C1 is wanted.
double measured_lipschitz(const BilayerPotential& v, int grid = 96);

struct SymmetryCheck {
  std::string name;
  double max_residual = 0.0;
  bool passed = false;
  /// Informational checks (e.g. 60-degree rotation of an order-3 layer) do not fail reports.
  bool required = true;
};

struct SymmetryReport {
  std::vector<SymmetryCheck> checks;
  bool all_passed() const;
  const SymmetryCheck* find(const std::string& name) const;
};

using ScalarFunction = std::function<double(const Vec2&)>;

/// max |f(c + rotate(r - c, angle)) - f(r)| over `samples` deterministic points.
double rotation_residual(const ScalarFunction& f, const Vec2& center, double angle, double radius,
                         int samples = 400);
/// max |f(mirror(r)) - f(r)| for the line through `point` at `axis_angle`.
double reflection_residual(const ScalarFunction& f, const Vec2& point, double axis_angle,
                           double radius, int samples = 400);

/// Single layer: rotation by 2*pi/order about every stored centre, 60-degree rotation
/// (expected to pass only for order 6), and the stored mirror axis.
SymmetryReport verify_symmetry(const SymmetricPotential& v, double tolerance);

/// Bilayer: rotation about the origin and mirror axes at alpha/2 + j*2*pi/order_r.
SymmetryReport verify_symmetry(const BilayerPotential& v, double tolerance);

enum class CriticalKind { minimum, maximum, saddle };

struct CriticalPoint {
  Vec2 position;
  double value = 0.0;
  double hessian_det = 0.0;
  CriticalKind kind = CriticalKind::saddle;
};

struct CriticalPointSummary {
  std::vector<CriticalPoint> points;
  /// min |det H| over saddles divided by (max |det H| over all points).
  double min_relative_saddle_det = 0.0;
  bool degenerate_suspect = false;
};

/// Newton search for critical points of the bilayer inside the cell spanned by (b1, b2).
/// Reports non-degeneracy of saddles as a diagnostic rather than a guarantee.
CriticalPointSummary critical_points(const BilayerPotential& v, const Vec2& b1, const Vec2& b2,
                                     int seeds_per_axis = 48);

}  // namespace qpl

#endif  // QPL_POTENTIAL_HPP
