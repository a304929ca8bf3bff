#ifndef QPL_GEOMETRY_HPP
#define QPL_GEOMETRY_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpl {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt3 = 1.73205080756887729353;

class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Rotation about the origin, counter-clockwise by `angle` radians.
Vec2 rotate(const Vec2& v, double angle);

/// Reflection about the x-axis.
constexpr Vec2 reflect_x(const Vec2& v) { return {v.x, -v.y}; }

/// Integer combination i*e1 + j*e2 of the triangular period basis.
struct LatticeVec {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend constexpr LatticeVec operator+(LatticeVec a, LatticeVec b) { return {a.i + b.i, a.j + b.j}; }
  friend constexpr LatticeVec operator-(LatticeVec a, LatticeVec b) { return {a.i - b.i, a.j - b.j}; }
  friend constexpr LatticeVec operator*(std::int64_t s, LatticeVec a) { return {s * a.i, s * a.j}; }
  friend constexpr bool operator==(const LatticeVec&, const LatticeVec&) = default;
};

/// Exact squared length of i*e1 + j*e2 in units of T^2.
constexpr std::int64_t norm2_units(LatticeVec v) { return v.i * v.i + v.j * v.j + v.i * v.j; }

/// Triangular period basis e1 = (T, 0), e2 = (T/2, sqrt(3) T/2).
class LatticeBasis {
 public:
  explicit LatticeBasis(double period = 1.0);

  double period() const { return period_; }
  Vec2 e1() const { return {period_, 0.0}; }
  Vec2 e2() const { return {0.5 * period_, 0.5 * kSqrt3 * period_}; }
  Vec2 point(LatticeVec v) const;
  /// Fractional coordinates (u, v) with r = u*e1 + v*e2.
  Vec2 coords(const Vec2& r) const;
  Vec2 from_coords(const Vec2& uv) const;

 private:
  double period_;
};

/// Exact rational 2x2 matrix acting on lattice coordinates: entries num / den.
struct RationalMatrix {
  std::array<std::array<std::int64_t, 2>, 2> num{};
  std::int64_t den = 1;
};

/// Commensurate twist angle of the triangular lattice: rotation by `alpha`
/// maps m*e1 + n*e2 onto n*e1 + m*e2 (sign = -1 gives the mirrored angle).
struct MagicAngle {
  int m = 0;
  int n = 0;
  int sign = 1;
  int k = 0;
  int m0 = 0;
  int n0 = 0;
  double alpha = 0.0;
  double period = 1.0;
  LatticeVec b1_lattice;
  LatticeVec b2_lattice;
  Vec2 b1;
  Vec2 b2;
  /// Superlattice period length T * sqrt(m0^2 + n0^2 + m0*n0).
  double L = 0.0;

  /// m0^2 + n0^2 + m0*n0.
  std::int64_t index() const {
    return static_cast<std::int64_t>(m0) * m0 + static_cast<std::int64_t>(n0) * n0 +
           static_cast<std::int64_t>(m0) * n0;
  }
  /// Rotation by alpha in lattice coordinates, exact.
  RationalMatrix rotation() const;
};

MagicAngle magic_angle(int m, int n, int sign = 1, double period = 1.0);

/// tan(alpha_{m,n}) in closed form.
double magic_tan(int m, int n);

/// Inverse of w -> atan(sqrt(3)(1 - w^2)/(w^2 + 4w + 1)) on (0, pi/3).
double alpha_to_w(double alpha);
double w_to_alpha(double w);

struct Approximant {
  MagicAngle angle;
  /// |alpha_{m,n} - alpha_target|
  double error = 0.0;
  /// 4 sqrt(3) / m^2
  double error_bound = 0.0;
};

struct ApproximantSequence {
  double alpha_target = 0.0;
  double w = 0.0;
  bool exact = false;
  std::vector<Approximant> entries;
};

inline constexpr std::int64_t kDefaultDenominatorCap = 1'000'000;

ApproximantSequence approximants(double alpha, int count, double period = 1.0,
                                 std::int64_t max_denominator = kDefaultDenominatorCap);

/// Continued-fraction convergents p/q of x in [0, 1), q <= max_denominator.
std::vector<std::pair<std::int64_t, std::int64_t>> convergents(double x,
                                                               std::int64_t max_denominator);

/// Rotation centres p*(2 b1 - b2)/3 + q*(b1 + b2)/3 for p, q in the closed ranges.
std::vector<Vec2> symmetry_centers(const Vec2& b1, const Vec2& b2, std::array<int, 2> p_range,
                                   std::array<int, 2> q_range);

/// Reduced basis of the shift-equivalence lattice {k R(e1) + l R(e2) + p e1 + q e2}.
std::array<Vec2, 2> shift_lattice_basis(const MagicAngle& angle);

/// Representative of `a` modulo the shift-equivalence lattice, nearest the origin.
Vec2 reduce_shift(const Vec2& a, const MagicAngle& angle);

/// Every magic angle with coprime m > n > 0 and m <= max_m.
std::vector<MagicAngle> enumerate_magic_angles(int max_m, int sign = 1, double period = 1.0);

}  // namespace qpl

#endif  // QPL_GEOMETRY_HPP
