#include "qpl/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace qpl {

Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

LatticeBasis::LatticeBasis(double period) : period_(period) {
  if (!(period > 0.0) || !std::isfinite(period)) {
    throw DomainError("lattice period must be positive and finite");
  }
}

Vec2 LatticeBasis::point(LatticeVec v) const {
  return from_coords({static_cast<double>(v.i), static_cast<double>(v.j)});
}

Vec2 LatticeBasis::coords(const Vec2& r) const {
  const double v = 2.0 * r.y / (kSqrt3 * period_);
  const double u = r.x / period_ - 0.5 * v;
  return {u, v};
}

Vec2 LatticeBasis::from_coords(const Vec2& uv) const {
  return {period_ * (uv.x + 0.5 * uv.y), period_ * 0.5 * kSqrt3 * uv.y};
}

double magic_tan(int m, int n) {
  const double mm = m, nn = n;
  return kSqrt3 * (mm * mm - nn * nn) / (mm * mm + nn * nn + 4.0 * mm * nn);
}

MagicAngle magic_angle(int m, int n, int sign, double period) {
  if (!(m > n && n > 0)) {
    throw DomainError("magic angle requires m > n > 0, got (" + std::to_string(m) + ", " +
                      std::to_string(n) + ")");
  }
  if (std::gcd(m, n) != 1) {
    throw DomainError("magic angle requires coprime (m, n), got (" + std::to_string(m) + ", " +
                      std::to_string(n) + ")");
  }
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  const LatticeBasis basis(period);

  MagicAngle a;
  a.m = m;
  a.n = n;
  a.sign = sign;
  a.period = period;
  const double mm = m, nn = n;
  a.alpha = sign * std::atan2(kSqrt3 * (mm * mm - nn * nn), mm * mm + nn * nn + 4.0 * mm * nn);

  const std::int64_t M = m, N = n;
  if ((m - n) % 3 != 0) {
    a.k = 0;
    a.m0 = m;
    a.n0 = n;
    if (sign > 0) {
      a.b1_lattice = {M + N, -N};
      a.b2_lattice = {N, M};
    } else {
      a.b1_lattice = {M + N, -M};
      a.b2_lattice = {M, N};
    }
  } else {
    const std::int64_t K = (M - N) / 3;
    a.k = static_cast<int>(K);
    a.m0 = static_cast<int>(N + K);
    a.n0 = static_cast<int>(K);
    if (sign > 0) {
      a.b1_lattice = {N + 2 * K, -(N + K)};
      a.b2_lattice = {N + K, K};
    } else {
      a.b1_lattice = {N + 2 * K, -K};
      a.b2_lattice = {K, N + K};
    }
  }
  a.b1 = basis.point(a.b1_lattice);
  a.b2 = basis.point(a.b2_lattice);
  a.L = period * std::sqrt(static_cast<double>(a.index()));
  return a;
}

RationalMatrix MagicAngle::rotation() const {
  // Matrices commuting with the 60-degree rotation R = [[0,-1],[1,1]] are a*I + b*R;
  // solving (aI + bR)(m, n) = (n, m) gives a = (n^2 + 2mn)/S, b = (m^2 - n^2)/S.
  const std::int64_t M = m, N = n;
  const std::int64_t S = M * M + M * N + N * N;
  std::int64_t a = N * N + 2 * M * N;
  std::int64_t b = M * M - N * N;
  RationalMatrix r;
  r.den = S;
  if (sign > 0) {
    r.num = {{{a, -b}, {b, a + b}}};
  } else {
    // inverse rotation: (a + b) I - b R
    r.num = {{{a + b, b}, {-b, a}}};
  }
  std::int64_t g = S;
  for (const auto& row : r.num)
    for (auto v : row) g = std::gcd(g, v);
  if (g > 1) {
    for (auto& row : r.num)
      for (auto& v : row) v /= g;
    r.den /= g;
  }
  return r;
}

double w_to_alpha(double w) {
  return std::atan(kSqrt3 * (1.0 - w * w) / (w * w + 4.0 * w + 1.0));
}

double alpha_to_w(double alpha) {
  if (!(alpha > 0.0 && alpha < kPi / 3.0)) {
    throw DomainError("alpha must lie in (0, pi/3), got " + std::to_string(alpha));
  }
  const double t = std::tan(alpha);
  return (kSqrt3 - t) / (kSqrt3 * std::sqrt(t * t + 1.0) + 2.0 * t);
}

std::vector<std::pair<std::int64_t, std::int64_t>> convergents(double x,
                                                               std::int64_t max_denominator) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  long double rem = x;
  std::int64_t p_prev = 1, q_prev = 0;
  auto a = static_cast<std::int64_t>(std::floor(rem));
  std::int64_t p = a, q = 1;
  out.emplace_back(p, q);
  rem -= a;
  for (int iter = 0; iter < 200; ++iter) {
    if (rem <= 1e-18L) break;
    if (std::fabs(static_cast<long double>(p) / q - x) == 0.0L) break;
    rem = 1.0L / rem;
    a = static_cast<std::int64_t>(std::floor(rem));
    rem -= a;
    if (a > max_denominator) break;
    const std::int64_t p_next = a * p + p_prev;
    const std::int64_t q_next = a * q + q_prev;
    if (q_next > max_denominator) break;
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
    out.emplace_back(p, q);
  }
  return out;
}

ApproximantSequence approximants(double alpha, int count, double period,
                                 std::int64_t max_denominator) {
  ApproximantSequence seq;
  seq.alpha_target = alpha;
  seq.w = alpha_to_w(alpha);
  if (count < 0) throw DomainError("approximant count must be nonnegative");

  const auto conv = convergents(seq.w, max_denominator);
  auto admissible = [](std::int64_t p, std::int64_t q) {
    return q > p && p > 0 && q <= std::numeric_limits<int>::max() && std::gcd(p, q) == 1;
  };

  for (const auto& [p, q] : conv) {
    if (!admissible(p, q)) continue;
    const double a_mn = std::atan(magic_tan(static_cast<int>(q), static_cast<int>(p)));
    if (std::fabs(a_mn - alpha) <= 1e-13) {
      Approximant e{magic_angle(static_cast<int>(q), static_cast<int>(p), 1, period), 0.0,
                    4.0 * kSqrt3 / (static_cast<double>(q) * q)};
      seq.exact = true;
      seq.entries.push_back(e);
      return seq;
    }
  }

  for (const auto& [p, q] : conv) {
    if (static_cast<int>(seq.entries.size()) >= count) break;
    if (!admissible(p, q)) continue;
    Approximant e;
    e.angle = magic_angle(static_cast<int>(q), static_cast<int>(p), 1, period);
    e.error = std::fabs(e.angle.alpha - alpha);
    e.error_bound = 4.0 * kSqrt3 / (static_cast<double>(q) * q);
    seq.entries.push_back(e);
  }
  return seq;
}

std::vector<Vec2> symmetry_centers(const Vec2& b1, const Vec2& b2, std::array<int, 2> p_range,
                                   std::array<int, 2> q_range) {
  if (std::fabs(cross(b1, b2)) <= 1e-14 * norm(b1) * norm(b2)) {
    throw DomainError("symmetry_centers: basis vectors are linearly dependent");
  }
  const Vec2 u = (2.0 * b1 - b2) / 3.0;
  const Vec2 v = (b1 + b2) / 3.0;
  std::vector<Vec2> out;
  for (int p = p_range[0]; p <= p_range[1]; ++p)
    for (int q = q_range[0]; q <= q_range[1]; ++q) out.push_back(p * u + q * v);
  return out;
}

namespace {

using i128 = __int128;

i128 gcd_ext(i128 a, i128 b, i128& s, i128& t) {
  // returns g >= 0 with s*a + t*b = g
  i128 s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (b != 0) {
    const i128 q = a / b;
    i128 tmp = a - q * b;
    a = b;
    b = tmp;
    tmp = s0 - q * s1;
    s0 = s1;
    s1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (a < 0) {
    a = -a;
    s0 = -s0;
    t0 = -t0;
  }
  s = s0;
  t = t0;
  return a;
}

i128 gcd128(i128 a, i128 b) {
  i128 s, t;
  return gcd_ext(a, b, s, t);
}

std::array<Vec2, 2> gauss_reduce(Vec2 u, Vec2 v) {
  if (dot(u, u) > dot(v, v)) std::swap(u, v);
  for (int iter = 0; iter < 64; ++iter) {
    const double mu = std::round(dot(u, v) / dot(u, u));
    v = v - mu * u;
    if (dot(v, v) >= dot(u, u)) break;
    std::swap(u, v);
  }
  return {u, v};
}

}  // namespace

std::array<Vec2, 2> shift_lattice_basis(const MagicAngle& angle) {
  const RationalMatrix r = angle.rotation();
  const i128 S = r.den;
  // Generators scaled by S: e1, e2 and the rotated images, in lattice coordinates.
  const std::array<std::array<i128, 2>, 4> gens = {{
      {S, 0},
      {0, S},
      {r.num[0][0], r.num[1][0]},
      {r.num[0][1], r.num[1][1]},
  }};
  // Upper-triangular basis u = (ux, uy), w = (0, wy).
  i128 ux = gens[0][0], uy = gens[0][1];
  i128 wy = 0;
  for (std::size_t idx = 1; idx < gens.size(); ++idx) {
    const i128 vx = gens[idx][0], vy = gens[idx][1];
    i128 s, t;
    const i128 g = gcd_ext(ux, vx, s, t);
    i128 rem_y;
    if (g == 0) {
      rem_y = vy;
    } else {
      rem_y = (ux / g) * vy - (vx / g) * uy;
      const i128 nx = s * ux + t * vx;
      const i128 ny = s * uy + t * vy;
      ux = nx;
      uy = ny;
    }
    wy = gcd128(wy, rem_y);
    if (wy != 0) {
      uy %= wy;
    }
  }
  const LatticeBasis basis(angle.period);
  const double s = static_cast<double>(S);
  const Vec2 f1 = basis.from_coords({static_cast<double>(ux) / s, static_cast<double>(uy) / s});
  const Vec2 f2 = basis.from_coords({0.0, static_cast<double>(wy) / s});
  return gauss_reduce(f1, f2);
}

Vec2 reduce_shift(const Vec2& a, const MagicAngle& angle) {
  const auto [f1, f2] = shift_lattice_basis(angle);
  const double det = cross(f1, f2);
  const double x = cross(a, f2) / det;
  const double y = cross(f1, a) / det;
  const Vec2 base = a - std::round(x) * f1 - std::round(y) * f2;
  Vec2 best = base;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      const Vec2 c = base - static_cast<double>(i) * f1 - static_cast<double>(j) * f2;
      if (dot(c, c) < dot(best, best)) best = c;
    }
  return best;
}

std::vector<MagicAngle> enumerate_magic_angles(int max_m, int sign, double period) {
  std::vector<MagicAngle> out;
  for (int m = 2; m <= max_m; ++m)
    for (int n = 1; n < m; ++n)
      if (std::gcd(m, n) == 1) out.push_back(magic_angle(m, n, sign, period));
  return out;
}

}  // namespace qpl
