#include "qpl/potential.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace qpl {

namespace {

double wrap_phase(double phi) {
  double p = std::fmod(phi, 2.0 * kPi);
  if (p < 0.0) p += 2.0 * kPi;
  if (p >= 2.0 * kPi - 1e-12) p = 0.0;
  return p;
}

LatticeKind lattice_for_order(int order) {
  return order == 4 ? LatticeKind::square : LatticeKind::triangular;
}

double default_axis(int order) {
  // Order 3: the y-axis maps each 120-degree orbit of the triangular
  // reciprocal lattice onto itself, so phases survive the projection.
  return order == 3 ? kPi / 2.0 : 0.0;
}

struct LatticeFrame {
  Vec2 e1, e2;  // direct
  Vec2 g1, g2;  // reciprocal, e_i . g_j = 2 pi delta_ij

  LatticeFrame(LatticeKind kind, double period) {
    e1 = {period, 0.0};
    e2 = kind == LatticeKind::triangular ? Vec2{0.5 * period, 0.5 * kSqrt3 * period}
                                         : Vec2{0.0, period};
    const double det = cross(e1, e2);
    g1 = Vec2{e2.y, -e2.x} * (2.0 * kPi / det);
    g2 = Vec2{-e1.y, e1.x} * (2.0 * kPi / det);
  }

  Vec2 wavevector(LatticeVec q) const {
    return static_cast<double>(q.i) * g1 + static_cast<double>(q.j) * g2;
  }

  // Throws when k is not (numerically) a reciprocal lattice vector.
  LatticeVec to_reciprocal(const Vec2& k) const {
    const double h = dot(k, e1) / (2.0 * kPi);
    const double l = dot(k, e2) / (2.0 * kPi);
    const double hr = std::round(h), lr = std::round(l);
    if (std::fabs(h - hr) > 1e-9 || std::fabs(l - lr) > 1e-9) {
      throw DomainError("symmetry operation does not preserve the reciprocal lattice");
    }
    return {static_cast<std::int64_t>(hr), static_cast<std::int64_t>(lr)};
  }
};

// Canonical representative of +-k: first nonzero coordinate positive.
Harmonic canonical(Harmonic t) {
  if (t.q.i < 0 || (t.q.i == 0 && t.q.j < 0)) {
    t.q = {-t.q.i, -t.q.j};
    t.phase = -t.phase;
  }
  t.phase = wrap_phase(t.phase);
  if (t.q.i == 0 && t.q.j == 0) {
    t.amplitude *= std::cos(t.phase);
    t.phase = 0.0;
  }
  return t;
}

double phase_distance(double a, double b) {
  const double d = std::fabs(wrap_phase(a) - wrap_phase(b));
  return std::min(d, 2.0 * kPi - d);
}

// Low-discrepancy points in a disc of the given radius (R2 sequence).
std::vector<Vec2> disc_samples(double radius, int count) {
  constexpr double g = 1.32471795724474602596;
  const double a1 = 1.0 / g, a2 = 1.0 / (g * g);
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double s = std::fmod(0.5 + a1 * (i + 1), 1.0);
    const double t = std::fmod(0.5 + a2 * (i + 1), 1.0);
    const double rr = radius * std::sqrt(s);
    const double th = 2.0 * kPi * t;
    pts.push_back({rr * std::cos(th), rr * std::sin(th)});
  }
  return pts;
}

}  // namespace

SymmetricPotential::SymmetricPotential(int order, bool reflection, double reflection_axis,
                                       LatticeKind lattice, double period,
                                       std::vector<Harmonic> harmonics)
    : order_(order),
      reflection_(reflection),
      reflection_axis_(reflection_axis),
      lattice_(lattice),
      period_(period),
      harmonics_(std::move(harmonics)) {}

Vec2 SymmetricPotential::e1() const { return LatticeFrame(lattice_, period_).e1; }
Vec2 SymmetricPotential::e2() const { return LatticeFrame(lattice_, period_).e2; }

Vec2 SymmetricPotential::coords(const Vec2& r) const {
  if (lattice_ == LatticeKind::triangular) return LatticeBasis(period_).coords(r);
  return {r.x / period_, r.y / period_};
}

Vec2 SymmetricPotential::wavevector(const Harmonic& h) const {
  return LatticeFrame(lattice_, period_).wavevector(h.q);
}

double SymmetricPotential::value(const Vec2& r) const {
  const Vec2 uv = coords(r);
  double s = 0.0;
  for (const auto& t : harmonics_) {
    const double arg = 2.0 * kPi * (static_cast<double>(t.q.i) * uv.x +
                                    static_cast<double>(t.q.j) * uv.y) +
                       t.phase;
    s += t.amplitude * std::cos(arg);
  }
  return s;
}

Vec2 SymmetricPotential::gradient(const Vec2& r) const {
  const LatticeFrame f(lattice_, period_);
  const Vec2 uv = coords(r);
  Vec2 g;
  for (const auto& t : harmonics_) {
    const double arg = 2.0 * kPi * (static_cast<double>(t.q.i) * uv.x +
                                    static_cast<double>(t.q.j) * uv.y) +
                       t.phase;
    g -= (t.amplitude * std::sin(arg)) * f.wavevector(t.q);
  }
  return g;
}

Mat2 SymmetricPotential::hessian(const Vec2& r) const {
  const LatticeFrame f(lattice_, period_);
  const Vec2 uv = coords(r);
  Mat2 h;
  for (const auto& t : harmonics_) {
    const double arg = 2.0 * kPi * (static_cast<double>(t.q.i) * uv.x +
                                    static_cast<double>(t.q.j) * uv.y) +
                       t.phase;
    const double c = -t.amplitude * std::cos(arg);
    const Vec2 k = f.wavevector(t.q);
    h.xx += c * k.x * k.x;
    h.xy += c * k.x * k.y;
    h.yx += c * k.y * k.x;
    h.yy += c * k.y * k.y;
  }
  return h;
}

std::vector<Vec2> SymmetricPotential::symmetry_centers() const {
  const Vec2 a = e1(), b = e2();
  if (lattice_ == LatticeKind::square) return {Vec2{}, 0.5 * (a + b)};
  return {Vec2{}, (a + b) / 3.0, 2.0 * (a + b) / 3.0};
}

double SymmetricPotential::amplitude_sum() const {
  double s = 0.0;
  for (const auto& t : harmonics_) s += std::fabs(t.amplitude);
  return s;
}

double SymmetricPotential::gradient_bound() const {
  const LatticeFrame f(lattice_, period_);
  double s = 0.0;
  for (const auto& t : harmonics_) s += std::fabs(t.amplitude) * norm(f.wavevector(t.q));
  return s;
}

SymmetricPotential SymmetricPotential::scaled(double factor) const {
  auto h = harmonics_;
  for (auto& t : h) t.amplitude *= factor;
  return SymmetricPotential(order_, reflection_, reflection_axis_, lattice_, period_, std::move(h));
}

SymmetricPotential make_symmetric_potential(const PotentialSpec& spec) {
  if (spec.order != 3 && spec.order != 4 && spec.order != 6) {
    throw DomainError("rotational order must be 3, 4 or 6, got " + std::to_string(spec.order));
  }
  const LatticeKind lattice = spec.lattice.value_or(lattice_for_order(spec.order));
  if (lattice != lattice_for_order(spec.order)) {
    throw DomainError("order " + std::to_string(spec.order) + " is incompatible with the " +
                      (lattice == LatticeKind::square ? "square" : "triangular") + " lattice");
  }
  if (!(spec.period > 0.0)) throw DomainError("period must be positive");
  const double axis =
      std::isnan(spec.reflection_axis) ? default_axis(spec.order) : spec.reflection_axis;

  const LatticeFrame frame(lattice, spec.period);

  // Group elements as (rotation angle, mirrored?) acting on wavevectors.
  std::vector<std::pair<double, bool>> group;
  for (int j = 0; j < spec.order; ++j) {
    group.emplace_back(2.0 * kPi * j / spec.order, false);
    if (spec.reflection) group.emplace_back(2.0 * kPi * j / spec.order, true);
  }

  std::vector<Harmonic> terms;
  for (const auto& orbit : spec.orbits) {
    if (orbit.amplitude == 0.0) continue;
    const Vec2 k = frame.wavevector({orbit.h, orbit.l});
    std::vector<Harmonic> orbit_terms;
    for (const auto& [angle, mirrored] : group) {
      Vec2 kk = k;
      if (mirrored) kk = rotate(reflect_x(kk), 2.0 * axis);
      kk = rotate(kk, angle);
      Harmonic t = canonical({frame.to_reciprocal(kk), orbit.amplitude, orbit.phase});
      const bool seen = std::any_of(orbit_terms.begin(), orbit_terms.end(), [&](const Harmonic& o) {
        return o.q == t.q && phase_distance(o.phase, t.phase) < 1e-12;
      });
      if (!seen) orbit_terms.push_back(t);
    }
    terms.insert(terms.end(), orbit_terms.begin(), orbit_terms.end());
  }
  // Merge equal (q, phase) contributed by different seed orbits.
  std::vector<Harmonic> merged;
  for (const auto& t : terms) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const Harmonic& o) {
      return o.q == t.q && phase_distance(o.phase, t.phase) < 1e-12;
    });
    if (it == merged.end())
      merged.push_back(t);
    else
      it->amplitude += t.amplitude;
  }
  std::erase_if(merged, [](const Harmonic& t) { return t.amplitude == 0.0; });
  if (merged.empty()) throw DomainError("potential spectrum is empty");
  std::sort(merged.begin(), merged.end(), [](const Harmonic& a, const Harmonic& b) {
    if (a.q.i != b.q.i) return a.q.i < b.q.i;
    if (a.q.j != b.q.j) return a.q.j < b.q.j;
    return a.phase < b.phase;
  });

  SymmetricPotential v(spec.order, spec.reflection, axis, lattice, spec.period, std::move(merged));
  if (spec.normalize) {
    // Dense sample of the unit cell; extrema of smooth finite sums are well resolved at 128^2.
    constexpr int n = 128;
    double vmax = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec2 r = (static_cast<double>(i) / n) * v.e1() + (static_cast<double>(j) / n) * v.e2();
        vmax = std::max(vmax, std::fabs(v.value(r)));
      }
    if (vmax > 0.0) v = v.scaled(1.0 / vmax);
  }
  return v;
}

PotentialSpec random_potential_spec(int order, bool reflection, std::uint64_t seed, int orbits,
                                    double period) {
  if (orbits < 1) throw DomainError("need at least one orbit");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Candidate seed vectors from the first few shells, one representative per
  // rotation orbit (sorted by |k| so low shells dominate).
  const LatticeKind lattice = lattice_for_order(order);
  const LatticeFrame frame(lattice, period);
  std::vector<std::pair<double, LatticeVec>> cands;
  for (int h = -2; h <= 2; ++h)
    for (int l = -2; l <= 2; ++l) {
      if (h == 0 && l == 0) continue;
      cands.emplace_back(norm(frame.wavevector({h, l})), LatticeVec{h, l});
    }
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    if (std::fabs(a.first - b.first) > 1e-9) return a.first < b.first;
    if (a.second.i != b.second.i) return a.second.i < b.second.i;
    return a.second.j < b.second.j;
  });
  std::vector<LatticeVec> reps;
  std::vector<double> rep_norms;
  for (const auto& [kn, q] : cands) {
    const Vec2 k = frame.wavevector(q);
    bool dup = false;
    for (std::size_t r = 0; r < reps.size() && !dup; ++r) {
      if (std::fabs(rep_norms[r] - kn) > 1e-9) continue;
      const Vec2 kr = frame.wavevector(reps[r]);
      for (int j = 0; j < order && !dup; ++j) {
        const Vec2 rot = rotate(kr, 2.0 * kPi * j / order);
        if (norm(rot - k) < 1e-9 || norm(rot + k) < 1e-9) dup = true;
        if (reflection) {
          const Vec2 m = rotate(reflect_x(rot), 2.0 * default_axis(order));
          if (norm(m - k) < 1e-9 || norm(m + k) < 1e-9) dup = true;
        }
      }
    }
    if (!dup) {
      reps.push_back(q);
      rep_norms.push_back(kn);
    }
  }

  PotentialSpec spec;
  spec.order = order;
  spec.reflection = reflection;
  spec.period = period;
  spec.normalize = true;
  spec.orbits.clear();
  // The lowest shell is always present so every potential has lattice-scale structure.
  const int pool = std::min<int>(static_cast<int>(reps.size()), 5);
  std::vector<int> chosen{0};
  while (static_cast<int>(chosen.size()) < std::min(orbits, pool)) {
    const int pick = 1 + static_cast<int>(unit(rng) * (pool - 1));
    if (std::find(chosen.begin(), chosen.end(), pick) == chosen.end()) chosen.push_back(pick);
  }
  for (std::size_t idx = 0; idx < chosen.size(); ++idx) {
    OrbitSpec o;
    o.h = static_cast<int>(reps[static_cast<std::size_t>(chosen[idx])].i);
    o.l = static_cast<int>(reps[static_cast<std::size_t>(chosen[idx])].j);
    const double mag = idx == 0 ? 0.7 + 0.3 * unit(rng) : 0.15 + 0.45 * unit(rng);
    o.amplitude = unit(rng) < 0.5 ? -mag : mag;
    o.phase = 2.0 * kPi * unit(rng);
    spec.orbits.push_back(o);
  }
  return spec;
}

SymmetricPotential three_cosine_potential(double period) {
  PotentialSpec spec;
  spec.order = 6;
  spec.reflection = true;
  spec.period = period;
  spec.orbits = {OrbitSpec{1, 0, 1.0, 0.0}};
  return make_symmetric_potential(spec);
}

// ---------------------------------------------------------------------------

BilayerPotential::BilayerPotential(SymmetricPotential layer, double alpha, Vec2 shift,
                                   Superposition kind, double lambda)
    : layer_(std::move(layer)),
      alpha_(alpha),
      shift_(shift),
      kind_(kind),
      lambda_(kind == Superposition::linear ? 0.0 : lambda),
      cos_a_(std::cos(alpha)),
      sin_a_(std::sin(alpha)) {}

Vec2 BilayerPotential::second_layer_point(const Vec2& r) const {
  const Vec2 d = r - shift_;
  // reflect_x(rotate(d, -alpha))
  return {cos_a_ * d.x + sin_a_ * d.y, -(-sin_a_ * d.x + cos_a_ * d.y)};
}

std::array<double, 4> BilayerPotential::embed(const Vec2& r) const {
  const Vec2 d = r - shift_;
  const Vec2 p = {cos_a_ * d.x + sin_a_ * d.y, -sin_a_ * d.x + cos_a_ * d.y};
  return {r.x, r.y, p.x, p.y};
}

double BilayerPotential::layer2(const Vec2& r) const { return layer_.value(second_layer_point(r)); }

double BilayerPotential::combine(double v1, double v2) const {
  if (kind_ == Superposition::linear) return v1 + v2;
  return v1 + v2 + lambda_ * v1 * v2;
}

double BilayerPotential::lift(const std::array<double, 4>& z) const {
  const double v1 = layer_.value({z[0], z[1]});
  const double v2 = layer_.value(reflect_x({z[2], z[3]}));
  return combine(v1, v2);
}

Vec2 BilayerPotential::gradient(const Vec2& r) const {
  const Vec2 g1 = layer_.gradient(r);
  const Vec2 gz = layer_.gradient(second_layer_point(r));
  // Jacobian of r -> second_layer_point is J = S_x R(-alpha); grad = J^T gz.
  const Vec2 g2 = {cos_a_ * gz.x + sin_a_ * gz.y, sin_a_ * gz.x - cos_a_ * gz.y};
  if (kind_ == Superposition::linear) return g1 + g2;
  const double v1 = layer1(r), v2 = layer2(r);
  return (1.0 + lambda_ * v2) * g1 + (1.0 + lambda_ * v1) * g2;
}

Mat2 BilayerPotential::hessian(const Vec2& r) const {
  const Mat2 h1 = layer_.hessian(r);
  const Mat2 hz = layer_.hessian(second_layer_point(r));
  // J = [[c, s], [s, -c]] (symmetric), H2 = J hz J.
  const double c = cos_a_, s = sin_a_;
  const Mat2 t{c * hz.xx + s * hz.yx, c * hz.xy + s * hz.yy, s * hz.xx - c * hz.yx,
               s * hz.xy - c * hz.yy};
  const Mat2 h2{t.xx * c + t.xy * s, t.xx * s - t.xy * c, t.yx * c + t.yy * s,
                t.yx * s - t.yy * c};
  if (kind_ == Superposition::linear) {
    return {h1.xx + h2.xx, h1.xy + h2.xy, h1.yx + h2.yx, h1.yy + h2.yy};
  }
  const double v1 = layer1(r), v2 = layer2(r);
  const Vec2 g1 = layer_.gradient(r);
  const Vec2 gz = layer_.gradient(second_layer_point(r));
  const Vec2 g2 = {c * gz.x + s * gz.y, s * gz.x - c * gz.y};
  const double a1 = 1.0 + lambda_ * v2, a2 = 1.0 + lambda_ * v1, l = lambda_;
  return {a1 * h1.xx + a2 * h2.xx + l * 2.0 * g1.x * g2.x,
          a1 * h1.xy + a2 * h2.xy + l * (g1.x * g2.y + g2.x * g1.y),
          a1 * h1.yx + a2 * h2.yx + l * (g1.y * g2.x + g2.y * g1.x),
          a1 * h1.yy + a2 * h2.yy + l * 2.0 * g1.y * g2.y};
}

BilayerPotential BilayerPotential::with_shift(const Vec2& shift) const {
  return BilayerPotential(layer_, alpha_, shift, kind_, lambda_);
}

BilayerPotential BilayerPotential::with_layer(SymmetricPotential layer) const {
  return BilayerPotential(std::move(layer), alpha_, shift_, kind_, lambda_);
}

LipschitzBound lipschitz_bound(const BilayerPotential& v) {
  const double b = v.layer().gradient_bound();
  double c1 = std::sqrt(2.0) * b;
  if (v.superposition() == Superposition::nonlinear) {
    c1 *= 1.0 + std::fabs(v.lambda()) * v.layer().amplitude_sum();
  }
  return {c1};
}

double measured_gradient_max(const SymmetricPotential& layer, int grid) {
  const Vec2 a = layer.e1(), b = layer.e2();
  std::vector<std::pair<double, Vec2>> best;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const Vec2 r = (static_cast<double>(i) / grid) * a + (static_cast<double>(j) / grid) * b;
      best.emplace_back(norm(layer.gradient(r)), r);
    }
  std::partial_sort(best.begin(), best.begin() + std::min<std::ptrdiff_t>(8, std::ssize(best)),
                    best.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  double gmax = best.front().first;
  const double h = layer.period() / grid;
  for (std::size_t s = 0; s < std::min<std::size_t>(8, best.size()); ++s) {
    Vec2 r = best[s].second;
    double step = h;
    double cur = best[s].first;
    // Pattern search on |grad V1|; the grid maximum is already within O(h^2).
    for (int it = 0; it < 60 && step > 1e-10 * layer.period(); ++it) {
      bool moved = false;
      for (const Vec2 d : {Vec2{1, 0}, Vec2{-1, 0}, Vec2{0, 1}, Vec2{0, -1}}) {
        const Vec2 cand = r + step * d;
        const double g = norm(layer.gradient(cand));
        if (g > cur) {
          cur = g;
          r = cand;
          moved = true;
        }
      }
      if (!moved) step *= 0.5;
    }
    gmax = std::max(gmax, cur);
  }
  return gmax;
}

double measured_lipschitz(const BilayerPotential& v, int grid) {
  // F depends on (z1, z2) and (z3, z4) through independent copies of V1.
  const double g = measured_gradient_max(v.layer(), grid);
  if (v.superposition() == Superposition::linear) return std::sqrt(2.0) * g;
  return std::sqrt(2.0) * g * (1.0 + std::fabs(v.lambda()) * v.layer().amplitude_sum());
}

bool SymmetryReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const SymmetryCheck& c) { return c.passed || !c.required; });
}

const SymmetryCheck* SymmetryReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

double rotation_residual(const ScalarFunction& f, const Vec2& center, double angle, double radius,
                         int samples) {
  double worst = 0.0;
  for (const Vec2& p : disc_samples(radius, samples)) {
    const Vec2 r = center + p;
    const Vec2 q = center + rotate(p, angle);
    worst = std::max(worst, std::fabs(f(q) - f(r)));
  }
  return worst;
}

double reflection_residual(const ScalarFunction& f, const Vec2& point, double axis_angle,
                           double radius, int samples) {
  double worst = 0.0;
  for (const Vec2& p : disc_samples(radius, samples)) {
    const Vec2 r = point + p;
    const Vec2 q = point + rotate(reflect_x(p), 2.0 * axis_angle);
    worst = std::max(worst, std::fabs(f(q) - f(r)));
  }
  return worst;
}

SymmetryReport verify_symmetry(const SymmetricPotential& v, double tolerance) {
  SymmetryReport rep;
  const ScalarFunction f = [&v](const Vec2& r) { return v.value(r); };
  const double radius = 3.0 * v.period();
  const auto centers = v.symmetry_centers();
  const int rot_order = v.order() == 6 ? 3 : v.order();
  // Order 6 is checked as 120 degrees about every centre plus 60 about the origin.
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double res = rotation_residual(f, centers[c], 2.0 * kPi / rot_order, radius);
    rep.checks.push_back({"rotation_center_" + std::to_string(c), res, res <= tolerance, true});
  }
  {
    const double res = rotation_residual(f, {}, kPi / 3.0, radius);
    rep.checks.push_back({"rotation_60", res, res <= tolerance, v.order() == 6});
  }
  if (v.reflection()) {
    const double res = reflection_residual(f, {}, v.reflection_axis(), radius);
    rep.checks.push_back({"reflection", res, res <= tolerance, true});
  }
  return rep;
}

SymmetryReport verify_symmetry(const BilayerPotential& v, double tolerance) {
  SymmetryReport rep;
  const ScalarFunction f = [&v](const Vec2& r) { return v.value(r); };
  const double radius = 4.0 * v.layer().period();
  const int order = v.layer().order();
  {
    const double res = rotation_residual(f, {}, 2.0 * kPi / order, radius);
    rep.checks.push_back({"rotation_origin", res, res <= tolerance, true});
  }
  const int axes = order == 4 ? 2 : 3;
  const double step = order == 4 ? kPi / 2.0 : 2.0 * kPi / 3.0;
  for (int j = 0; j < axes; ++j) {
    const double res = reflection_residual(f, {}, 0.5 * v.alpha() + j * step, radius);
    rep.checks.push_back({"reflection_axis_" + std::to_string(j), res, res <= tolerance, true});
  }
  return rep;
}

CriticalPointSummary critical_points(const BilayerPotential& v, const Vec2& b1, const Vec2& b2,
                                     int seeds_per_axis) {
  CriticalPointSummary out;
  const double det_b = cross(b1, b2);
  const double scale = std::sqrt(std::fabs(det_b));
  auto cell_coords = [&](const Vec2& r) {
    return Vec2{cross(r, b2) / det_b, cross(b1, r) / det_b};
  };
  for (int i = 0; i < seeds_per_axis; ++i)
    for (int j = 0; j < seeds_per_axis; ++j) {
      Vec2 r = ((i + 0.5) / seeds_per_axis) * b1 + ((j + 0.5) / seeds_per_axis) * b2;
      bool ok = false;
      for (int it = 0; it < 40; ++it) {
        const Vec2 g = v.gradient(r);
        const Mat2 h = v.hessian(r);
        const double det = h.xx * h.yy - h.xy * h.yx;
        if (std::fabs(det) < 1e-300) break;
        const Vec2 dx = {(h.yy * g.x - h.xy * g.y) / det, (-h.yx * g.x + h.xx * g.y) / det};
        // Damped step: Newton may jump far from the seed's basin.
        const double len = norm(dx);
        const double cap = 0.25 * scale / seeds_per_axis * 4.0;
        r -= len > cap ? (cap / len) * dx : dx;
        if (norm(v.gradient(r)) < 1e-10 * (1.0 + v.layer().gradient_bound())) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
      Vec2 c = cell_coords(r);
      c = {c.x - std::floor(c.x), c.y - std::floor(c.y)};
      const Vec2 p = c.x * b1 + c.y * b2;
      const bool dup = std::any_of(out.points.begin(), out.points.end(), [&](const CriticalPoint& q) {
        Vec2 d = cell_coords(q.position - p);
        d = {d.x - std::round(d.x), d.y - std::round(d.y)};
        return norm(d.x * b1 + d.y * b2) < 1e-6 * scale;
      });
      if (dup) continue;
      const Mat2 h = v.hessian(p);
      const double det = h.xx * h.yy - h.xy * h.yx;
      CriticalPoint cp;
      cp.position = p;
      cp.value = v.value(p);
      cp.hessian_det = det;
      cp.kind = det < 0 ? CriticalKind::saddle
                        : (h.xx + h.yy > 0 ? CriticalKind::minimum : CriticalKind::maximum);
      out.points.push_back(cp);
    }
  double max_det = 0.0, min_saddle = std::numeric_limits<double>::infinity();
  for (const auto& p : out.points) {
    max_det = std::max(max_det, std::fabs(p.hessian_det));
    if (p.kind == CriticalKind::saddle) min_saddle = std::min(min_saddle, std::fabs(p.hessian_det));
  }
  if (max_det > 0.0 && std::isfinite(min_saddle)) {
    out.min_relative_saddle_det = min_saddle / max_det;
    out.degenerate_suspect = out.min_relative_saddle_det < 1e-6;
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.value < b.value; });
  return out;
}

}  // namespace qpl
