#include "qpl/sampler.hpp"

#include <algorithm>

#include "qpl/parallel.hpp"

namespace qpl {

ScalarField::ScalarField(TorusGeometry g, std::size_t nx, std::size_t ny, std::vector<double> values)
    : kind_(GridKind::torus), torus_(g), nx_(nx), ny_(ny), values_(std::move(values)) {
  if (values_.size() != nx_ * ny_ || nx_ == 0 || ny_ == 0) {
    throw DomainError("field size does not match its resolution");
  }
  if (std::fabs(cross(g.b1, g.b2)) <= 0.0) throw DomainError("degenerate torus cell");
  update_range();
}

ScalarField::ScalarField(WindowGeometry g, std::size_t nx, std::size_t ny, std::vector<double> values)
    : kind_(GridKind::window), window_(g), nx_(nx), ny_(ny), values_(std::move(values)) {
  if (values_.size() != nx_ * ny_ || nx_ == 0 || ny_ == 0) {
    throw DomainError("field size does not match its resolution");
  }
  if (!(g.spacing > 0.0)) throw DomainError("window spacing must be positive");
  update_range();
}

void ScalarField::update_range() {
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  min_ = *lo;
  max_ = *hi;
}

Vec2 ScalarField::position(double i, double j) const {
  if (kind_ == GridKind::torus) {
    return (i / static_cast<double>(nx_)) * torus_.b1 + (j / static_cast<double>(ny_)) * torus_.b2;
  }
  const double ci = 0.5 * static_cast<double>(nx_ - 1);
  const double cj = 0.5 * static_cast<double>(ny_ - 1);
  return window_.center + Vec2{(i - ci) * window_.spacing, (j - cj) * window_.spacing};
}

Vec2 ScalarField::step_i() const {
  if (kind_ == GridKind::torus) return torus_.b1 / static_cast<double>(nx_);
  return {window_.spacing, 0.0};
}

Vec2 ScalarField::step_j() const {
  if (kind_ == GridKind::torus) return torus_.b2 / static_cast<double>(ny_);
  return {0.0, window_.spacing};
}

double ScalarField::spacing() const { return std::max(norm(step_i()), norm(step_j())); }

double ScalarField::extent() const {
  if (kind_ == GridKind::torus) return std::max(norm(torus_.b1), norm(torus_.b2));
  return 2.0 * window_.half_width;
}

namespace {

// Phase of one cosine term along a linear grid: theta(i, j) = base + i*di + j*dj.
struct LinearPhase {
  double amplitude;
  double base;
  double di;
  double dj;
};

void add_layer_phases(const SymmetricPotential& layer, const Vec2& origin, const Vec2& si,
                      const Vec2& sj, std::vector<LinearPhase>& out) {
  for (const auto& h : layer.harmonics()) {
    const Vec2 k = layer.wavevector(h);
    out.push_back({h.amplitude, dot(k, origin) + h.phase, dot(k, si), dot(k, sj)});
  }
}

// Evaluates sum_t A_t cos(theta_t(i, j)) on an nx-by-ny grid.
std::vector<double> evaluate_phases(const std::vector<LinearPhase>& terms, std::size_t nx,
                                    std::size_t ny) {
  const std::size_t nt = terms.size();
  std::vector<double> er(nt * nx), ei(nt * nx);
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t i = 0; i < nx; ++i) {
      const double th = static_cast<double>(i) * terms[t].di;
      er[t * nx + i] = terms[t].amplitude * std::cos(th);
      ei[t * nx + i] = terms[t].amplitude * std::sin(th);
    }
  std::vector<double> out(nx * ny, 0.0);
  parallel_for(ny, [&](std::size_t j) {
    double* row = out.data() + j * nx;
    for (std::size_t t = 0; t < nt; ++t) {
      const double th = terms[t].base + static_cast<double>(j) * terms[t].dj;
      const double fr = std::cos(th), fi = std::sin(th);
      const double* a = er.data() + t * nx;
      const double* b = ei.data() + t * nx;
      for (std::size_t i = 0; i < nx; ++i) row[i] += a[i] * fr - b[i] * fi;
    }
  });
  return out;
}

std::vector<double> sample_linear_grid(const BilayerPotential& v, const Vec2& origin, const Vec2& si,
                                       const Vec2& sj, std::size_t nx, std::size_t ny) {
  std::vector<LinearPhase> t1, t2;
  add_layer_phases(v.layer(), origin, si, sj, t1);
  // Second layer argument is affine in r: J (r - a) with J = S_x R(-alpha).
  const Vec2 p0 = v.second_layer_point(origin);
  const Vec2 pi = v.second_layer_point(origin + si) - p0;
  const Vec2 pj = v.second_layer_point(origin + sj) - p0;
  add_layer_phases(v.layer(), p0, pi, pj, t2);
  if (v.superposition() == Superposition::linear) {
    t1.insert(t1.end(), t2.begin(), t2.end());
    return evaluate_phases(t1, nx, ny);
  }
  auto a = evaluate_phases(t1, nx, ny);
  const auto b = evaluate_phases(t2, nx, ny);
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = v.combine(a[k], b[k]);
  return a;
}

void check_tolerance(const BilayerPotential& v, double h, const SampleOptions& opts) {
  if (!opts.level_tolerance) return;
  const double c1 = lipschitz_bound(v).C1;
  const double tau = *opts.level_tolerance;
  if (h * c1 > 0.5 * tau) {
    throw DomainError("grid spacing " + std::to_string(h) + " too coarse for level tolerance " +
                      std::to_string(tau) + " (needs h <= " + std::to_string(0.5 * tau / c1) + ")");
  }
}

}  // namespace

ScalarField sample_cell(const BilayerPotential& v, const Vec2& b1, const Vec2& b2,
                        std::size_t resolution, const SampleOptions& opts) {
  if (resolution < 2) throw DomainError("torus resolution must be at least 2");
  const double n = static_cast<double>(resolution);
  check_tolerance(v, std::max(norm(b1), norm(b2)) / n, opts);
  auto values = sample_linear_grid(v, {}, b1 / n, b2 / n, resolution, resolution);
  ScalarField f(TorusGeometry{b1, b2}, resolution, resolution, std::move(values));
  f.source = std::make_shared<const BilayerPotential>(v);
  return f;
}

ScalarField sample_torus(const BilayerPotential& v, const MagicAngle& angle, std::size_t resolution,
                         const SampleOptions& opts) {
  if (std::fabs(v.alpha() - angle.alpha) > 1e-12) {
    throw DomainError("bilayer angle " + std::to_string(v.alpha()) +
                      " is not the commensurate angle " + std::to_string(angle.alpha));
  }
  if (std::fabs(v.layer().period() - angle.period) > 1e-12 * angle.period) {
    throw DomainError("magic angle period does not match the layer period");
  }
  auto f = sample_cell(v, angle.b1, angle.b2, resolution, opts);
  f.description = "torus m=" + std::to_string(angle.m) + " n=" + std::to_string(angle.n);
  return f;
}

ScalarField sample_torus(const SymmetricPotential& v, std::size_t resolution) {
  if (resolution < 2) throw DomainError("torus resolution must be at least 2");
  const double n = static_cast<double>(resolution);
  std::vector<LinearPhase> t;
  add_layer_phases(v, {}, v.e1() / n, v.e2() / n, t);
  auto values = evaluate_phases(t, resolution, resolution);
  ScalarField f(TorusGeometry{v.e1(), v.e2()}, resolution, resolution, std::move(values));
  f.description = "single layer unit cell";
  return f;
}

ScalarField sample_window(const BilayerPotential& v, const Vec2& center, double half_width,
                          std::size_t resolution, const SampleOptions& opts) {
  if (!(half_width > 0.0)) throw DomainError("window half-width must be positive");
  if (resolution < 2) throw DomainError("window resolution must be at least 2");
  const std::size_t K = resolution / 2;
  const std::size_t n = 2 * K + 1;
  const double h = half_width / static_cast<double>(K);
  check_tolerance(v, h, opts);
  const Vec2 origin = center - Vec2{half_width, half_width};
  auto values = sample_linear_grid(v, origin, {h, 0.0}, {0.0, h}, n, n);
  ScalarField f(WindowGeometry{center, half_width, h}, n, n, std::move(values));
  f.source = std::make_shared<const BilayerPotential>(v);
  f.description = "window";
  return f;
}

ScalarField crop_window(const ScalarField& f, double half_width) {
  if (f.is_torus()) throw DomainError("crop_window needs a window field");
  const auto& w = f.window();
  const std::size_t K = f.nx() / 2;
  auto k = static_cast<std::size_t>(std::floor(half_width / w.spacing + 1e-9));
  k = std::min(k, K);
  if (k == 0) throw DomainError("cropped window is empty");
  const std::size_t n = 2 * k + 1;
  const std::size_t off = K - k;
  std::vector<double> vals(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) vals[j * n + i] = f(off + i, off + j);
  ScalarField out(WindowGeometry{w.center, static_cast<double>(k) * w.spacing, w.spacing}, n, n,
                  std::move(vals));
  out.source = f.source;
  out.description = f.description;
  return out;
}

std::size_t resolution_for_tolerance(double C1, double extent, double tau) {
  if (!(tau > 0.0) || !(C1 > 0.0)) throw DomainError("tolerance and C1 must be positive");
  return static_cast<std::size_t>(std::ceil(extent * 2.0 * C1 / tau));
}

ScalarField negated(const ScalarField& f) {
  std::vector<double> vals(f.values());
  for (auto& x : vals) x = -x;
  ScalarField out = f.is_torus() ? ScalarField(f.torus(), f.nx(), f.ny(), std::move(vals))
                                 : ScalarField(f.window(), f.nx(), f.ny(), std::move(vals));
  out.description = f.description + " (negated)";
  return out;
}

}  // namespace qpl
