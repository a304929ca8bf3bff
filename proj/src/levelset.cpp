#include "qpl/levelset.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace qpl {

std::string to_string(Side s) { return s == Side::below ? "below" : "above"; }

std::string to_string(Connectivity c) {
  switch (c) {
    case Connectivity::automatic: return "automatic";
    case Connectivity::four: return "four";
    case Connectivity::six: return "six";
    case Connectivity::eight: return "eight";
  }
  return "unknown";
}

std::string to_string(Situation s) {
  switch (s) {
    case Situation::A_minus: return "A_minus";
    case Situation::A_plus: return "A_plus";
    case Situation::critical: return "critical";
    case Situation::undetermined: return "undetermined";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// WindingLattice

namespace {

std::int64_t gcd_ext(std::int64_t a, std::int64_t b, std::int64_t& s, std::int64_t& t) {
  std::int64_t s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (b != 0) {
    const std::int64_t q = a / b;
    std::int64_t tmp = a - q * b;
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

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

LatticeVec sign_normalized(LatticeVec v) {
  if (v.i < 0 || (v.i == 0 && v.j < 0)) return {-v.i, -v.j};
  return v;
}

}  // namespace

void WindingLattice::add(LatticeVec v) {
  if (v.i == 0 && v.j == 0) return;
  LatticeVec& u = basis_[0];
  std::int64_t d = basis_[1].j;
  std::int64_t s = 0, t = 0;
  const std::int64_t g = gcd_ext(u.i, v.i, s, t);
  std::int64_t rem;
  if (g == 0) {
    rem = v.j;
  } else {
    rem = (u.i / g) * v.j - (v.i / g) * u.j;
    u = {s * u.i + t * v.i, s * u.j + t * v.j};
  }
  d = std::gcd(d, rem);
  if (u.i < 0) u = {-u.i, -u.j};
  if (d != 0) u.j = floor_mod(u.j, d);
  basis_[1] = {0, d};
}

void WindingLattice::merge(const WindingLattice& other) {
  add(other.basis_[0]);
  add(other.basis_[1]);
}

int WindingLattice::rank() const {
  const bool a = basis_[0].i != 0 || basis_[0].j != 0;
  const bool b = basis_[1].j != 0;
  return static_cast<int>(a) + static_cast<int>(b);
}

LatticeVec WindingLattice::direction() const {
  if (rank() != 1) return {};
  LatticeVec v = basis_[1].j != 0 ? basis_[1] : basis_[0];
  const std::int64_t g = std::gcd(v.i, v.j);
  if (g > 1) v = {v.i / g, v.j / g};
  return sign_normalized(v);
}

// ---------------------------------------------------------------------------

std::size_t ComponentSet::wrapping_count() const {
  return static_cast<std::size_t>(std::count_if(components.begin(), components.end(),
                                                [](const ComponentStats& c) { return !c.wrap.bounded(); }));
}

const ComponentStats* ComponentSet::largest_bounded() const {
  const ComponentStats* best = nullptr;
  for (const auto& c : components)
    if (c.wrap.bounded() && (!best || c.diameter > best->diameter)) best = &c;
  return best;
}

double ComponentSet::max_bounded_diameter() const {
  const auto* c = largest_bounded();
  return c ? c->diameter : 0.0;
}

bool in_side(double value, double level, Side side) {
  return side == Side::below ? value <= level : value > level;
}

Connectivity resolve_connectivity(const ScalarField& field, Connectivity c) {
  if (c != Connectivity::automatic) return c;
  if (!field.is_torus()) return Connectivity::four;
  const Vec2 a = field.step_i(), b = field.step_j();
  const double cosang = dot(a, b) / (norm(a) * norm(b));
  return std::fabs(std::fabs(cosang) - 0.5) < 1e-6 ? Connectivity::six : Connectivity::four;
}

std::vector<std::array<int, 2>> forward_neighbors(const ScalarField& field, Connectivity c) {
  c = resolve_connectivity(field, c);
  std::vector<std::array<int, 2>> out{{1, 0}, {0, 1}};
  if (c == Connectivity::eight) {
    out.push_back({1, 1});
    out.push_back({-1, 1});
  } else if (c == Connectivity::six) {
    // the shorter diagonal of the sheared cell
    if (dot(field.step_i(), field.step_j()) > 0.0)
      out.push_back({-1, 1});
    else
      out.push_back({1, 1});
  }
  return out;
}

namespace {

using Lift = std::array<std::int32_t, 2>;

class Labeler {
 public:
  Labeler(const ScalarField& f, double level, Side side, Connectivity conn, bool stop_at_wrap)
      : f_(f),
        level_(level),
        side_(side),
        torus_(f.is_torus()),
        stop_at_wrap_(stop_at_wrap),
        nbrs_(forward_neighbors(f, conn)) {}

  void run() {
    const std::size_t n = f_.size();
    parent_.assign(n, -1);
    size_.assign(n, 0);
    if (torus_) rel_.assign(n, Lift{0, 0});
    const auto nx = static_cast<std::int64_t>(f_.nx());
    const auto ny = static_cast<std::int64_t>(f_.ny());
    for (std::size_t idx = 0; idx < n; ++idx) {
      if (in_side(f_.at(idx), level_, side_)) {
        parent_[idx] = static_cast<std::int32_t>(idx);
        size_[idx] = 1;
      }
    }
    for (std::int64_t j = 0; j < ny; ++j) {
      for (std::int64_t i = 0; i < nx; ++i) {
        const auto idx = static_cast<std::size_t>(j * nx + i);
        if (parent_[idx] < 0) continue;
        for (const auto& d : nbrs_) {
          std::int64_t ni = i + d[0], nj = j + d[1];
          Lift w{0, 0};
          if (torus_) {
            if (ni < 0) { ni += nx; w[0] = -1; }
            if (ni >= nx) { ni -= nx; w[0] = 1; }
            if (nj < 0) { nj += ny; w[1] = -1; }
            if (nj >= ny) { nj -= ny; w[1] = 1; }
          } else if (ni < 0 || ni >= nx || nj < 0 || nj >= ny) {
            continue;
          }
          const auto nidx = static_cast<std::size_t>(nj * nx + ni);
          if (parent_[nidx] < 0) continue;
          unite(idx, nidx, w);
          if (stop_at_wrap_ && any_wrap_) return;
        }
      }
    }
  }

  bool any_wrap() const { return any_wrap_; }

  ComponentSet build(bool compute_diameters) {
    ComponentSet out;
    out.side = side_;
    out.level = level_;
    out.grid = f_.kind();
    out.nx = f_.nx();
    out.ny = f_.ny();
    out.spacing = f_.spacing();
    const std::size_t n = f_.size();
    out.labels.assign(n, -1);
    if (torus_) out.lift.assign(n, Lift{0, 0});

    std::unordered_map<std::int32_t, std::int32_t> root_to_id;
    std::vector<Lift> seed_lift;
    for (std::size_t idx = 0; idx < n; ++idx) {
      if (parent_[idx] < 0) continue;
      Lift r{0, 0};
      const std::int32_t root = find(static_cast<std::int32_t>(idx), r);
      auto [it, inserted] = root_to_id.try_emplace(root, static_cast<std::int32_t>(out.components.size()));
      if (inserted) {
        ComponentStats cs;
        cs.id = it->second;
        cs.seed_cell = idx;
        const auto lat = lattices_.find(root);
        if (lat != lattices_.end()) cs.wrap.lattice = lat->second;
        cs.wrap.rank = cs.wrap.lattice.rank();
        cs.wrap.direction = cs.wrap.lattice.direction();
        out.components.push_back(cs);
        seed_lift.push_back(r);
      }
      const std::int32_t id = it->second;
      out.labels[idx] = id;
      if (torus_) {
        const Lift& s = seed_lift[static_cast<std::size_t>(id)];
        out.lift[idx] = {r[0] - s[0], r[1] - s[1]};
      }
    }
    collect_stats(out, compute_diameters);
    return out;
  }

 private:
  std::int32_t find(std::int32_t x, Lift& off) {
    path_.clear();
    std::int32_t r = x;
    while (parent_[static_cast<std::size_t>(r)] != r) {
      path_.push_back(r);
      r = parent_[static_cast<std::size_t>(r)];
    }
    if (torus_) {
      // Rewrite offsets relative to the root, nearest-to-root first.
      Lift acc{0, 0};
      for (auto it = path_.rbegin(); it != path_.rend(); ++it) {
        Lift& rl = rel_[static_cast<std::size_t>(*it)];
        acc = {acc[0] + rl[0], acc[1] + rl[1]};
        rl = acc;
        parent_[static_cast<std::size_t>(*it)] = r;
      }
      off = path_.empty() ? Lift{0, 0} : rel_[static_cast<std::size_t>(x)];
    } else {
      for (auto p : path_) parent_[static_cast<std::size_t>(p)] = r;
      off = {0, 0};
    }
    return r;
  }

  void unite(std::size_t u, std::size_t v, Lift w) {
    Lift ru_off, rv_off;
    const std::int32_t ru = find(static_cast<std::int32_t>(u), ru_off);
    const std::int32_t rv = find(static_cast<std::int32_t>(v), rv_off);
    // L(v) = L(u) + w  =>  L(rv) - L(ru) = Ru + w - Rv
    const Lift t{ru_off[0] + w[0] - rv_off[0], ru_off[1] + w[1] - rv_off[1]};
    if (ru == rv) {
      if (t[0] != 0 || t[1] != 0) {
        lattices_[ru].add({t[0], t[1]});
        any_wrap_ = true;
      }
      return;
    }
    std::int32_t keep = ru, drop = rv;
    Lift drop_rel = t;
    if (size_[static_cast<std::size_t>(ru)] < size_[static_cast<std::size_t>(rv)]) {
      keep = rv;
      drop = ru;
      drop_rel = {-t[0], -t[1]};
    }
    parent_[static_cast<std::size_t>(drop)] = keep;
    size_[static_cast<std::size_t>(keep)] += size_[static_cast<std::size_t>(drop)];
    if (torus_) rel_[static_cast<std::size_t>(drop)] = drop_rel;
    const auto it = lattices_.find(drop);
    if (it != lattices_.end()) {
      lattices_[keep].merge(it->second);
      lattices_.erase(drop);
    }
  }

  void collect_stats(ComponentSet& out, bool compute_diameters) const {
    const std::size_t nx = f_.nx(), ny = f_.ny();
    const std::size_t nc = out.components.size();
    const double inf = std::numeric_limits<double>::infinity();
    for (auto& c : out.components) {
      c.bounding_box = {{inf, inf}, {-inf, -inf}};
    }
    auto lifted = [&](std::size_t idx) {
      const std::size_t i = idx % nx, j = idx / nx;
      double li = static_cast<double>(i), lj = static_cast<double>(j);
      if (torus_) {
        li += static_cast<double>(out.lift[idx][0]) * static_cast<double>(nx);
        lj += static_cast<double>(out.lift[idx][1]) * static_cast<double>(ny);
      }
      return f_.position(li, lj);
    };
    auto row_extreme = [&](std::size_t idx) {
      const std::size_t i = idx % nx;
      if (i == 0 || i + 1 == nx) return true;
      const auto id = out.labels[idx];
      if (out.labels[idx - 1] != id || out.labels[idx + 1] != id) return true;
      if (torus_ && (out.lift[idx - 1] != out.lift[idx] || out.lift[idx + 1] != out.lift[idx])) return true;
      return false;
    };

    std::vector<std::size_t> hull_count(nc, 0);
    for (std::size_t idx = 0; idx < out.labels.size(); ++idx) {
      const auto id = out.labels[idx];
      if (id < 0) continue;
      auto& c = out.components[static_cast<std::size_t>(id)];
      ++c.cell_count;
      const std::size_t i = idx % nx, j = idx / nx;
      if (!torus_ && (i == 0 || j == 0 || i + 1 == nx || j + 1 == ny)) c.touches_boundary = true;
      const Vec2 p = lifted(idx);
      c.bounding_box.lo = {std::min(c.bounding_box.lo.x, p.x), std::min(c.bounding_box.lo.y, p.y)};
      c.bounding_box.hi = {std::max(c.bounding_box.hi.x, p.x), std::max(c.bounding_box.hi.y, p.y)};
      if (compute_diameters && c.wrap.bounded() && row_extreme(idx)) ++hull_count[static_cast<std::size_t>(id)];
    }
    for (auto& c : out.components) {
      if (!c.wrap.bounded()) c.diameter = inf;
    }
    if (!compute_diameters) return;

    std::vector<std::size_t> start(nc + 1, 0);
    for (std::size_t c = 0; c < nc; ++c) start[c + 1] = start[c] + hull_count[c];
    std::vector<Vec2> pts(start[nc]);
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    for (std::size_t idx = 0; idx < out.labels.size(); ++idx) {
      const auto id = out.labels[idx];
      if (id < 0) continue;
      const auto uid = static_cast<std::size_t>(id);
      if (!out.components[uid].wrap.bounded() || !row_extreme(idx)) continue;
      pts[fill[uid]++] = lifted(idx);
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (!out.components[c].wrap.bounded()) continue;
      out.components[c].diameter = point_set_diameter(
          std::vector<Vec2>(pts.begin() + static_cast<std::ptrdiff_t>(start[c]),
                            pts.begin() + static_cast<std::ptrdiff_t>(start[c + 1])));
    }
  }

  const ScalarField& f_;
  double level_;
  Side side_;
  bool torus_;
  bool stop_at_wrap_;
  std::vector<std::array<int, 2>> nbrs_;
  std::vector<std::int32_t> parent_;
  std::vector<std::int32_t> size_;
  std::vector<Lift> rel_;
  std::unordered_map<std::int32_t, WindingLattice> lattices_;
  std::vector<std::int32_t> path_;
  bool any_wrap_ = false;
};

}  // namespace

double point_set_diameter(std::vector<Vec2> pts) {
  if (pts.size() < 2) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 2) return 0.0;
  // Andrew's monotone chain, counter-clockwise, collinear points dropped.
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  const std::size_t m = hull.size();
  if (m == 1) return 0.0;
  if (m == 2) return norm(hull[1] - hull[0]);
  // Rotating calipers over antipodal pairs.
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t ni = (i + 1) % m;
    const Vec2 edge = hull[ni] - hull[i];
    while (cross(edge, hull[(j + 1) % m] - hull[i]) > cross(edge, hull[j] - hull[i])) j = (j + 1) % m;
    // with parallel edges both j and j + 1 are antipodal to this edge
    const Vec2& nj = hull[(j + 1) % m];
    best = std::max({best, norm(hull[j] - hull[i]), norm(hull[j] - hull[ni]), norm(nj - hull[i]), norm(nj - hull[ni])});
  }
  return best;
}

ComponentSet label_components(const ScalarField& field, double level, Side side,
                              const LabelOptions& opts) {
  const Connectivity conn = resolve_connectivity(field, opts.connectivity);
  Labeler lab(field, level, side, conn, false);
  lab.run();
  auto out = lab.build(opts.compute_diameters);
  out.connectivity = conn;
  return out;
}

bool has_wrapping_component(const ScalarField& field, double level, Side side,
                            Connectivity connectivity) {
  if (!field.is_torus()) return false;
  Labeler lab(field, level, side, resolve_connectivity(field, connectivity), true);
  lab.run();
  return lab.any_wrap();
}

Diameter component_diameter(const ComponentSet& set, const ScalarField& field, int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= set.components.size()) {
    throw DomainError("component id out of range");
  }
  const auto& c = set.components[static_cast<std::size_t>(id)];
  if (!c.wrap.bounded()) {
    throw DomainError("component " + std::to_string(id) + " wraps the torus; diameter is unbounded");
  }
  std::vector<Vec2> pts;
  pts.reserve(c.cell_count);
  for (std::size_t idx = 0; idx < set.labels.size(); ++idx) {
    if (set.labels[idx] != id) continue;
    double li = static_cast<double>(idx % set.nx), lj = static_cast<double>(idx / set.nx);
    if (!set.lift.empty()) {
      li += static_cast<double>(set.lift[idx][0]) * static_cast<double>(set.nx);
      lj += static_cast<double>(set.lift[idx][1]) * static_cast<double>(set.ny);
    }
    pts.push_back(field.position(li, lj));
  }
  return {point_set_diameter(std::move(pts)), field.spacing()};
}

// ---------------------------------------------------------------------------
// Situations

namespace {

struct SpanCounts {
  std::size_t above = 0;
  std::size_t below = 0;
};

SpanCounts spanning(const ScalarField& w, double level, double margin) {
  SpanCounts s;
  const double scale = margin * w.extent();
  for (Side side : {Side::above, Side::below}) {
    const auto set = label_components(w, level, side);
    std::size_t count = 0;
    for (const auto& c : set.components)
      if (c.touches_boundary && c.diameter >= scale) ++count;
    (side == Side::above ? s.above : s.below) = count;
  }
  return s;
}

SituationDetail classify_raw(const std::vector<ScalarField>& windows, double level,
                             const SituationOptions& opts) {
  SituationDetail d;
  for (const auto& w : windows) {
    const auto s = spanning(w, level, opts.margin);
    d.spanning_above.push_back(s.above);
    d.spanning_below.push_back(s.below);
  }
  const std::size_t last = windows.size() - 1;
  const bool minus = std::all_of(windows.begin(), windows.end(), [&, k = std::size_t{0}](const auto&) mutable {
    const bool ok = d.spanning_above[k] == 1 && d.spanning_below[k] == 0;
    ++k;
    return ok;
  });
  const bool plus = std::all_of(windows.begin(), windows.end(), [&, k = std::size_t{0}](const auto&) mutable {
    const bool ok = d.spanning_below[k] == 1 && d.spanning_above[k] == 0;
    ++k;
    return ok;
  });
  if (minus) {
    d.label = Situation::A_minus;
  } else if (plus) {
    d.label = Situation::A_plus;
  } else if ((d.spanning_above[last] >= 1 && d.spanning_below[last] >= 1) ||
             (d.spanning_above[last] == 0 && d.spanning_below[last] == 0)) {
    d.label = Situation::critical;
  } else {
    d.label = Situation::undetermined;
  }
  return d;
}

}  // namespace

SituationDetail classify_situation_detail(const std::vector<ScalarField>& windows, double level,
                                          const SituationOptions& opts) {
  if (windows.size() < 2) throw DomainError("classify_situation needs at least two nested windows");
  for (const auto& w : windows)
    if (w.is_torus()) throw DomainError("classify_situation works on window fields");
  auto d = classify_raw(windows, level, opts);
  if (opts.level_tolerance > 0.0 && d.label != Situation::critical) {
    const auto lo = classify_raw(windows, level - opts.level_tolerance, opts);
    const auto hi = classify_raw(windows, level + opts.level_tolerance, opts);
    if (lo.label == Situation::A_minus && hi.label == Situation::A_plus) d.label = Situation::critical;
  }
  return d;
}

Situation classify_situation(const std::vector<ScalarField>& windows, double level,
                             const SituationOptions& opts) {
  return classify_situation_detail(windows, level, opts).label;
}

// ---------------------------------------------------------------------------
// Critical level

namespace {

// Bisection for the level where `wraps` switches; wraps(lo) != wraps(hi) on entry.
double bisect(const std::function<bool(double)>& wraps_at, double lo, double hi, bool wraps_hi,
              double tol, int max_iter, std::vector<double>& widths, int& iters) {
  widths.push_back(hi - lo);
  int it = 0;
  while (hi - lo > tol) {
    if (it >= max_iter) {
      throw NonConvergenceError("percolation bisection did not reach tolerance " + std::to_string(tol) +
                                " within " + std::to_string(max_iter) + " iterations");
    }
    const double mid = 0.5 * (lo + hi);
    if (wraps_at(mid) == wraps_hi)
      hi = mid;
    else
      lo = mid;
    widths.push_back(hi - lo);
    ++it;
  }
  iters += it;
  return 0.5 * (lo + hi);
}

}  // namespace

PercolationResult percolation_level(const ScalarField& field, const PercolationOptions& opts) {
  if (!field.is_torus()) throw DomainError("percolation_level needs a torus field");
  if (field.constant()) throw DomainError("percolation_level needs a non-constant field");
  const double range = field.max() - field.min();
  PercolationResult res;
  res.tolerance = opts.tolerance.value_or(1e-4 * range);
  res.spacing = field.spacing();
  if (!(res.tolerance > 0.0)) throw DomainError("percolation tolerance must be positive");
  const Connectivity conn = resolve_connectivity(field, opts.connectivity);
  // Below-set is empty under min and everything at max.
  const double lo = field.min() - 1e-9 * range - std::numeric_limits<double>::min();
  const double hi = field.max();

  res.c_low = bisect([&](double c) { return has_wrapping_component(field, c, Side::below, conn); }, lo,
                     hi, true, res.tolerance, opts.max_iterations, res.low_widths, res.iterations);
  res.c_high = bisect([&](double c) { return has_wrapping_component(field, c, Side::above, conn); }, lo,
                      hi, false, res.tolerance, opts.max_iterations, res.high_widths, res.iterations);
  return res;
}

OpenInterval open_interval(const ScalarField& field, const PercolationOptions& opts) {
  OpenInterval out;
  out.percolation = percolation_level(field, opts);
  const auto& p = out.percolation;
  out.c1 = std::min(p.c_low, p.c_high);
  out.c2 = p.c_high >= p.c_low ? p.c_high : out.c1;
  if (out.c2 > out.c1) {
    const double mid = 0.5 * (out.c1 + out.c2);
    LabelOptions lo;
    lo.connectivity = opts.connectivity;
    lo.compute_diameters = false;
    for (Side s : {Side::below, Side::above}) {
      const auto set = label_components(field, mid, s, lo);
      for (const auto& c : set.components) {
        if (c.wrap.rank == 0) continue;
        if (c.wrap.rank == 2) {
          out.common_direction = false;
          continue;
        }
        const LatticeVec d = c.wrap.direction;
        if (std::find(out.directions.begin(), out.directions.end(), d) == out.directions.end())
          out.directions.push_back(d);
      }
    }
    if (out.directions.size() > 1) out.common_direction = false;
  }
  return out;
}

}  // namespace qpl
