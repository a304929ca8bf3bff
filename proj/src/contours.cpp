#include "qpl/contours.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace qpl {

namespace {

constexpr std::int64_t kNone = -1;

struct Segment {
  std::int64_t from = kNone;
  std::int64_t to = kNone;
  Vec2 a;  // index coordinates, local to the cell (not wrapped)
  Vec2 b;
};

struct Tracer {
  const ScalarField& f;
  double c;
  bool torus;
  std::int64_t nx, ny;
  double orient;  // sign of det(step_i, step_j)

  std::int64_t h_edge(std::int64_t i, std::int64_t j) const { return 2 * (j * nx + i); }
  std::int64_t v_edge(std::int64_t i, std::int64_t j) const { return 2 * (j * nx + i) + 1; }
  double val(std::int64_t i, std::int64_t j) const {
    return f(static_cast<std::size_t>(i % nx), static_cast<std::size_t>(j % ny));
  }
  static double frac(double v0, double v1, double c) { return (c - v0) / (v1 - v0); }

  std::vector<Segment> segments() const {
    std::vector<Segment> out;
    const std::int64_t ci = torus ? nx : nx - 1;
    const std::int64_t cj = torus ? ny : ny - 1;
    for (std::int64_t j = 0; j < cj; ++j) {
      for (std::int64_t i = 0; i < ci; ++i) {
        const std::int64_t ip = (i + 1) % nx, jp = (j + 1) % ny;
        const double v[4] = {val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)};
        bool up[4];
        int n_up = 0;
        for (int k = 0; k < 4; ++k) n_up += (up[k] = v[k] > c);
        if (n_up == 0 || n_up == 4) continue;
        // edges: 0 bottom (c0-c1), 1 right (c1-c2), 2 top (c3-c2), 3 left (c0-c3)
        const std::int64_t id[4] = {h_edge(i, j), v_edge(ip, j), h_edge(i, jp), v_edge(i, j)};
        Vec2 pt[4];
        bool cut[4];
        cut[0] = up[0] != up[1];
        cut[1] = up[1] != up[2];
        cut[2] = up[3] != up[2];
        cut[3] = up[0] != up[3];
        if (cut[0]) pt[0] = {i + frac(v[0], v[1], c), double(j)};
        if (cut[1]) pt[1] = {double(i + 1), j + frac(v[1], v[2], c)};
        if (cut[2]) pt[2] = {i + frac(v[3], v[2], c), double(j + 1)};
        if (cut[3]) pt[3] = {double(i), j + frac(v[0], v[3], c)};

        // Walking the cell counter-clockwise, a line with the above-set on its left starts on
        // the edge where the corner state flips above -> below and ends where it flips back.
        // Edge k runs from corner k to corner k + 1 in that walk.
        auto emit = [&](int e0, int e1) {
          const bool e0_leaves = up[e0] && !up[(e0 + 1) % 4];
          Segment s{id[e0], id[e1], pt[e0], pt[e1]};
          if (e0_leaves != (orient > 0.0)) {
            std::swap(s.from, s.to);
            std::swap(s.a, s.b);
          }
          out.push_back(s);
        };
        static constexpr int kEdgesOfCorner[4][2] = {{0, 3}, {0, 1}, {1, 2}, {2, 3}};
        const int n_cut = cut[0] + cut[1] + cut[2] + cut[3];
        if (n_cut == 2) {
          int e[2], m = 0;
          for (int k = 0; k < 4; ++k)
            if (cut[k]) e[m++] = k;
          emit(e[0], e[1]);
        } else {
          const bool centre_up = 0.25 * (v[0] + v[1] + v[2] + v[3]) > c;
          // isolate the corners whose state differs from the centre
          for (int k = 0; k < 4; ++k) {
            if (up[k] == centre_up) continue;
            emit(kEdgesOfCorner[k][0], kEdgesOfCorner[k][1]);
          }
        }
      }
    }
    return out;
  }
};

Vec2 to_plane(const ScalarField& f, const Vec2& idx) { return f.position(idx.x, idx.y); }

double turning_number(const std::vector<Vec2>& p) {
  const std::size_t n = p.size();
  if (n < 3) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 d0 = p[(k + 1) % n] - p[k];
    const Vec2 d1 = p[(k + 2) % n] - p[(k + 1) % n];
    if (norm(d0) == 0.0 || norm(d1) == 0.0) continue;
    total += std::atan2(cross(d0, d1), dot(d0, d1));
  }
  return total / (2.0 * kPi);
}

double shoelace(const std::vector<Vec2>& p) {
  double a = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) a += cross(p[k], p[(k + 1) % p.size()]);
  return 0.5 * a;
}

}  // namespace

ContourSet trace_contours(const ScalarField& field, double level) {
  ContourSet out;
  out.level = level;
  out.grid = field.kind();
  if (!(level >= field.min() && level < field.max())) return out;

  Tracer tr{field,
            level,
            field.is_torus(),
            static_cast<std::int64_t>(field.nx()),
            static_cast<std::int64_t>(field.ny()),
            cross(field.step_i(), field.step_j()) > 0.0 ? 1.0 : -1.0};
  const auto segs = tr.segments();
  const std::size_t n_edges = 2 * field.nx() * field.ny();
  std::vector<std::int64_t> outgoing(n_edges, kNone), incoming(n_edges, kNone);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    outgoing[static_cast<std::size_t>(segs[s].from)] = static_cast<std::int64_t>(s);
    incoming[static_cast<std::size_t>(segs[s].to)] = static_cast<std::int64_t>(s);
  }
  const double px = static_cast<double>(field.nx()), py = static_cast<double>(field.ny());
  std::vector<char> used(segs.size(), 0);

  auto trace_from = [&](std::size_t start) {
    std::vector<Vec2> idx{segs[start].a};
    Vec2 offset{};
    std::size_t cur = start;
    bool closed = false;
    while (true) {
      used[cur] = 1;
      const Vec2 end = segs[cur].b + offset;
      const std::int64_t nxt = outgoing[static_cast<std::size_t>(segs[cur].to)];
      if (nxt == kNone) {
        idx.push_back(end);
        break;
      }
      const auto un = static_cast<std::size_t>(nxt);
      const Vec2 d = end - segs[un].a;
      offset = {px * std::round(d.x / px), py * std::round(d.y / py)};
      if (!tr.torus) offset = {};
      if (un == start) {
        closed = true;
        Polyline pl;
        pl.closed = true;
        const Vec2 net = offset;
        pl.wrap = {static_cast<std::int64_t>(std::llround(net.x / px)),
                   static_cast<std::int64_t>(std::llround(net.y / py))};
        if (pl.wrap.i != 0 || pl.wrap.j != 0) idx.push_back(segs[start].a + offset);
        for (const auto& q : idx) pl.points.push_back(to_plane(field, q));
        if (pl.wrap.i == 0 && pl.wrap.j == 0) {
          pl.winding = static_cast<int>(std::lround(std::fabs(turning_number(pl.points))));
          pl.signed_area = shoelace(pl.points);
        }
        out.lines.push_back(std::move(pl));
        return;
      }
      if (used[un]) {  // should not happen with consistent orientation
        idx.push_back(end);
        break;
      }
      idx.push_back(end);
      cur = un;
    }
    if (!closed) {
      Polyline pl;
      for (const auto& q : idx) pl.points.push_back(to_plane(field, q));
      out.lines.push_back(std::move(pl));
    }
  };

  // Lines cut by the window boundary first, then loops.
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s] && incoming[static_cast<std::size_t>(segs[s].from)] == kNone) trace_from(s);
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) trace_from(s);
  return out;
}

// ---------------------------------------------------------------------------
// Junction graph

std::vector<int> ContourGraph::degree_sequence() const {
  std::vector<int> d;
  for (const auto& v : junctions) d.push_back(v.degree);
  for (const auto& v : endpoints) d.push_back(v.degree);
  std::sort(d.rbegin(), d.rend());
  return d;
}

namespace {

struct PointRef {
  std::size_t line;
  std::size_t k;
  Vec2 idx;  // index coordinates, reduced to the base cell on a torus
};

struct Geometry {
  const ScalarField& f;
  bool torus;
  double px, py;
  Mat2 inv;  // plane -> index

  Vec2 to_index(const Vec2& r) const {
    Vec2 q = f.is_torus() ? r : r - f.position(0.0, 0.0);
    return {inv.xx * q.x + inv.xy * q.y, inv.yx * q.x + inv.yy * q.y};
  }
  Vec2 reduce(Vec2 q) const {
    if (!torus) return q;
    q.x -= px * std::floor(q.x / px);
    q.y -= py * std::floor(q.y / py);
    return q;
  }
  Vec2 min_image(Vec2 d) const {
    if (!torus) return d;
    d.x -= px * std::round(d.x / px);
    d.y -= py * std::round(d.y / py);
    return d;
  }
  double dist(const Vec2& a, const Vec2& b) const {
    const Vec2 d = min_image(a - b);
    return norm(d.x * f.step_i() + d.y * f.step_j());
  }
};

std::size_t uf_find(std::vector<std::size_t>& p, std::size_t x) {
  while (p[x] != x) x = p[x] = p[p[x]];
  return x;
}

}  // namespace

ContourGraph contour_graph(const ScalarField& field, const ContourSet& contours, double snap) {
  if (snap <= 0.0) snap = 1.5 * field.spacing();
  ContourGraph g;
  const Vec2 si = field.step_i(), sj = field.step_j();
  const double det = cross(si, sj);
  Geometry geo{field, field.is_torus(), double(field.nx()), double(field.ny()),
               Mat2{sj.y / det, -sj.x / det, -si.y / det, si.x / det}};

  // arc length per point
  std::vector<std::vector<double>> arc(contours.lines.size());
  std::vector<double> total(contours.lines.size(), 0.0);
  std::vector<PointRef> pts;
  for (std::size_t l = 0; l < contours.lines.size(); ++l) {
    const auto& p = contours.lines[l].points;
    arc[l].resize(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (k > 0) arc[l][k] = arc[l][k - 1] + norm(p[k] - p[k - 1]);
      pts.push_back({l, k, geo.reduce(geo.to_index(p[k]))});
    }
    total[l] = arc[l].empty() ? 0.0 : arc[l].back();
    if (contours.lines[l].closed && p.size() > 1) total[l] += norm(p.front() - p.back());
    if (!contours.lines[l].closed && !p.empty()) {
      g.endpoints.push_back({p.front(), 1});
      g.endpoints.push_back({p.back(), 1});
    }
  }

  // bucket grid in index space
  const double s_min = std::min(std::fabs(det) / std::max(norm(si), norm(sj)),
                                std::min(norm(si), norm(sj)));
  const double cell = std::max(1.0, snap / s_min);
  // On a torus the bucket count must tile the period exactly.
  const auto bx = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(geo.px / cell)));
  const auto by = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(geo.py / cell)));
  const double cell_x = geo.torus ? geo.px / static_cast<double>(bx) : cell;
  const double cell_y = geo.torus ? geo.py / static_cast<double>(by) : cell;
  auto key = [&](std::int64_t a, std::int64_t b) {
    if (geo.torus) {
      a = ((a % bx) + bx) % bx;
      b = ((b % by) + by) % by;
    }
    return a * 1'000'003LL + b;
  };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets;
  for (std::size_t t = 0; t < pts.size(); ++t)
    buckets[key(static_cast<std::int64_t>(std::floor(pts[t].idx.x / cell_x)),
                static_cast<std::int64_t>(std::floor(pts[t].idx.y / cell_y)))]
        .push_back(t);

  const double exclude = 3.0 * snap;
  auto arc_gap = [&](std::size_t l, std::size_t a, std::size_t b) {
    double d = std::fabs(arc[l][a] - arc[l][b]);
    if (contours.lines[l].closed) d = std::min(d, total[l] - d);
    return d;
  };

  struct Contact {
    std::size_t p, q;
  };
  std::vector<Contact> contacts;
  for (std::size_t t = 0; t < pts.size(); ++t) {
    const auto cx = static_cast<std::int64_t>(std::floor(pts[t].idx.x / cell_x));
    const auto cy = static_cast<std::int64_t>(std::floor(pts[t].idx.y / cell_y));
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const auto it = buckets.find(key(cx + dx, cy + dy));
        if (it == buckets.end()) continue;
        for (std::size_t u : it->second) {
          if (u <= t) continue;
          const auto& A = pts[t];
          const auto& B = pts[u];
          if (A.line == B.line && arc_gap(A.line, A.k, B.k) < exclude) continue;
          if (geo.dist(A.idx, B.idx) < snap) contacts.push_back({t, u});
        }
      }
  }
  if (contacts.empty()) return g;

  // cluster contacts that share a neighbourhood
  std::vector<std::size_t> parent(contacts.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t a = 0; a < contacts.size(); ++a)
    for (std::size_t b = a + 1; b < contacts.size(); ++b) {
      if (geo.dist(pts[contacts[a].p].idx, pts[contacts[b].p].idx) < exclude) {
        const auto ra = uf_find(parent, a), rb = uf_find(parent, b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
      }
    }
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t a = 0; a < contacts.size(); ++a) clusters[uf_find(parent, a)].push_back(a);

  for (const auto& [root, members] : clusters) {
    // strands: per line, arc positions split at gaps wider than `exclude`
    std::map<std::size_t, std::vector<double>> by_line;
    const Vec2 ref = pts[contacts[members.front()].p].idx;
    Vec2 sum{};
    for (std::size_t a : members) {
      for (std::size_t t : {contacts[a].p, contacts[a].q}) {
        by_line[pts[t].line].push_back(arc[pts[t].line][pts[t].k]);
        sum += ref + geo.min_image(pts[t].idx - ref);
      }
    }
    int strands = 0;
    for (auto& [line, s] : by_line) {
      std::sort(s.begin(), s.end());
      int runs = 1;
      for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k] - s[k - 1] > exclude) ++runs;
      if (runs > 1 && contours.lines[line].closed && total[line] - s.back() + s.front() <= exclude) --runs;
      strands += runs;
    }
    const Vec2 mean_idx = sum / static_cast<double>(2 * members.size());
    g.junctions.push_back({field.position(mean_idx.x, mean_idx.y), 2 * strands});
  }
  return g;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

}  // namespace

std::string contours_svg(const ScalarField& field, const std::vector<ContourSet>& sets,
                         const SvgOptions& opts) {
  std::vector<Vec2> frame;
  if (field.is_torus()) {
    const Vec2 b1 = field.torus().b1, b2 = field.torus().b2;
    frame = {{0.0, 0.0}, b1, b1 + b2, b2};
  } else {
    const double hw = field.window().half_width;
    const Vec2 c = field.window().center;
    frame = {c + Vec2{-hw, -hw}, c + Vec2{hw, -hw}, c + Vec2{hw, hw}, c + Vec2{-hw, hw}};
  }
  Vec2 lo = frame[0], hi = frame[0];
  for (const auto& p : frame) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double span = std::max(hi.x - lo.x, hi.y - lo.y);
  const double scale = static_cast<double>(opts.pixels) / span;
  auto X = [&](const Vec2& p) { return fmt((p.x - lo.x) * scale); };
  auto Y = [&](const Vec2& p) { return fmt((hi.y - p.y) * scale); };
  const double w = (hi.x - lo.x) * scale, h = (hi.y - lo.y) * scale;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\"" << fmt(h)
     << "\" viewBox=\"0 0 " << fmt(w) << ' ' << fmt(h) << "\">\n";
  os << "<defs><clipPath id=\"frame\"><polygon points=\"";
  for (const auto& p : frame) os << X(p) << ',' << Y(p) << ' ';
  os << "\"/></clipPath></defs>\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
  for (const auto& p : frame) os << X(p) << ',' << Y(p) << ' ';
  os << "\"/>\n";
  os << "<g clip-path=\"url(#frame)\" fill=\"none\" stroke-width=\"" << fmt(opts.stroke) << "\">\n";
  for (const auto& set : sets) {
    os << "<g class=\"level\" data-level=\"" << fmt(set.level) << "\">\n";
    for (const auto& line : set.lines) {
      const char* colour = "#808080";
      if (line.closed && (line.wrap.i != 0 || line.wrap.j != 0))
        colour = "#d62728";
      else if (line.closed)
        colour = line.signed_area > 0.0 ? "#ff7f0e" : "#1f77b4";
      os << "<path stroke=\"" << colour << "\" d=\"";
      for (std::size_t k = 0; k < line.points.size(); ++k)
        os << (k == 0 ? 'M' : 'L') << X(line.points[k]) << ',' << Y(line.points[k]) << ' ';
      if (line.closed && line.wrap.i == 0 && line.wrap.j == 0) os << 'Z';
      os << "\"/>\n";
      // Lifted wrapping lines also get drawn one period back so the cell is covered.
      if (field.is_torus() && (line.wrap.i != 0 || line.wrap.j != 0)) {
        const Vec2 shift = static_cast<double>(line.wrap.i) * field.torus().b1 +
                           static_cast<double>(line.wrap.j) * field.torus().b2;
        os << "<path stroke=\"" << colour << "\" d=\"";
        for (std::size_t k = 0; k < line.points.size(); ++k)
          os << (k == 0 ? 'M' : 'L') << X(line.points[k] - shift) << ',' << Y(line.points[k] - shift)
             << ' ';
        os << "\"/>\n";
      }
    }
    os << "</g>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

}  // namespace qpl
