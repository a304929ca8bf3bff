#include "qpl/report_io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace qpl {

using nlohmann::json;

json to_json(const Vec2& v) { return json::array({v.x, v.y}); }
json to_json(const LatticeVec& v) { return json::array({v.i, v.j}); }

json to_json(const MagicAngle& a) {
  return {{"m", a.m},
          {"n", a.n},
          {"sign", a.sign},
          {"k", a.k},
          {"m0", a.m0},
          {"n0", a.n0},
          {"alpha", a.alpha},
          {"alpha_deg", a.alpha * 180.0 / kPi},
          {"b1", to_json(a.b1)},
          {"b2", to_json(a.b2)},
          {"b1_lattice", to_json(a.b1_lattice)},
          {"b2_lattice", to_json(a.b2_lattice)},
          {"L", a.L},
          {"period", a.period}};
}

json to_json(const ApproximantSequence& s) {
  json entries = json::array();
  for (const auto& e : s.entries) {
    json j = to_json(e.angle);
    j["error"] = e.error;
    j["error_bound"] = e.error_bound;
    entries.push_back(j);
  }
  return {{"alpha_target", s.alpha_target}, {"w", s.w}, {"exact", s.exact}, {"entries", entries}};
}

json to_json(const SymmetricPotential& v) {
  json h = json::array();
  for (const auto& t : v.harmonics())
    h.push_back({{"q", to_json(t.q)}, {"amplitude", t.amplitude}, {"phase", t.phase}});
  return {{"order", v.order()},
          {"reflection", v.reflection()},
          {"reflection_axis", v.reflection_axis()},
          {"lattice", v.lattice() == LatticeKind::triangular ? "triangular" : "square"},
          {"period", v.period()},
          {"harmonics", h}};
}

json to_json(const SymmetryReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back(
        {{"name", c.name}, {"max_residual", c.max_residual}, {"passed", c.passed}, {"required", c.required}});
  return {{"all_passed", r.all_passed()}, {"checks", checks}};
}

json to_json(const PercolationResult& p) {
  return {{"c_low", p.c_low},
          {"c_high", p.c_high},
          {"midpoint", p.midpoint()},
          {"tolerance", p.tolerance},
          {"spacing", p.spacing},
          {"iterations", p.iterations},
          {"low_widths", p.low_widths},
          {"high_widths", p.high_widths}};
}

json to_json(const OpenInterval& oi) {
  json dirs = json::array();
  for (const auto& d : oi.directions) dirs.push_back(to_json(d));
  return {{"c1", oi.c1},
          {"c2", oi.c2},
          {"width", oi.width()},
          {"directions", dirs},
          {"common_direction", oi.common_direction},
          {"percolation", to_json(oi.percolation)}};
}

json to_json(const ComponentSet& set, std::size_t max_components) {
  std::vector<const ComponentStats*> order;
  for (const auto& c : set.components) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(),
                   [](const ComponentStats* a, const ComponentStats* b) { return a->cell_count > b->cell_count; });
  json comps = json::array();
  for (std::size_t k = 0; k < order.size() && k < max_components; ++k) {
    const auto& c = *order[k];
    json j = {{"id", c.id},
              {"cell_count", c.cell_count},
              {"bounding_box", {to_json(c.bounding_box.lo), to_json(c.bounding_box.hi)}},
              {"wrap_rank", c.wrap.rank},
              {"wrap_direction", to_json(c.wrap.direction)},
              {"wrap_lattice", {to_json(c.wrap.lattice.basis()[0]), to_json(c.wrap.lattice.basis()[1])}},
              {"touches_boundary", c.touches_boundary}};
    if (c.wrap.bounded())
      j["diameter"] = c.diameter;
    else
      j["diameter"] = nullptr;
    comps.push_back(j);
  }
  return {{"side", to_string(set.side)},
          {"level", set.level},
          {"connectivity", to_string(set.connectivity)},
          {"grid", set.grid == GridKind::torus ? "torus" : "window"},
          {"nx", set.nx},
          {"ny", set.ny},
          {"spacing", set.spacing},
          {"component_count", set.components.size()},
          {"wrapping_count", set.wrapping_count()},
          {"max_bounded_diameter", set.max_bounded_diameter()},
          {"components_listed", comps.size()},
          {"components", comps}};
}

json to_json(const ContourSet& cs, const ContourGraph& graph) {
  std::size_t closed = 0, wrapping = 0, cut = 0;
  for (const auto& l : cs.lines) {
    if (!l.closed)
      ++cut;
    else if (l.wrap.i != 0 || l.wrap.j != 0)
      ++wrapping;
    else
      ++closed;
  }
  json junctions = json::array();
  for (const auto& v : graph.junctions) junctions.push_back({{"position", to_json(v.position)}, {"degree", v.degree}});
  return {{"level", cs.level},
          {"lines", cs.lines.size()},
          {"closed", closed},
          {"wrapping", wrapping},
          {"boundary_cut", cut},
          {"junctions", junctions},
          {"degree_sequence", graph.degree_sequence()}};
}

json to_json(const BracketSequence& s) {
  json steps = json::array();
  for (const auto& st : s.steps) {
    steps.push_back({{"s", st.s},
                     {"magic", to_json(st.magic)},
                     {"c_low", st.c_low},
                     {"c_high", st.c_high},
                     {"c0_magic", st.c0_magic},
                     {"delta", st.delta},
                     {"Delta", st.Delta},
                     {"bracket", {st.lo, st.hi}},
                     {"size_bound", st.size_bound},
                     {"resolution", st.resolution},
                     {"spacing", st.spacing},
                     {"tolerance", st.tolerance}});
  }
  return {{"alpha", s.alpha},
          {"w", s.w},
          {"C1", s.C1},
          {"steps", steps},
          {"common_intersection", {s.common_lo, s.common_hi}},
          {"pairwise_intersect", s.pairwise_intersect},
          {"widths_decrease", s.widths_decrease},
          {"fitted_C", s.fitted_C},
          {"c0_estimate", s.c0_estimate()}};
}

json to_json(const ScalingReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"c", s.c},
                       {"offset", s.offset},
                       {"d", s.d},
                       {"window", s.window},
                       {"clipped", s.clipped},
                       {"log10_residual", s.residual}});
  json j = {{"alpha", r.alpha},
            {"c0_estimate", r.c0_estimate},
            {"situation_at_c0", to_string(r.situation_at_c0)},
            {"spacing", r.spacing},
            {"window_sizes", r.window_sizes},
            {"samples", samples},
            {"fitted_samples", r.fitted_samples},
            {"fitted_nu", r.fitted_nu},
            {"nu_stderr", r.nu_stderr},
            {"fitted_C", r.fitted_C},
            {"max_log10_residual", r.max_log10_residual},
            {"epsilon", r.epsilon},
            {"C_hat", r.C_hat},
            {"bound_holds", r.bound_holds},
            {"percolation_nu", 4.0 / 3.0}};
  if (r.c0_window) {
    j["c0_window"] = {{"below_spans_from", r.c0_window->below_spans_from},
                      {"above_spans_until", r.c0_window->above_spans_until},
                      {"estimate", r.c0_window->estimate},
                      {"tolerance", r.c0_window->tolerance},
                      {"iterations", r.c0_window->iterations}};
  }
  return j;
}

json to_json(const Lemma31Report& r) {
  json trials = json::array();
  for (const auto& t : r.trials)
    trials.push_back({{"seed", t.seed},
                      {"m", t.magic.m},
                      {"n", t.magic.n},
                      {"L", t.magic.L},
                      {"resolution", t.resolution},
                      {"spacing", t.spacing},
                      {"levels", t.levels},
                      {"components", t.components},
                      {"max_diameter", t.max_diameter},
                      {"ratio", t.ratio},
                      {"violations", t.violations}});
  return {{"seed", r.seed},
          {"trials", trials},
          {"violations", r.violations},
          {"max_ratio", r.max_ratio},
          {"bound_ratio", kDiameterConstant},
          {"passed", r.passed()}};
}

json to_json(const IntervalReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) {
    json dirs = json::array();
    for (const auto& d : s.directions) dirs.push_back(to_json(d));
    samples.push_back({{"shift", to_json(s.shift)},
                       {"c1", s.c1},
                       {"c2", s.c2},
                       {"width", s.width},
                       {"directions", dirs},
                       {"common_direction", s.common_direction}});
  }
  return {{"magic", to_json(r.magic)},
          {"C1", r.C1},
          {"bound", r.bound},
          {"resolution", r.resolution},
          {"spacing", r.spacing},
          {"tolerance", r.tolerance},
          {"samples", samples},
          {"violations", r.violations},
          {"max_width", r.max_width}};
}

void write_scaling_csv(std::ostream& os, const ScalingReport& r) {
  os << "c,c_minus_c0,d,window,clipped\n" << std::setprecision(17);
  for (const auto& s : r.samples)
    os << s.c << ',' << s.offset << ',' << s.d << ',' << s.window << ',' << (s.clipped ? 1 : 0) << '\n';
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw std::runtime_error("failed writing " + path);
}

void write_json_file(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace qpl
