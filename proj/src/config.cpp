#include "qpl/config.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

namespace qpl {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where.empty() ? "<root>" : where, "expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown key");
  }
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

std::int64_t get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) fail(field, "expected true or false");
  return j.get<bool>();
}

Vec2 get_vec(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) fail(field, "expected [x, y]");
  return {get_number(j[0], field + "[0]"), get_number(j[1], field + "[1]")};
}

std::vector<double> get_numbers(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k)
    out.push_back(get_number(j[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

json vec_json(const Vec2& v) { return json::array({v.x, v.y}); }

LayerSpec parse_layer(const json& j) {
  const std::string w = "layer";
  only_keys(j, w,
            {"kind", "order", "reflection", "reflection_axis", "period", "normalize", "orbits", "seed",
             "random_orbits"});
  LayerSpec out;
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) fail("layer.kind", "expected a string");
    out.kind = j["kind"].get<std::string>();
  }
  if (out.kind != "three_cosine" && out.kind != "orbits" && out.kind != "random") {
    fail("layer.kind", "must be three_cosine, orbits or random");
  }
  auto& s = out.spec;
  if (j.contains("order")) s.order = static_cast<int>(get_int(j["order"], "layer.order"));
  if (j.contains("reflection")) s.reflection = get_bool(j["reflection"], "layer.reflection");
  if (j.contains("reflection_axis"))
    s.reflection_axis = get_number(j["reflection_axis"], "layer.reflection_axis");
  if (j.contains("period")) s.period = get_number(j["period"], "layer.period");
  if (j.contains("normalize")) s.normalize = get_bool(j["normalize"], "layer.normalize");
  if (j.contains("orbits")) {
    if (!j["orbits"].is_array() || j["orbits"].empty()) fail("layer.orbits", "expected a non-empty array");
    s.orbits.clear();
    for (std::size_t k = 0; k < j["orbits"].size(); ++k) {
      const std::string f = "layer.orbits[" + std::to_string(k) + "]";
      const auto& o = j["orbits"][k];
      only_keys(o, f, {"h", "l", "amplitude", "phase"});
      OrbitSpec os;
      if (o.contains("h")) os.h = static_cast<int>(get_int(o["h"], f + ".h"));
      if (o.contains("l")) os.l = static_cast<int>(get_int(o["l"], f + ".l"));
      if (o.contains("amplitude")) os.amplitude = get_number(o["amplitude"], f + ".amplitude");
      if (o.contains("phase")) os.phase = get_number(o["phase"], f + ".phase");
      s.orbits.push_back(os);
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("layer.seed", "expected a non-negative integer");
    out.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("random_orbits"))
    out.random_orbits = static_cast<int>(get_int(j["random_orbits"], "layer.random_orbits"));
  return out;
}

AngleSpec parse_angle_json(const json& j) {
  only_keys(j, "angle", {"radians", "m", "n", "sign", "w"});
  AngleSpec a;
  const bool has_r = j.contains("radians"), has_m = j.contains("m") || j.contains("n"),
             has_w = j.contains("w");
  if (has_r + has_m + has_w != 1) fail("angle", "give exactly one of radians, (m, n) or w");
  if (has_r) {
    a.kind = AngleSpec::Kind::radians;
    a.radians = get_number(j["radians"], "angle.radians");
  } else if (has_m) {
    a.kind = AngleSpec::Kind::magic;
    if (!j.contains("m") || !j.contains("n")) fail("angle", "m and n go together");
    a.m = static_cast<int>(get_int(j["m"], "angle.m"));
    a.n = static_cast<int>(get_int(j["n"], "angle.n"));
    if (j.contains("sign")) a.sign = static_cast<int>(get_int(j["sign"], "angle.sign"));
  } else {
    a.kind = AngleSpec::Kind::w;
    if (j["w"].is_string()) {
      if (j["w"].get<std::string>() != "golden") fail("angle.w", "expected a number or \"golden\"");
      a.w = 0.5 * (std::sqrt(5.0) - 1.0);
    } else {
      a.w = get_number(j["w"], "angle.w");
    }
  }
  return a;
}

json angle_json(const AngleSpec& a) {
  switch (a.kind) {
    case AngleSpec::Kind::radians: return {{"radians", a.radians}};
    case AngleSpec::Kind::magic: return {{"m", a.m}, {"n", a.n}, {"sign", a.sign}};
    case AngleSpec::Kind::w: return {{"w", a.w}};
  }
  return {};
}

}  // namespace

RunConfig parse_config(const json& j) {
  only_keys(j, "",
            {"layer", "angle", "shift", "superposition", "torus_resolution", "window", "levels", "schedule",
             "c0", "epsilon", "tolerance", "depth", "trials", "shift_grid", "max_m", "seed", "output_dir"});
  RunConfig c;
  if (j.contains("layer")) c.layer = parse_layer(j["layer"]);
  if (j.contains("angle")) c.angle = parse_angle_json(j["angle"]);
  if (j.contains("shift")) c.shift = get_vec(j["shift"], "shift");
  if (j.contains("superposition")) {
    const auto& s = j["superposition"];
    only_keys(s, "superposition", {"kind", "lambda"});
    if (s.contains("kind")) {
      if (!s["kind"].is_string()) fail("superposition.kind", "expected a string");
      const auto k = s["kind"].get<std::string>();
      if (k == "linear") c.superposition = Superposition::linear;
      else if (k == "nonlinear") c.superposition = Superposition::nonlinear;
      else fail("superposition.kind", "must be linear or nonlinear");
    }
    if (s.contains("lambda")) c.lambda = get_number(s["lambda"], "superposition.lambda");
  }
  if (j.contains("torus_resolution"))
    c.torus_resolution = static_cast<std::size_t>(get_int(j["torus_resolution"], "torus_resolution"));
  if (j.contains("window")) {
    const auto& w = j["window"];
    only_keys(w, "window", {"half_widths", "resolution", "center"});
    if (w.contains("half_widths")) c.half_widths = get_numbers(w["half_widths"], "window.half_widths");
    if (w.contains("resolution"))
      c.window_resolution = static_cast<std::size_t>(get_int(w["resolution"], "window.resolution"));
    if (w.contains("center")) c.center = get_vec(w["center"], "window.center");
  }
  if (j.contains("levels")) c.levels = get_numbers(j["levels"], "levels");
  if (j.contains("schedule")) {
    const auto& s = j["schedule"];
    only_keys(s, "schedule", {"r0", "ratio", "count", "both_sides"});
    if (s.contains("r0")) c.schedule_r0 = get_number(s["r0"], "schedule.r0");
    if (s.contains("ratio")) c.schedule_ratio = get_number(s["ratio"], "schedule.ratio");
    if (s.contains("count")) c.schedule_count = static_cast<int>(get_int(s["count"], "schedule.count"));
    if (s.contains("both_sides")) c.both_sides = get_bool(s["both_sides"], "schedule.both_sides");
  }
  if (j.contains("c0") && !j["c0"].is_null()) c.c0 = get_number(j["c0"], "c0");
  if (j.contains("epsilon")) c.epsilon = get_number(j["epsilon"], "epsilon");
  if (j.contains("tolerance") && !j["tolerance"].is_null()) c.tolerance = get_number(j["tolerance"], "tolerance");
  if (j.contains("depth")) c.depth = static_cast<int>(get_int(j["depth"], "depth"));
  if (j.contains("trials")) c.trials = static_cast<int>(get_int(j["trials"], "trials"));
  if (j.contains("shift_grid")) c.shift_grid = static_cast<int>(get_int(j["shift_grid"], "shift_grid"));
  if (j.contains("max_m")) c.max_m = static_cast<int>(get_int(j["max_m"], "max_m"));
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail("output_dir", "expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config file " + file);
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + file + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

void validate(const RunConfig& c) {
  const auto& s = c.layer.spec;
  if (s.order != 3 && s.order != 4 && s.order != 6) fail("layer.order", "must be 3, 4 or 6");
  if (!(s.period > 0.0)) fail("layer.period", "must be positive");
  if (c.layer.random_orbits < 1) fail("layer.random_orbits", "must be at least 1");
  if (c.layer.kind == "orbits") {
    bool any = false;
    for (const auto& o : s.orbits) any |= (o.h != 0 || o.l != 0) && o.amplitude != 0.0;
    if (!any) fail("layer.orbits", "needs at least one nonzero harmonic");
  }
  switch (c.angle.kind) {
    case AngleSpec::Kind::radians:
      if (!(c.angle.radians > 0.0 && c.angle.radians < kPi / 3.0)) fail("angle.radians", "must lie in (0, pi/3)");
      break;
    case AngleSpec::Kind::magic:
      if (!(c.angle.m > c.angle.n && c.angle.n > 0)) fail("angle", "needs m > n > 0");
      if (std::gcd(c.angle.m, c.angle.n) != 1) fail("angle", "m and n must be coprime");
      if (c.angle.sign != 1 && c.angle.sign != -1) fail("angle.sign", "must be 1 or -1");
      if (s.order == 4) fail("angle", "magic angles are only available for the triangular lattice");
      break;
    case AngleSpec::Kind::w:
      if (!(c.angle.w > 0.0 && c.angle.w < 1.0)) fail("angle.w", "must lie in (0, 1)");
      break;
  }
  if (c.superposition == Superposition::linear && c.lambda != 0.0)
    fail("superposition.lambda", "only used with the nonlinear kind");
  if (c.torus_resolution < 8 || c.torus_resolution > 16384) fail("torus_resolution", "must be in [8, 16384]");
  if (c.window_resolution < 8 || c.window_resolution > 16384)
    fail("window.resolution", "must be in [8, 16384]");
  if (c.half_widths.empty()) fail("window.half_widths", "needs at least one size");
  for (std::size_t k = 0; k < c.half_widths.size(); ++k) {
    if (!(c.half_widths[k] > 0.0)) fail("window.half_widths[" + std::to_string(k) + "]", "must be positive");
    if (k > 0 && !(c.half_widths[k] > c.half_widths[k - 1]))
      fail("window.half_widths", "must be strictly increasing");
  }
  if (!(c.schedule_r0 > 0.0)) fail("schedule.r0", "must be positive");
  if (!(c.schedule_ratio > 0.0 && c.schedule_ratio < 1.0)) fail("schedule.ratio", "must lie in (0, 1)");
  if (c.schedule_count < 1) fail("schedule.count", "must be at least 1");
  if (!(c.epsilon >= 0.0)) fail("epsilon", "must be non-negative");
  if (c.tolerance && !(*c.tolerance > 0.0)) fail("tolerance", "must be positive");
  if (c.depth < 1 || c.depth > 40) fail("depth", "must be in [1, 40]");
  if (c.trials < 1) fail("trials", "must be at least 1");
  if (c.shift_grid < 1) fail("shift_grid", "must be at least 1");
  if (c.max_m < 2) fail("max_m", "must be at least 2");
  if (c.output_dir.empty()) fail("output_dir", "must not be empty");
}

json config_to_json(const RunConfig& c) {
  json layer = {{"kind", c.layer.kind},
                {"order", c.layer.spec.order},
                {"reflection", c.layer.spec.reflection},
                {"period", c.layer.spec.period},
                {"normalize", c.layer.spec.normalize},
                {"seed", c.layer.seed},
                {"random_orbits", c.layer.random_orbits}};
  if (!std::isnan(c.layer.spec.reflection_axis)) layer["reflection_axis"] = c.layer.spec.reflection_axis;
  json orbits = json::array();
  for (const auto& o : c.layer.spec.orbits)
    orbits.push_back({{"h", o.h}, {"l", o.l}, {"amplitude", o.amplitude}, {"phase", o.phase}});
  layer["orbits"] = orbits;
  json j = {{"layer", layer},
            {"angle", angle_json(c.angle)},
            {"shift", vec_json(c.shift)},
            {"superposition",
             {{"kind", c.superposition == Superposition::linear ? "linear" : "nonlinear"}, {"lambda", c.lambda}}},
            {"torus_resolution", c.torus_resolution},
            {"window",
             {{"half_widths", c.half_widths}, {"resolution", c.window_resolution}, {"center", vec_json(c.center)}}},
            {"levels", c.levels},
            {"schedule",
             {{"r0", c.schedule_r0},
              {"ratio", c.schedule_ratio},
              {"count", c.schedule_count},
              {"both_sides", c.both_sides}}},
            {"c0", c.c0 ? json(*c.c0) : json(nullptr)},
            {"epsilon", c.epsilon},
            {"tolerance", c.tolerance ? json(*c.tolerance) : json(nullptr)},
            {"depth", c.depth},
            {"trials", c.trials},
            {"shift_grid", c.shift_grid},
            {"max_m", c.max_m},
            {"seed", c.seed},
            {"output_dir", c.output_dir}};
  return j;
}

double resolve_alpha(const AngleSpec& a, double period) {
  switch (a.kind) {
    case AngleSpec::Kind::radians: return a.radians;
    case AngleSpec::Kind::magic: return magic_angle(a.m, a.n, a.sign, period).alpha;
    case AngleSpec::Kind::w: return w_to_alpha(a.w);
  }
  return 0.0;
}

std::optional<MagicAngle> resolve_magic(const AngleSpec& a, double period) {
  if (a.kind == AngleSpec::Kind::magic) return magic_angle(a.m, a.n, a.sign, period);
  const double alpha = resolve_alpha(a, period);
  const auto seq = approximants(alpha, 1, period);
  if (seq.exact) return seq.entries.front().angle;
  return std::nullopt;
}

SymmetricPotential build_layer(const LayerSpec& spec) {
  if (spec.kind == "three_cosine") return three_cosine_potential(spec.spec.period);
  if (spec.kind == "random") {
    return make_symmetric_potential(random_potential_spec(spec.spec.order, spec.spec.reflection, spec.seed,
                                                          spec.random_orbits, spec.spec.period));
  }
  return make_symmetric_potential(spec.spec);
}

BilayerPotential build_bilayer(const RunConfig& c) {
  const auto layer = build_layer(c.layer);
  return BilayerPotential(layer, resolve_alpha(c.angle, layer.period()), c.shift, c.superposition, c.lambda);
}

}  // namespace qpl
