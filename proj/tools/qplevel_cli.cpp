// qplevel: batch front-end over the qplevel library.
//
// Exit codes: 0 success, 1 invariant violation, 2 config or usage error,
// 3 numerical non-convergence.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpl/config.hpp"
#include "qpl/contours.hpp"
#include "qpl/experiments.hpp"
#include "qpl/field_io.hpp"
#include "qpl/levelset.hpp"
#include "qpl/parallel.hpp"
#include "qpl/report_io.hpp"
#include "qpl/sampler.hpp"

namespace {

using nlohmann::json;
using namespace qpl;

enum Exit { kOk = 0, kInvariant = 1, kConfig = 2, kNonConvergence = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
};

RunConfig load(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
  if (const char* env = std::getenv("QPLEVEL_OUT_DIR"); env && *env) c.output_dir = env;
  if (!g.out_dir.empty()) c.output_dir = g.out_dir;
  return c;
}

std::string prepare_output(const RunConfig& c, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) throw ConfigError("config field 'output_dir': cannot create " + c.output_dir + ": " + ec.message());
  return (std::filesystem::path(c.output_dir) / name).string();
}

// Config as recorded in reports; the output location is not part of the experiment.
json recorded_config(const RunConfig& c) {
  json j = config_to_json(c);
  j.erase("output_dir");
  return j;
}

void announce(const std::string& path) { std::cout << "wrote " << path << "\n"; }

// ---------------------------------------------------------------- angles

struct AnglesArgs {
  std::optional<int> max_m;
  std::optional<double> approx;
  int count = 4;
};

json angle_row(const MagicAngle& a) {
  return {{"m", a.m},        {"n", a.n},   {"sign", a.sign},   {"alpha_deg", a.alpha * 180.0 / kPi},
          {"m0", a.m0},      {"n0", a.n0}, {"index", a.index()}, {"L", a.L},
          {"error_bound", 4.0 * kSqrt3 / (static_cast<double>(a.m) * a.m)}};
}

int cmd_angles(const Globals& g, const AnglesArgs& args) {
  RunConfig c = load(g);
  json rows = json::array();
  json out;
  if (args.approx) {
    if (!(*args.approx > 0.0 && *args.approx < kPi / 3.0)) throw UsageError("--approx must lie in (0, pi/3)");
    if (args.count < 1) throw UsageError("--count must be at least 1");
    const auto seq = approximants(*args.approx, args.count);
    for (const auto& e : seq.entries) {
      json r = angle_row(e.angle);
      r["error"] = e.error;
      rows.push_back(r);
    }
    out = {{"mode", "approx"}, {"alpha", *args.approx}, {"w", seq.w}, {"exact", seq.exact}};
  } else {
    const int max_m = args.max_m.value_or(c.max_m);
    if (max_m < 1) throw UsageError("--max-m must be at least 1");
    for (const auto& a : enumerate_magic_angles(max_m)) rows.push_back(angle_row(a));
    out = {{"mode", "enumerate"}, {"max_m", max_m}};
  }
  out["rows"] = rows;

  std::printf("%4s %4s %12s %4s %4s %6s %12s %12s\n", "m", "n", "alpha_deg", "m0", "n0", "index", "L", "bound");
  for (const auto& r : rows) {
    std::printf("%4d %4d %12.6f %4d %4d %6lld %12.6f %12.3e\n", r["m"].get<int>(), r["n"].get<int>(),
                r["alpha_deg"].get<double>(), r["m0"].get<int>(), r["n0"].get<int>(),
                static_cast<long long>(r["index"].get<std::int64_t>()), r["L"].get<double>(),
                r["error_bound"].get<double>());
  }
  bool ok = true;
  for (const auto& r : rows)
    if (r.contains("error")) ok &= r["error"].get<double>() < r["error_bound"].get<double>();
  out["bound_holds"] = ok;
  const auto path = prepare_output(c, "angles.json");
  write_json_file(path, out);
  announce(path);
  return ok ? kOk : kInvariant;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  bool save_field = false;
  int pixels = 800;
};

json field_json(const ScalarField& f) {
  json j = {{"grid", f.is_torus() ? "torus" : "window"},
            {"nx", f.nx()},
            {"ny", f.ny()},
            {"spacing", f.spacing()},
            {"extent", f.extent()},
            {"min", f.min()},
            {"max", f.max()}};
  if (f.is_torus()) {
    j["b1"] = to_json(f.torus().b1);
    j["b2"] = to_json(f.torus().b2);
  } else {
    j["center"] = to_json(f.window().center);
    j["half_width"] = f.window().half_width;
  }
  return j;
}

int cmd_render(const Globals& g, const RenderArgs& args) {
  RunConfig c = load(g);
  const auto bilayer = build_bilayer(c);
  const auto magic = resolve_magic(c.angle, bilayer.layer().period());

  ScalarField field;
  json out = {{"config", recorded_config(c)}, {"alpha", bilayer.alpha()}};
  if (magic) {
    field = sample_torus(bilayer, *magic, c.torus_resolution);
    out["magic"] = to_json(*magic);
  } else {
    field = sample_window(bilayer, c.center, c.half_widths.front(), c.torus_resolution);
  }
  out["field"] = field_json(field);

  std::vector<double> levels = c.levels;
  if (levels.empty()) {
    // Default: the measured critical level of this field.
    if (magic) {
      PercolationOptions po;
      po.tolerance = c.tolerance;
      const auto p = percolation_level(field, po);
      out["percolation"] = to_json(p);
      levels.push_back(p.midpoint());
    } else {
      const auto w = window_critical_level(field, 0.5, c.tolerance);
      out["window_critical"] = {{"below_spans_from", w.below_spans_from},
                                {"above_spans_until", w.above_spans_until},
                                {"estimate", w.estimate},
                                {"tolerance", w.tolerance}};
      levels.push_back(w.estimate);
    }
  }

  std::vector<ContourSet> sets;
  json per_level = json::array();
  for (double level : levels) {
    auto cs = trace_contours(field, level);
    const auto graph = contour_graph(field, cs);
    json lj = to_json(cs, graph);
    lj["below"] = to_json(label_components(field, level, Side::below), 50);
    lj["above"] = to_json(label_components(field, level, Side::above), 50);
    per_level.push_back(lj);
    sets.push_back(std::move(cs));
  }
  out["levels"] = per_level;

  SvgOptions so;
  so.pixels = args.pixels;
  const auto svg_path = prepare_output(c, "render.svg");
  write_text_file(svg_path, contours_svg(field, sets, so));
  announce(svg_path);
  const auto json_path = prepare_output(c, "render.json");
  write_json_file(json_path, out);
  announce(json_path);
  if (args.save_field) {
    const auto bin_path = prepare_output(c, "render_field.bin");
    save_field_binary(bin_path, field);
    announce(bin_path);
  }
  return kOk;
}

// ---------------------------------------------------------------- c0

struct C0Args {
  std::string alpha_w;
  std::optional<int> depth;
  bool check_sizes = false;
};

int cmd_c0(const Globals& g, const C0Args& args) {
  RunConfig c = load(g);
  if (!args.alpha_w.empty()) {
    c.angle.kind = AngleSpec::Kind::w;
    if (args.alpha_w == "golden") {
      c.angle.w = (std::sqrt(5.0) - 1.0) / 2.0;
    } else {
      try {
        std::size_t used = 0;
        c.angle.w = std::stod(args.alpha_w, &used);
        if (used != args.alpha_w.size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw UsageError("--alpha-w expects 'golden' or a number in (0, 1)");
      }
    }
  }
  if (args.depth) c.depth = *args.depth;
  validate(c);

  const auto layer = build_layer(c.layer);
  const double alpha = resolve_alpha(c.angle, layer.period());
  BracketOptions bo;
  bo.tolerance = c.tolerance;
  const auto seq = c0_bracket_sequence(layer, alpha, c.depth, bo);
  json out = {{"config", recorded_config(c)}, {"brackets", to_json(seq)}};

  bool ok = seq.pairwise_intersect && seq.widths_decrease;
  if (args.check_sizes) {
    const BilayerPotential v(layer, alpha, c.shift, c.superposition, c.lambda);
    const auto window = sample_window(v, c.center, c.half_widths.back(), c.window_resolution);
    json checks = json::array();
    for (const auto& chk : off_critical_sizes(seq, window)) {
      checks.push_back({{"s", chk.s},
                        {"levels_tested", chk.levels_tested},
                        {"max_diameter", chk.max_diameter},
                        {"bound", chk.bound},
                        {"passed", chk.passed}});
      ok &= chk.passed;
    }
    out["off_critical"] = checks;
    out["off_critical_spacing"] = window.spacing();
  }
  out["passed"] = ok;
  const auto path = prepare_output(c, "c0.json");
  write_json_file(path, out);
  announce(path);
  std::printf("c0 estimate %.6f, common bracket [%.6f, %.6f], %s\n", seq.c0_estimate(), seq.common_lo,
              seq.common_hi, ok ? "consistent" : "INCONSISTENT");
  return ok ? kOk : kInvariant;
}

// ---------------------------------------------------------------- scaling

int cmd_scaling(const Globals& g) {
  RunConfig c = load(g);
  validate(c);
  const auto bilayer = build_bilayer(c);
  if (resolve_magic(c.angle, bilayer.layer().period()))
    throw UsageError("scaling needs a non-magic twist angle; the configured angle is commensurate");

  ScalingOptions so;
  so.c0 = c.c0;
  so.offsets = geometric_offsets(c.schedule_r0, c.schedule_ratio, c.schedule_count);
  so.both_sides = c.both_sides;
  so.half_widths = c.half_widths;
  so.resolution = c.window_resolution;
  so.center = c.center;
  so.epsilon = c.epsilon;
  const auto report = diameter_scaling(bilayer, so);

  json out = {{"config", recorded_config(c)}, {"scaling", to_json(report)}};
  const auto json_path = prepare_output(c, "scaling.json");
  write_json_file(json_path, out);
  announce(json_path);
  std::ostringstream csv;
  write_scaling_csv(csv, report);
  const auto csv_path = prepare_output(c, "scaling.csv");
  write_text_file(csv_path, csv.str());
  announce(csv_path);
  std::printf("c0 %.6f  nu %.3f +- %.3f  C %.3f  C_hat %.3f  max residual %.3f  bound %s\n", report.c0_estimate,
              report.fitted_nu, report.nu_stderr, report.fitted_C, report.C_hat, report.max_log10_residual,
              report.bound_holds ? "holds" : "FAILS");
  return report.bound_holds ? kOk : kInvariant;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
};

int cmd_verify(const Globals& g, const VerifyArgs& args) {
  RunConfig c = load(g);
  if (args.trials) c.trials = *args.trials;
  if (args.seed) c.seed = *args.seed;
  validate(c);
  Lemma31Options lo;
  lo.max_m = c.max_m;
  const auto report = verify_lemma31(c.trials, c.seed, lo);
  json out = {{"trials", c.trials}, {"seed", c.seed}, {"max_m", c.max_m}, {"report", to_json(report)}};
  const auto path = prepare_output(c, "verify.json");
  write_json_file(path, out);
  announce(path);
  std::printf("%zu trials, %zu violations, max diameter/L %.4f (limit %.4f)\n", report.trials.size(),
              report.violations, report.max_ratio, kDiameterConstant);
  return report.passed() ? kOk : kInvariant;
}

// ---------------------------------------------------------------- interval

int cmd_interval(const Globals& g) {
  RunConfig c = load(g);
  validate(c);
  const auto layer = build_layer(c.layer);
  const auto magic = resolve_magic(c.angle, layer.period());
  if (!magic) throw ConfigError("config field 'angle': interval needs a magic angle (m, n)");
  IntervalOptions io;
  io.grid = c.shift_grid;
  const auto report = interval_sweep(layer, *magic, io);
  json out = {{"config", recorded_config(c)}, {"interval", to_json(report)}};
  const auto path = prepare_output(c, "interval.json");
  write_json_file(path, out);
  announce(path);
  std::printf("(%d,%d): %zu shifts, max width %.4f, bound %.4f, %zu violations\n", magic->m, magic->n,
              report.samples.size(), report.max_width, report.bound, report.violations);
  return report.violations == 0 ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Level-line topology of twisted bilayer quasiperiodic potentials"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides config and QPLEVEL_OUT_DIR)")
      ->envname("QPLEVEL_OUT_DIR");
  app.add_option("--threads", g.threads, "Worker threads")->envname("QPLEVEL_THREADS");

  AnglesArgs angles;
  auto* a = app.add_subcommand("angles", "Enumerate magic angles or approximants of an angle");
  auto* max_m = a->add_option("--max-m", angles.max_m, "Largest m");
  auto* approx = a->add_option("--approx", angles.approx, "Angle in radians to approximate");
  a->add_option("--count", angles.count, "Number of approximants")->needs(approx);
  max_m->excludes(approx);

  RenderArgs render;
  auto* r = app.add_subcommand("render", "Trace level lines and write SVG plus component statistics");
  r->add_flag("--save-field", render.save_field, "Also write the sampled field as a flat binary file");
  r->add_option("--pixels", render.pixels, "SVG width in pixels")->check(CLI::Range(16, 16384));

  C0Args c0;
  auto* c = app.add_subcommand("c0", "Bracket the critical level by magic-angle approximants");
  c->add_option("--alpha-w", c0.alpha_w, "w parameter of the angle, or 'golden'");
  c->add_option("--depth", c0.depth, "Number of approximants");
  c->add_flag("--check-sizes", c0.check_sizes, "Check component sizes away from the brackets on a window");

  auto* s = app.add_subcommand("scaling", "Fit the diameter scaling law near the critical level");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Randomized diameter bound trials at magic angles");
  v->add_option("--trials", verify.trials, "Number of trials");
  v->add_option("--seed", verify.seed, "Random seed");

  auto* iv = app.add_subcommand("interval", "Open-interval width over a grid of shifts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (g.threads > 0) set_thread_count(g.threads);
    if (a->parsed()) return cmd_angles(g, angles);
    if (r->parsed()) return cmd_render(g, render);
    if (c->parsed()) return cmd_c0(g, c0);
    if (s->parsed()) return cmd_scaling(g);
    if (v->parsed()) return cmd_verify(g, verify);
    if (iv->parsed()) return cmd_interval(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kConfig;
  } catch (const NonConvergenceError& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
  return kOk;
}
