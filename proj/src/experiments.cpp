#include "qpl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qpl/parallel.hpp"

namespace qpl {

double delta_s(const MagicAngle& magic, double C1, double period) {
  if (!(C1 > 0.0)) throw DomainError("C1 must be positive");
  const double S = static_cast<double>(magic.index());
  const double m = static_cast<double>(magic.m);
  return 4.0 * kSqrt3 * C1 * kDiameterConstant * period * std::sqrt(S) / (m * m) +
         C1 * period / std::sqrt(3.0 * S);
}

double golden_alpha() { return w_to_alpha(0.5 * (std::sqrt(5.0) - 1.0)); }

std::size_t magic_resolution(const MagicAngle& magic, std::size_t per_period, std::size_t minimum) {
  const double cells = magic.L / magic.period;
  return std::max(minimum, static_cast<std::size_t>(std::ceil(cells * static_cast<double>(per_period))));
}

namespace {

void require_generic(double alpha, double period) {
  if (approximants(alpha, 1, period).exact) {
    throw DomainError("angle " + std::to_string(alpha) +
                      " is commensurate; this analysis needs a non-magic angle");
  }
}

}  // namespace

BracketSequence c0_bracket_sequence(const SymmetricPotential& layer, double alpha, int depth,
                                    const BracketOptions& opts) {
  if (depth < 1) throw DomainError("depth must be at least 1");
  require_generic(alpha, layer.period());
  const auto seq = approximants(alpha, depth, layer.period());
  if (seq.entries.empty()) throw DomainError("no approximants below the denominator cap");

  BracketSequence out;
  out.alpha = alpha;
  out.w = seq.w;
  out.steps.resize(seq.entries.size());
  for (std::size_t s = 0; s < seq.entries.size(); ++s) {
    const MagicAngle& magic = seq.entries[s].angle;
    const BilayerPotential bilayer(layer, magic.alpha, {});
    auto& st = out.steps[s];
    st.s = static_cast<int>(s) + 1;
    st.magic = magic;
    st.resolution = magic_resolution(magic, opts.samples_per_period, opts.min_resolution);
    const auto field = sample_torus(bilayer, magic, st.resolution);
    PercolationOptions po;
    po.tolerance = opts.tolerance;
    const auto p = percolation_level(field, po);
    st.c_low = p.c_low;
    st.c_high = p.c_high;
    st.c0_magic = p.midpoint();
    st.spacing = p.spacing;
    st.tolerance = p.tolerance;
    const double C1 = opts.C1.value_or(lipschitz_bound(bilayer).C1);
    out.C1 = C1;
    st.delta = delta_s(magic, C1, layer.period());
    st.Delta = 2.0 * st.delta;
    st.lo = st.c0_magic - st.delta;
    st.hi = st.c0_magic + st.delta;
    st.size_bound = kDiameterConstant * magic.L;
  }

  out.common_lo = -std::numeric_limits<double>::infinity();
  out.common_hi = std::numeric_limits<double>::infinity();
  out.widths_decrease = true;
  for (std::size_t s = 0; s < out.steps.size(); ++s) {
    const auto& st = out.steps[s];
    out.common_lo = std::max(out.common_lo, st.lo);
    out.common_hi = std::min(out.common_hi, st.hi);
    if (s > 0 && !(st.delta < out.steps[s - 1].delta)) out.widths_decrease = false;
    out.fitted_C = std::max(out.fitted_C, st.size_bound * st.Delta);
  }
  // On a line, pairwise intersection is the same as a common point.
  out.pairwise_intersect = out.common_lo <= out.common_hi;
  return out;
}

std::vector<OffCriticalCheck> off_critical_sizes(const BracketSequence& seq, const ScalarField& window,
                                                 int levels) {
  if (window.is_torus()) throw DomainError("off_critical_sizes needs a window field");
  if (levels < 1) throw DomainError("levels must be positive");
  const double c0 = seq.c0_estimate();
  const double h = window.spacing();
  std::vector<OffCriticalCheck> out;
  for (const auto& st : seq.steps) {
    OffCriticalCheck chk;
    chk.s = st.s;
    chk.bound = st.size_bound + 4.0 * h;
    for (int k = 0; k < levels; ++k) {
      const double c = window.min() + (window.max() - window.min()) * (k + 0.5) / levels;
      if (std::fabs(c - c0) <= st.Delta) continue;
      ++chk.levels_tested;
      for (Side side : {Side::below, Side::above}) {
        const auto set = label_components(window, c, side);
        for (const auto& comp : set.components)
          if (!comp.touches_boundary) chk.max_diameter = std::max(chk.max_diameter, comp.diameter);
      }
    }
    chk.passed = chk.max_diameter <= chk.bound;
    out.push_back(chk);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scaling

std::vector<double> geometric_offsets(double r0, double ratio, int count) {
  if (!(r0 > 0.0) || !(ratio > 0.0) || count < 1) throw DomainError("bad geometric schedule");
  std::vector<double> out;
  for (int j = 0; j < count; ++j) out.push_back(r0 * std::pow(ratio, j));
  return out;
}

PowerLawFit fit_power_law(const std::vector<double>& r, const std::vector<double>& d) {
  if (r.size() != d.size() || r.size() < 2) throw DomainError("power-law fit needs two or more samples");
  const std::size_t n = r.size();
  std::vector<double> x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(r[k] > 0.0) || !(d[k] > 0.0)) throw DomainError("power-law fit needs positive data");
    x[k] = std::log10(r[k]);
    y[k] = std::log10(d[k]);
  }
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("power-law fit needs distinct offsets");
  const double slope = sxy / sxx;
  const double icpt = my - slope * mx;
  PowerLawFit fit;
  fit.nu = -slope;
  fit.C = std::pow(10.0, icpt);
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double res = y[k] - (icpt + slope * x[k]);
    fit.log10_residuals.push_back(res);
    ssr += res * res;
  }
  fit.nu_stderr = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

WindowCritical window_critical_level(const ScalarField& window, double margin,
                                     std::optional<double> tolerance, int max_iterations) {
  if (window.is_torus()) throw DomainError("window_critical_level needs a window field");
  if (window.constant()) throw DomainError("window_critical_level needs a non-constant field");
  WindowCritical out;
  out.tolerance = tolerance.value_or(1e-4 * (window.max() - window.min()));
  const double scale = margin * window.extent();
  auto spans = [&](double c, Side side) {
    LabelOptions lo;
    const auto set = label_components(window, c, side, lo);
    return std::any_of(set.components.begin(), set.components.end(), [&](const ComponentStats& cs) {
      return cs.touches_boundary && cs.diameter >= scale;
    });
  };
  auto bisect = [&](Side side) {
    // below spans at max, not at min; above the reverse
    double lo = window.min(), hi = window.max();
    int it = 0;
    while (hi - lo > out.tolerance) {
      if (it++ >= max_iterations) throw NonConvergenceError("window critical level did not converge");
      const double mid = 0.5 * (lo + hi);
      if (spans(mid, side) == (side == Side::below))
        hi = mid;
      else
        lo = mid;
    }
    out.iterations += it;
    return 0.5 * (lo + hi);
  };
  out.below_spans_from = bisect(Side::below);
  out.above_spans_until = bisect(Side::above);
  out.estimate = 0.5 * (out.below_spans_from + out.above_spans_until);
  return out;
}

ScalingReport diameter_scaling(const BilayerPotential& v, const ScalingOptions& opts) {
  require_generic(v.alpha(), v.layer().period());
  if (opts.half_widths.empty()) throw DomainError("scaling needs at least one window size");
  const double hw = *std::max_element(opts.half_widths.begin(), opts.half_widths.end());
  const auto field = sample_window(v, opts.center, hw, opts.resolution);
  return diameter_scaling(field, v.alpha(), opts);
}

ScalingReport diameter_scaling(const ScalarField& window, double alpha, const ScalingOptions& opts) {
  if (window.is_torus()) throw DomainError("diameter_scaling needs a window field");
  if (opts.offsets.empty()) throw DomainError("scaling needs a level schedule");
  auto sizes = opts.half_widths;
  std::sort(sizes.begin(), sizes.end());
  std::vector<ScalarField> windows;
  for (double hw : sizes) windows.push_back(crop_window(window, hw));

  ScalingReport rep;
  rep.alpha = alpha;
  if (opts.c0) {
    rep.c0_estimate = *opts.c0;
  } else {
    rep.c0_window = window_critical_level(windows.back());
    rep.c0_estimate = rep.c0_window->estimate;
  }
  const double c0 = rep.c0_estimate;
  rep.spacing = window.spacing();
  rep.epsilon = opts.epsilon;
  for (const auto& w : windows) rep.window_sizes.push_back(w.window().half_width);
  if (windows.size() >= 2) rep.situation_at_c0 = classify_situation(windows, c0);

  std::vector<double> levels;
  for (double r : opts.offsets) {
    if (!(r > 0.0)) throw DomainError("level offsets must be positive");
    levels.push_back(c0 + r);
    if (opts.both_sides) levels.push_back(c0 - r);
  }
  rep.samples.resize(levels.size());
  parallel_for(levels.size(), [&](std::size_t k) {
    ScalingSample smp;
    smp.c = levels[k];
    smp.offset = smp.c - c0;
    // The minority side carries the bounded components.
    const Side side = smp.offset < 0.0 ? Side::below : Side::above;
    smp.clipped = true;
    for (std::size_t wi = windows.size(); wi-- > 0;) {
      const auto set = label_components(windows[wi], smp.c, side);
      double inner = 0.0, cut = 0.0;
      for (const auto& comp : set.components) {
        double& slot = comp.touches_boundary ? cut : inner;
        slot = std::max(slot, comp.diameter);
      }
      if (wi + 1 == windows.size()) {
        smp.d = inner;
        smp.window = rep.window_sizes[wi];
      }
      if (inner > 0.0 && cut < inner) {
        smp.d = inner;
        smp.window = rep.window_sizes[wi];
        smp.clipped = false;
        break;
      }
    }
    rep.samples[k] = smp;
  });
  std::stable_sort(rep.samples.begin(), rep.samples.end(), [](const auto& a, const auto& b) {
    return std::fabs(a.offset) < std::fabs(b.offset) ||
           (std::fabs(a.offset) == std::fabs(b.offset) && a.offset < b.offset);
  });

  std::vector<double> r, d;
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < rep.samples.size(); ++k) {
    const auto& s = rep.samples[k];
    if (s.clipped || !(s.d > 0.0)) continue;
    r.push_back(std::fabs(s.offset));
    d.push_back(s.d);
    used.push_back(k);
  }
  rep.fitted_samples = used.size();
  if (used.size() < 2) return rep;
  const auto fit = fit_power_law(r, d);
  rep.fitted_nu = fit.nu;
  rep.fitted_C = fit.C;
  rep.nu_stderr = fit.nu_stderr;
  double worst_up = 0.0;
  for (std::size_t k = 0; k < used.size(); ++k) {
    rep.samples[used[k]].residual = fit.log10_residuals[k];
    rep.max_log10_residual = std::max(rep.max_log10_residual, std::fabs(fit.log10_residuals[k]));
    worst_up = std::max(worst_up, fit.log10_residuals[k]);
  }
  rep.C_hat = fit.C * std::pow(10.0, worst_up);
  rep.bound_holds = true;
  for (std::size_t k = 0; k < used.size(); ++k) {
    const double env = rep.C_hat * std::pow(r[k], -(1.0 + opts.epsilon));
    // relative slack for rounding in the envelope itself
    if (d[k] > env * (1.0 + 1e-12)) rep.bound_holds = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Bounded-component suite

Lemma31Report verify_lemma31(int trials, std::uint64_t seed, const Lemma31Options& opts) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  if (opts.levels < 1) throw DomainError("levels must be positive");
  const auto angles = enumerate_magic_angles(opts.max_m);
  if (angles.empty()) throw DomainError("no magic angles with m <= " + std::to_string(opts.max_m));

  Lemma31Report rep;
  rep.seed = seed;
  rep.trials.resize(static_cast<std::size_t>(trials));
  std::mt19937_64 rng(seed);
  for (auto& t : rep.trials) {
    t.seed = rng();
    t.magic = angles[static_cast<std::size_t>(rng() % angles.size())];
  }
  parallel_for(rep.trials.size(), [&](std::size_t k) {
    auto& t = rep.trials[k];
    const auto layer = make_symmetric_potential(random_potential_spec(3, true, t.seed));
    const BilayerPotential bilayer(layer, t.magic.alpha, {});
    t.resolution = magic_resolution(t.magic, opts.samples_per_period, opts.min_resolution);
    const auto field = sample_torus(bilayer, t.magic, t.resolution);
    t.spacing = field.spacing();
    const double bound = kDiameterConstant * t.magic.L + 4.0 * t.spacing;
    for (int l = 0; l < opts.levels; ++l) {
      const double c = field.min() + (field.max() - field.min()) * (l + 0.5) / opts.levels;
      ++t.levels;
      for (Side side : {Side::below, Side::above}) {
        const auto set = label_components(field, c, side);
        for (const auto& comp : set.components) {
          if (!comp.wrap.bounded()) continue;
          ++t.components;
          t.max_diameter = std::max(t.max_diameter, comp.diameter);
          if (comp.diameter > bound) ++t.violations;
        }
      }
    }
    t.ratio = t.max_diameter / t.magic.L;
  });
  for (const auto& t : rep.trials) {
    rep.violations += t.violations;
    rep.max_ratio = std::max(rep.max_ratio, t.ratio);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Open intervals

IntervalReport interval_sweep(const SymmetricPotential& layer, const MagicAngle& magic,
                              const IntervalOptions& opts) {
  if (opts.grid < 1) throw DomainError("shift grid must be at least 1x1");
  IntervalReport rep;
  rep.magic = magic;
  const BilayerPotential base(layer, magic.alpha, {});
  rep.C1 = opts.C1.value_or(measured_lipschitz(base));
  rep.bound = rep.C1 * layer.period() / std::sqrt(3.0 * static_cast<double>(magic.index()));
  rep.resolution = magic_resolution(magic, opts.samples_per_period, opts.min_resolution);

  const auto basis = shift_lattice_basis(magic);
  const int g = opts.grid;
  rep.samples.resize(static_cast<std::size_t>(g * g));
  // Grid offsets keep every shift away from the symmetric classes.
  for (int q = 0; q < g; ++q)
    for (int p = 0; p < g; ++p) {
      const double s = (p + 0.31) / g, t = (q + 0.67) / g;
      rep.samples[static_cast<std::size_t>(q * g + p)].shift = s * basis[0] + t * basis[1];
    }
  std::vector<double> spacing(rep.samples.size()), tol(rep.samples.size());
  parallel_for(rep.samples.size(), [&](std::size_t k) {
    auto& smp = rep.samples[k];
    const auto field = sample_torus(base.with_shift(smp.shift), magic, rep.resolution);
    const auto oi = open_interval(field);
    smp.c1 = oi.c1;
    smp.c2 = oi.c2;
    smp.width = oi.width();
    smp.directions = oi.directions;
    smp.common_direction = oi.common_direction;
    spacing[k] = oi.percolation.spacing;
    tol[k] = oi.percolation.tolerance;
  });
  for (std::size_t k = 0; k < rep.samples.size(); ++k) {
    rep.max_width = std::max(rep.max_width, rep.samples[k].width);
    if (rep.samples[k].width > rep.bound) ++rep.violations;
    rep.spacing = std::max(rep.spacing, spacing[k]);
    rep.tolerance = std::max(rep.tolerance, tol[k]);
  }
  return rep;
}

}  // namespace qpl
