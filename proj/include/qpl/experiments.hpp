#ifndef QPL_EXPERIMENTS_HPP
#define QPL_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpl/geometry.hpp"
#include "qpl/levelset.hpp"
#include "qpl/potential.hpp"
#include "qpl/sampler.hpp"

namespace qpl {

/// Diameter constant of the bounded-component estimate.
inline constexpr double kDiameterConstant = 2.0 * kSqrt3;

/// Half-width of the level bracket around c0 transferred from a magic approximant:
/// 4 sqrt(3) C1 D T sqrt(S) / m^2 + C1 T / sqrt(3 S), S = m0^2 + n0^2 + m0 n0.
double delta_s(const MagicAngle& magic, double C1, double period = 1.0);

/// Golden-ratio w = (sqrt(5) - 1) / 2 mapped to an angle.
double golden_alpha();

/// Torus resolution for a magic cell: `per_period` samples per layer period along
/// each cell edge, at least `minimum`.
std::size_t magic_resolution(const MagicAngle& magic, std::size_t per_period, std::size_t minimum);

struct BracketStep {
  int s = 0;
  MagicAngle magic;
  double c_low = 0.0;
  double c_high = 0.0;
  double c0_magic = 0.0;
  double delta = 0.0;
  double Delta = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  /// D * L of the approximant.
  double size_bound = 0.0;
  std::size_t resolution = 0;
  double spacing = 0.0;
  double tolerance = 0.0;
};

struct BracketOptions {
  std::size_t samples_per_period = 48;
  std::size_t min_resolution = 256;
  std::optional<double> tolerance;
  /// C1 used in delta; unset means the certified spectral bound.
  std::optional<double> C1;
};

struct BracketSequence {
  double alpha = 0.0;
  double w = 0.0;
  double C1 = 0.0;
  std::vector<BracketStep> steps;
  /// Common intersection of all brackets (empty when lo > hi).
  double common_lo = 0.0;
  double common_hi = 0.0;
  bool pairwise_intersect = false;
  bool widths_decrease = false;
  /// max_s D L_s Delta_s: the one constant C with D L_s <= C / Delta_s for all s.
  double fitted_C = 0.0;
  /// Midpoint of the deepest magic-angle critical level.
  double c0_estimate() const { return steps.empty() ? 0.0 : steps.back().c0_magic; }
};

/// For each of the first `depth` approximants of `alpha`: measures the critical level of the
/// symmetric (a = 0) bilayer at the magic angle and builds the bracket c0 +- delta_s.
BracketSequence c0_bracket_sequence(const SymmetricPotential& layer, double alpha, int depth,
                                    const BracketOptions& opts = {});

/// Lemma-style size check away from c0: on a window of the generic bilayer, every bounded
/// component at a level outside [c0 - Delta_s, c0 + Delta_s] must stay below D L_s + slack.
struct OffCriticalCheck {
  int s = 0;
  std::size_t levels_tested = 0;
  double max_diameter = 0.0;
  double bound = 0.0;
  bool passed = true;
};

std::vector<OffCriticalCheck> off_critical_sizes(const BracketSequence& seq, const ScalarField& window,
                                                 int levels = 41);

struct ScalingSample {
  double c = 0.0;
  double offset = 0.0;  // c - c0
  /// Max diameter of interior bounded components of the minority side.
  double d = 0.0;
  /// Half-width of the window the value was taken from.
  double window = 0.0;
  bool clipped = false;
  double residual = 0.0;  // log10 residual of the fit (unclipped samples)
};

/// Window-mode critical level: bisection for the level where the below-set starts to
/// span the window and the level where the above-set stops spanning.
struct WindowCritical {
  double below_spans_from = 0.0;
  double above_spans_until = 0.0;
  double estimate = 0.0;
  double tolerance = 0.0;
  int iterations = 0;
};

WindowCritical window_critical_level(const ScalarField& window, double margin = 0.5,
                                     std::optional<double> tolerance = std::nullopt,
                                     int max_iterations = 60);

struct ScalingOptions {
  /// Critical level; unset means the window-mode estimate on the largest window.
  std::optional<double> c0;
  /// |c - c0| values; the default schedule is 2^-j, j = 0..6.
  std::vector<double> offsets{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};
  /// Sample both c0 - r and c0 + r for every offset (otherwise only c0 + r).
  bool both_sides = true;
  /// Nested half-widths, smallest first; the largest is sampled once and cropped.
  std::vector<double> half_widths{32.0, 64.0, 128.0};
  std::size_t resolution = kMaxWindowResolution;
  Vec2 center;
  double epsilon = 0.2;
};

struct ScalingReport {
  double alpha = 0.0;
  double c0_estimate = 0.0;
  /// Set when c0 came from the window-mode estimate.
  std::optional<WindowCritical> c0_window;
  /// Classification of the nested windows at c0.
  Situation situation_at_c0 = Situation::undetermined;
  double spacing = 0.0;
  std::vector<double> window_sizes;
  std::vector<ScalingSample> samples;
  std::size_t fitted_samples = 0;
  double fitted_nu = 0.0;
  double fitted_C = 0.0;
  double nu_stderr = 0.0;
  double max_log10_residual = 0.0;
  double epsilon = 0.2;
  /// fitted_C scaled up to envelope every fitted sample.
  double C_hat = 0.0;
  bool bound_holds = false;
};

/// Power-law fit log d = log C - nu log r by ordinary least squares.
struct PowerLawFit {
  double nu = 0.0;
  double C = 0.0;
  double nu_stderr = 0.0;
  std::vector<double> log10_residuals;
};
PowerLawFit fit_power_law(const std::vector<double>& r, const std::vector<double>& d);

/// Geometric schedule r0 * ratio^j, j = 0..count-1.
std::vector<double> geometric_offsets(double r0, double ratio, int count);

ScalingReport diameter_scaling(const BilayerPotential& v, const ScalingOptions& opts);
/// Same, on an already sampled window (smallest nested window first in opts.half_widths).
ScalingReport diameter_scaling(const ScalarField& window, double alpha, const ScalingOptions& opts);

struct Lemma31Trial {
  std::uint64_t seed = 0;
  MagicAngle magic;
  std::size_t resolution = 0;
  double spacing = 0.0;
  std::size_t levels = 0;
  std::size_t components = 0;
  double max_diameter = 0.0;
  double ratio = 0.0;  // max_diameter / L
  std::size_t violations = 0;
};

struct Lemma31Options {
  int max_m = 5;
  std::size_t samples_per_period = 24;
  std::size_t min_resolution = 96;
  int levels = 41;
};

struct Lemma31Report {
  std::uint64_t seed = 0;
  std::vector<Lemma31Trial> trials;
  std::size_t violations = 0;
  double max_ratio = 0.0;
  bool passed() const { return violations == 0; }
};

/// Random reflective order-3 layers at random small magic angles, a = 0: every bounded
/// component at every swept level must have diameter <= 2 sqrt(3) L + 4 h.
Lemma31Report verify_lemma31(int trials, std::uint64_t seed, const Lemma31Options& opts = {});

/// Open-interval sweep over a shift grid at one magic angle.
struct IntervalSample {
  Vec2 shift;
  double c1 = 0.0;
  double c2 = 0.0;
  double width = 0.0;
  std::vector<LatticeVec> directions;
  bool common_direction = true;
};

struct IntervalReport {
  MagicAngle magic;
  double C1 = 0.0;
  double bound = 0.0;
  std::size_t resolution = 0;
  double spacing = 0.0;
  double tolerance = 0.0;
  std::vector<IntervalSample> samples;
  std::size_t violations = 0;
  double max_width = 0.0;
};

struct IntervalOptions {
  int grid = 5;
  std::size_t samples_per_period = 48;
  std::size_t min_resolution = 256;
  /// C1 for the bound; unset means the measured value.
  std::optional<double> C1;
};

IntervalReport interval_sweep(const SymmetricPotential& layer, const MagicAngle& magic,
                              const IntervalOptions& opts = {});

}  // namespace qpl

#endif  // QPL_EXPERIMENTS_HPP
