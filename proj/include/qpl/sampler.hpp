#ifndef QPL_SAMPLER_HPP
#define QPL_SAMPLER_HPP

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qpl/geometry.hpp"
#include "qpl/potential.hpp"

namespace qpl {

enum class GridKind { torus, window };

/// Periodic cell spanned by (b1, b2) with its corner at the origin.
struct TorusGeometry {
  Vec2 b1;
  Vec2 b2;
};

/// Square window; sample (i, j) sits at center + spacing * (i - K, j - K).
struct WindowGeometry {
  Vec2 center;
  double half_width = 0.0;
  double spacing = 0.0;
};

/// Sampled potential values, row-major (row j, column i).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(TorusGeometry g, std::size_t nx, std::size_t ny, std::vector<double> values);
  ScalarField(WindowGeometry g, std::size_t nx, std::size_t ny, std::vector<double> values);

  GridKind kind() const { return kind_; }
  bool is_torus() const { return kind_ == GridKind::torus; }
  const TorusGeometry& torus() const { return torus_; }
  const WindowGeometry& window() const { return window_; }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return values_.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values_[j * nx_ + i]; }
  double at(std::size_t idx) const { return values_[idx]; }
  const std::vector<double>& values() const { return values_; }

  double min() const { return min_; }
  double max() const { return max_; }
  bool constant() const { return !(min_ < max_); }

  /// Physical position of (possibly fractional or lifted) grid indices.
  Vec2 position(double i, double j) const;
  /// Physical step for a unit index move along i and along j.
  Vec2 step_i() const;
  Vec2 step_j() const;
  /// Largest distance between 4-adjacent samples.
  double spacing() const;
  /// Extent of the sampled region (cell edge or window width).
  double extent() const;

  std::shared_ptr<const BilayerPotential> source;
  std::string description;

 private:
  void update_range();

  GridKind kind_ = GridKind::window;
  TorusGeometry torus_;
  WindowGeometry window_;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<double> values_;
  double min_ = 0.0;
  double max_ = 0.0;
};

struct SampleOptions {
  /// Target level precision tau; when set, refuse grids with h > tau / (2 C1).
  std::optional<double> level_tolerance;
};

inline constexpr std::size_t kDefaultTorusResolution = 512;
inline constexpr std::size_t kMaxWindowResolution = 4096;

/// Samples the bilayer on {(i/N) b1 + (j/N) b2}; the angle must be the bilayer's own.
ScalarField sample_torus(const BilayerPotential& v, const MagicAngle& angle, std::size_t resolution,
                         const SampleOptions& opts = {});

/// Single layer on its own unit cell (e1, e2).
ScalarField sample_torus(const SymmetricPotential& v, std::size_t resolution);

/// Samples on an explicit periodic cell; the caller guarantees (b1, b2) are periods.
ScalarField sample_cell(const BilayerPotential& v, const Vec2& b1, const Vec2& b2,
                        std::size_t resolution, const SampleOptions& opts = {});

/// Cartesian window with 2K+1 samples per axis, K = resolution / 2.
ScalarField sample_window(const BilayerPotential& v, const Vec2& center, double half_width,
                          std::size_t resolution, const SampleOptions& opts = {});

/// Window of the same spacing, centred on the same point, clipped to `half_width`.
ScalarField crop_window(const ScalarField& f, double half_width);

/// Smallest torus resolution with h <= tau / (2 C1) for a cell edge of `extent`.
std::size_t resolution_for_tolerance(double C1, double extent, double tau);

/// Grid analogue of V -> -V.
ScalarField negated(const ScalarField& f);

}  // namespace qpl

#endif  // QPL_SAMPLER_HPP
