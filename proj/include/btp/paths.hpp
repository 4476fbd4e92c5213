#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "btp/random.hpp"

namespace btp {

using Point = std::vector<double>;

/// Strictly increasing, finite sample times starting at 0.
class TimeGrid {
public:
  /// Throws InvalidInput unless `times` is non-empty, starts at 0, is strictly
  /// increasing and finite.
  explicit TimeGrid(std::vector<double> times);

  /// n equal steps on [0, horizon].
  static TimeGrid uniform(double horizon, std::size_t steps);

  /// 0 together with the distinct values of `times` (all must be >= 0), sorted.
  static TimeGrid covering(std::span<const double> times);

  std::size_t size() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const noexcept { return times_[i]; }
  double back() const noexcept { return times_.back(); }
  const std::vector<double>& times() const noexcept { return times_; }

  /// Index of the last node <= t (t must lie in [0, back()]).
  std::size_t locate(double t) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
  std::vector<double> times_;
};

/// A d-dimensional sample path on a TimeGrid; values are stored row-major.
class Path {
public:
  Path(TimeGrid grid, std::size_t dim, std::vector<double> values);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return grid_.size(); }

  std::span<const double> at(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }
  /// Component 0 of node i; the natural accessor for scalar paths.
  double scalar(std::size_t i) const noexcept { return values_[i * dim_]; }
  const std::vector<double>& values() const noexcept { return values_; }

private:
  TimeGrid grid_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Generator of the outer process: either (1/2) Laplacian, or the isotropic
/// divergence-form operator  A f = div(g grad f)  with c <= g <= 1/c.
struct GeneratorSpec {
  enum class Variant { HalfLaplacian, DivergenceForm };

  Variant variant = Variant::HalfLaplacian;
  std::function<double(std::span<const double>)> g;
  std::function<Point(std::span<const double>)> grad_g;
  double ellipticity = 1.0;

  static GeneratorSpec half_laplacian();
  static GeneratorSpec divergence_form(std::function<double(std::span<const double>)> g,
                                       std::function<Point(std::span<const double>)> grad_g,
                                       double ellipticity);

  /// Coefficient at x (1/2 for the half-Laplacian).
  double coefficient(std::span<const double> x) const;
  Point coefficient_gradient(std::span<const double> x) const;
};

/// Probes g at `probes` uniformly random points of [-radius, radius]^dim and
/// returns false if any value leaves [c, 1/c] or is non-finite.
bool check_ellipticity(const GeneratorSpec& gen, std::size_t dim, std::size_t probes,
                       double radius, Seed seed);

/// Brownian motion from the origin (or from `start`) observed on `grid`.
Path sample_bm(const TimeGrid& grid, std::size_t dim, Seed seed);
Path sample_bm(const TimeGrid& grid, std::span<const double> start, Seed seed);

/// Inserts values at `insert_times` drawn from the Brownian bridge between the
/// neighbouring nodes. Existing nodes are kept unchanged.
Path refine_bridge(const Path& path, std::span<const double> insert_times, Seed seed);

/// Euler-Maruyama path of dX = grad g dt + sqrt(2 g) dW (the diffusion whose
/// generator is div(g grad)), one step per grid interval.
Path sample_diffusion(const GeneratorSpec& gen, std::span<const double> x0, const TimeGrid& grid,
                      Seed seed);

/// Linear interpolation of the path at time t in [0, last grid time].
Point evaluate(const Path& path, double t);

/// Scalar version of evaluate for one-dimensional paths.
double evaluate_scalar(const Path& path, double t);

}  // namespace btp
