#include "btp/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "btp/errors.hpp"

namespace btp {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw InvalidInput("TimeGrid: empty grid");
  if (times_.front() != 0.0) throw InvalidInput("TimeGrid: first time must be 0");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw InvalidInput("TimeGrid: non-finite time");
    if (i > 0 && !(times_[i] > times_[i - 1])) {
      throw InvalidInput("TimeGrid: times must be strictly increasing");
    }
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || steps == 0) {
    if (steps == 0 || horizon == 0.0) return TimeGrid({0.0});
    throw InvalidInput("TimeGrid::uniform: horizon must be positive");
  }
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    t[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
  }
  return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::covering(std::span<const double> times) {
  std::vector<double> t;
  t.reserve(times.size() + 1);
  t.push_back(0.0);
  for (double x : times) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw InvalidInput("TimeGrid::covering: bad time");
    t.push_back(x);
  }
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return TimeGrid(std::move(t));
}

std::size_t TimeGrid::locate(double t) const {
  if (!(t >= 0.0) || t > times_.back()) {
    throw OutOfRange("TimeGrid::locate: time " + std::to_string(t) + " outside [0, " +
                     std::to_string(times_.back()) + "]");
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

Path::Path(TimeGrid grid, std::size_t dim, std::vector<double> values)
    : grid_(std::move(grid)), dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw InvalidInput("Path: dimension must be positive");
  if (values_.size() != grid_.size() * dim_) {
    throw InvalidInput("Path: values do not match grid length times dimension");
  }
}

GeneratorSpec GeneratorSpec::half_laplacian() { return {}; }

GeneratorSpec GeneratorSpec::divergence_form(std::function<double(std::span<const double>)> g,
                                             std::function<Point(std::span<const double>)> grad_g,
                                             double ellipticity) {
  if (!(ellipticity > 0.0 && ellipticity <= 1.0)) {
    throw InvalidInput("GeneratorSpec: ellipticity constant must lie in (0, 1]");
  }
  if (!g || !grad_g) throw InvalidInput("GeneratorSpec: coefficient and gradient required");
  GeneratorSpec gen;
  gen.variant = Variant::DivergenceForm;
  gen.g = std::move(g);
  gen.grad_g = std::move(grad_g);
  gen.ellipticity = ellipticity;
  return gen;
}

double GeneratorSpec::coefficient(std::span<const double> x) const {
  return variant == Variant::HalfLaplacian ? 0.5 : g(x);
}

Point GeneratorSpec::coefficient_gradient(std::span<const double> x) const {
  return variant == Variant::HalfLaplacian ? Point(x.size(), 0.0) : grad_g(x);
}

bool check_ellipticity(const GeneratorSpec& gen, std::size_t dim, std::size_t probes,
                       double radius, Seed seed) {
  Rng rng(seed);
  Point x(dim);
  for (std::size_t k = 0; k < probes; ++k) {
    for (auto& xi : x) xi = radius * (2.0 * rng.uniform() - 1.0);
    const double g = gen.coefficient(x);
    if (!std::isfinite(g) || g < gen.ellipticity || g > 1.0 / gen.ellipticity) return false;
  }
  return true;
}

Path sample_bm(const TimeGrid& grid, std::size_t dim, Seed seed) {
  return sample_bm(grid, Point(dim, 0.0), seed);
}

Path sample_bm(const TimeGrid& grid, std::span<const double> start, Seed seed) {
  const std::size_t dim = start.size();
  if (dim == 0) throw InvalidInput("sample_bm: dimension must be positive");
  Rng rng(seed);
  std::vector<double> v(grid.size() * dim);
  std::copy(start.begin(), start.end(), v.begin());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double sd = std::sqrt(grid[i] - grid[i - 1]);
    for (std::size_t k = 0; k < dim; ++k) {
      v[i * dim + k] = v[(i - 1) * dim + k] + sd * rng.gaussian();
    }
  }
  return Path(grid, dim, std::move(v));
}

Path refine_bridge(const Path& path, std::span<const double> insert_times, Seed seed) {
  if (insert_times.empty()) return path;
  std::vector<double> inserts(insert_times.begin(), insert_times.end());
  std::sort(inserts.begin(), inserts.end());
  const auto& times = path.grid().times();
  for (std::size_t k = 0; k < inserts.size(); ++k) {
    const double t = inserts[k];
    if (!(t > 0.0) || !(t < times.back())) {
      throw InvalidInput("refine_bridge: insert time outside the path's range");
    }
    if (std::binary_search(times.begin(), times.end(), t) ||
        (k > 0 && inserts[k - 1] == t)) {
      throw InvalidInput("refine_bridge: insert time coincides with an existing node");
    }
  }

  const std::size_t dim = path.dim();
  std::vector<double> new_times;
  std::vector<double> new_values;
  new_times.reserve(times.size() + inserts.size());
  new_values.reserve((times.size() + inserts.size()) * dim);
  Rng rng(seed);
  std::size_t next = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      // Fill interval (times[i-1], times[i]) left to right; each draw conditions
      // on the previously inserted value and the right endpoint.
      while (next < inserts.size() && inserts[next] < times[i]) {
        const double s = new_times.back();
        const double t = inserts[next];
        const double u = times[i];
        const double w = (t - s) / (u - s);
        const double sd = std::sqrt((t - s) * (u - t) / (u - s));
        const std::size_t left = new_values.size() - dim;
        for (std::size_t c = 0; c < dim; ++c) {
          const double a = new_values[left + c];
          const double b = path.at(i)[c];
          new_values.push_back(a + w * (b - a) + sd * rng.gaussian());
        }
        new_times.push_back(t);
        ++next;
      }
    }
    new_times.push_back(times[i]);
    const auto x = path.at(i);
    new_values.insert(new_values.end(), x.begin(), x.end());
  }
  return Path(TimeGrid(std::move(new_times)), dim, std::move(new_values));
}

Path sample_diffusion(const GeneratorSpec& gen, std::span<const double> x0, const TimeGrid& grid,
                      Seed seed) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw InvalidInput("sample_diffusion: dimension must be positive");
  if (gen.variant == GeneratorSpec::Variant::HalfLaplacian) return sample_bm(grid, x0, seed);

  Rng rng(seed);
  std::vector<double> v(grid.size() * dim);
  std::copy(x0.begin(), x0.end(), v.begin());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double dt = grid[i] - grid[i - 1];
    std::span<const double> x{v.data() + (i - 1) * dim, dim};
    const double g = gen.coefficient(x);
    const Point drift = gen.coefficient_gradient(x);
    if (!std::isfinite(g) || g < 0.0) {
      throw NumericalDomainError("sample_diffusion: coefficient not finite and non-negative");
    }
    if (drift.size() != dim) throw InvalidInput("sample_diffusion: gradient has wrong dimension");
    const double vol = std::sqrt(2.0 * g * dt);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!std::isfinite(drift[k])) {
        throw NumericalDomainError("sample_diffusion: non-finite coefficient gradient");
      }
      v[i * dim + k] = x[k] + drift[k] * dt + vol * rng.gaussian();
    }
  }
  return Path(grid, dim, std::move(v));
}

Point evaluate(const Path& path, double t) {
  const auto& grid = path.grid();
  const std::size_t i = grid.locate(t);
  const auto left = path.at(i);
  if (t == grid[i] || i + 1 == grid.size()) return Point(left.begin(), left.end());
  const auto right = path.at(i + 1);
  const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
  Point out(path.dim());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = left[k] + w * (right[k] - left[k]);
  return out;
}

double evaluate_scalar(const Path& path, double t) {
  const auto& grid = path.grid();
  const std::size_t i = grid.locate(t);
  const double left = path.scalar(i);
  if (t == grid[i] || i + 1 == grid.size()) return left;
  const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
  return left + w * (path.scalar(i + 1) - left);
}

}  // namespace btp
