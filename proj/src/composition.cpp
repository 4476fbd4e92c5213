#include "btp/composition.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "btp/errors.hpp"

namespace btp {
namespace {

void require_scalar(const Path& p, const char* who) {
  if (p.dim() != 1) throw InvalidInput(std::string(who) + ": inner path must be one-dimensional");
}

double max_abs(const Path& p) {
  double m = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) m = std::max(m, std::abs(p.scalar(i)));
  return m;
}

void require_coverage(const Path& outer, double horizon, const char* who) {
  if (outer.grid().back() < horizon) {
    throw CoverageError(std::string(who) + ": outer path ends at " +
                        std::to_string(outer.grid().back()) + " but the clock reaches " +
                        std::to_string(horizon));
  }
}

bool same_point(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

// Fills composed values: excursion nodes from the outer chosen by `outer_for`,
// zero nodes with the common start point.
template <class OuterFor>
ComposedPath assemble(const Path& inner, ExcursionDecomposition dec, std::size_t dim,
                      std::span<const double> start, OuterFor&& outer_for) {
  std::vector<double> values(inner.size() * dim);
  for (std::size_t i = 0; i < inner.size(); ++i) {
    std::copy(start.begin(), start.end(), values.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  for (const auto& e : dec.intervals) {
    const Path& outer = outer_for(e);
    for (std::size_t i = e.start; i <= e.end; ++i) {
      const Point x = evaluate(outer, std::abs(inner.scalar(i)));
      std::copy(x.begin(), x.end(), values.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
  }
  const double m = max_abs(inner);
  return {Path(inner.grid(), dim, std::move(values)), m, std::move(dec)};
}

}  // namespace

const Excursion* ExcursionDecomposition::find(std::size_t i) const {
  auto it = std::upper_bound(intervals.begin(), intervals.end(), i,
                             [](std::size_t idx, const Excursion& e) { return idx < e.start; });
  if (it == intervals.begin()) return nullptr;
  --it;
  return i <= it->end ? &*it : nullptr;
}

Path reflect(const Path& path) {
  require_scalar(path, "reflect");
  std::vector<double> v(path.values());
  for (auto& x : v) x = std::abs(x);
  return Path(path.grid(), 1, std::move(v));
}

ExcursionDecomposition excursions(const Path& inner_unreflected) {
  require_scalar(inner_unreflected, "excursions");
  ExcursionDecomposition dec{{}, inner_unreflected.grid()};
  std::optional<Excursion> open;
  for (std::size_t i = 0; i < inner_unreflected.size(); ++i) {
    const double v = inner_unreflected.scalar(i);
    const int sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (open && open->sign != sign) {
      dec.intervals.push_back(*open);
      open.reset();
    }
    if (sign == 0) continue;
    if (!open) open = Excursion{i, i, sign, 0};
    open->end = i;
  }
  if (open) dec.intervals.push_back(*open);
  return dec;
}

ComposedPath compose_btp(const Path& inner, const Path& outer) {
  require_scalar(inner, "compose_btp");
  require_coverage(outer, max_abs(inner), "compose_btp");
  const auto start = outer.at(0);
  return assemble(inner, excursions(inner), outer.dim(), start,
                  [&](const Excursion&) -> const Path& { return outer; });
}

ComposedPath compose_kebtp(const Path& inner, std::span<const Path> outers, Seed seed) {
  require_scalar(inner, "compose_kebtp");
  if (outers.empty()) throw InvalidInput("compose_kebtp: no outer copies");
  const double horizon = max_abs(inner);
  const auto start = outers[0].at(0);
  for (const auto& o : outers) {
    require_coverage(o, horizon, "compose_kebtp");
    if (o.dim() != outers[0].dim() || !same_point(o.at(0), start)) {
      throw InvalidInput("compose_kebtp: outer copies must share dimension and start point");
    }
  }
  auto dec = excursions(inner);
  const std::uint64_t k = outers.size();
  for (std::size_t j = 0; j < dec.intervals.size(); ++j) {
    dec.intervals[j].label = k == 1 ? 0 : Rng(derive(seed, j)).below(k);
  }
  return assemble(inner, std::move(dec), outers[0].dim(), start,
                  [&](const Excursion& e) -> const Path& { return outers[e.label]; });
}

ComposedPath compose_ebtp(const Path& inner, const OuterFactory& factory, Seed seed) {
  require_scalar(inner, "compose_ebtp");
  const double horizon = max_abs(inner);
  auto dec = excursions(inner);
  std::vector<Path> copies;
  copies.reserve(std::max<std::size_t>(dec.intervals.size(), 1));
  for (std::size_t j = 0; j < dec.intervals.size(); ++j) {
    copies.push_back(factory(derive(seed, j)));
    dec.intervals[j].label = j;
  }
  // The start point is needed even without excursions.
  if (copies.empty()) copies.push_back(factory(derive(seed, 0)));
  const auto start = copies[0].at(0);
  for (const auto& c : copies) {
    require_coverage(c, dec.intervals.empty() ? 0.0 : horizon, "compose_ebtp");
    if (c.dim() != copies[0].dim() || !same_point(c.at(0), start)) {
      throw InvalidInput("compose_ebtp: factory copies must share dimension and start point");
    }
  }
  return assemble(inner, std::move(dec), copies[0].dim(), start,
                  [&](const Excursion& e) -> const Path& { return copies[e.label]; });
}

}  // namespace btp
