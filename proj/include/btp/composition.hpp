#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "btp/paths.hpp"
#include "btp/random.hpp"

namespace btp {

/// One maximal run of grid indices [start, end] on which the inner path keeps
/// a constant non-zero sign.
struct Excursion {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  int sign = 1;
  std::size_t label = 0;  // which outer copy drives this excursion
};

/// Ordered, disjoint excursions of an inner path. Indices whose inner value is
/// exactly zero belong to no excursion.
struct ExcursionDecomposition {
  std::vector<Excursion> intervals;
  TimeGrid source_grid;

  /// Excursion containing index i, or nullptr for a zero node.
  const Excursion* find(std::size_t i) const;
};

struct ComposedPath {
  Path path;
  double inner_max = 0.0;
  ExcursionDecomposition decomposition;
};

/// Pointwise |x| of a scalar path.
Path reflect(const Path& path);

/// Excursion intervals of the unreflected inner path, labels all 0. A sign
/// change between adjacent nodes ends one excursion and starts the next.
ExcursionDecomposition excursions(const Path& inner_unreflected);

/// X(|B(t)|) evaluated on the inner grid.
ComposedPath compose_btp(const Path& inner, const Path& outer);

/// Each excursion reads from one of the k outer copies, chosen uniformly and
/// independently per excursion from derive(seed, excursion ordinal).
ComposedPath compose_kebtp(const Path& inner, std::span<const Path> outers, Seed seed);

/// Generator of fresh outer copies; called with a distinct seed per excursion.
using OuterFactory = std::function<Path(Seed)>;

/// Each excursion reads from its own freshly drawn copy (label = ordinal).
ComposedPath compose_ebtp(const Path& inner, const OuterFactory& factory, Seed seed);

}  // namespace btp
