#include "btp/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace btp {

void QuadratureSettings::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
    throw InvalidInput("QuadratureSettings: tolerances must be positive");
  }
  if (max_subdivisions == 0) throw InvalidInput("QuadratureSettings: max_subdivisions must be positive");
  if (!(truncation_radius_multiplier >= 6.0)) {
    throw InvalidInput("QuadratureSettings: truncation multiplier must be at least 6");
  }
}

namespace detail {

const KronrodRule& kronrod15() {
  static const KronrodRule rule = [] {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    using G = boost::math::quadrature::gauss<double, 7>;
    KronrodRule r{};
    const auto& x = GK::abscissa();
    const auto& wk = GK::weights();
    const auto& wg = G::weights();
    for (std::size_t i = 0; i < 8; ++i) {
      r.nodes[i] = x[i];
      r.kronrod_weights[i] = wk[i];
    }
    const auto& xg = G::abscissa();
    for (std::size_t i = 0; i < 4; ++i) {
      // The Gauss nodes must sit at the even Kronrod indices.
      if (std::abs(xg[i] - x[2 * i]) > 1e-15) throw std::logic_error("kronrod15: node layout");
      r.gauss_weights[i] = wg[i];
    }
    return r;
  }();
  return rule;
}

}  // namespace detail
}  // namespace btp
