#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "pigp/kernel.hpp"

namespace oracle {

/// k(tau) recovered from the spectral density by quadrature over the whole
/// real line: (1/pi) int_0^inf S(w) cos(w tau) dw.
inline double wiener_khinchin(const pigp::KernelSpec& spec, double tau) {
  auto S = [&](double w) { return pigp::spectral_density(spec, w); };
  if (tau == 0.0) {
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(S, 0.0, std::numeric_limits<double>::infinity()) / std::numbers::pi;
  }
  boost::math::quadrature::ooura_fourier_cos<double> integrator;
  return integrator.integrate(S, std::abs(tau)).first / std::numbers::pi;
}

}  // namespace oracle
