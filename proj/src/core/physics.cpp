#include "pigp/physics.hpp"

#include <cmath>
#include <string>

#include "pigp/error.hpp"

namespace pigp {

double SdofKernelParams::damped_frequency() const { return omega_n * std::sqrt(1.0 - zeta * zeta); }

double SdofKernelParams::variance() const {
  return sigma2 / (4.0 * mass * mass * zeta * omega_n * omega_n * omega_n);
}

void SdofKernelParams::validate() const {
  require(std::isfinite(zeta) && zeta > 0.0 && zeta < 1.0, ErrorKind::InvalidArgument,
          "sdof kernel: damping ratio must lie in (0, 1), got " + std::to_string(zeta));
  require(std::isfinite(omega_n) && omega_n > 0.0, ErrorKind::InvalidArgument,
          "sdof kernel: natural frequency must be positive");
  require(std::isfinite(sigma2) && sigma2 > 0.0, ErrorKind::InvalidArgument,
          "sdof kernel: forcing magnitude must be positive");
}

void MorisonParams::validate() const {
  require(std::isfinite(drag) && std::isfinite(inertia), ErrorKind::InvalidArgument,
          "morison: coefficients must be finite");
}

double sdof_kernel_eval(const SdofKernelParams& params, double tau) {
  params.validate();
  const double a = std::abs(tau);
  const double decay = params.zeta * params.omega_n;
  const double wd = params.damped_frequency();
  // cos is even, so cos(wd * tau) == cos(wd * |tau|)
  return params.variance() * std::exp(-decay * a) * (std::cos(wd * a) + decay / wd * std::sin(wd * a));
}

double sdof_kernel_envelope(const SdofKernelParams& params, double tau) {
  params.validate();
  const double decay = params.zeta * params.omega_n;
  return params.variance() * std::exp(-decay * std::abs(tau)) * (1.0 + decay / params.damped_frequency());
}

double morison_force(const MorisonParams& params, double velocity, double acceleration) {
  return params.drag * velocity * std::abs(velocity) + params.inertia * acceleration;
}

double linear_mean(double theta0, std::span<const double> theta, std::span<const double> x) {
  require(theta.size() == x.size(), ErrorKind::InvalidArgument,
          "linear mean: slope has " + std::to_string(theta.size()) + " entries but input has " +
              std::to_string(x.size()));
  double acc = theta0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += theta[i] * x[i];
  return acc;
}

}  // namespace pigp
