#pragma once

#include <span>

namespace pigp {

/// Parameters of the autocovariance of a linear single-degree-of-freedom
/// oscillator driven by Gaussian white noise. Mass is fixed at one; the
/// forcing magnitude absorbs it.
struct SdofKernelParams {
  double zeta = 0.05;     // damping ratio, 0 < zeta < 1
  double omega_n = 1.0;   // natural frequency [rad/s]
  double sigma2 = 1.0;    // forcing spectral magnitude

  static constexpr double mass = 1.0;

  double damped_frequency() const;
  double variance() const;  // k(0)
  void validate() const;
};

/// Two-coefficient wave loading law: drag * U|U| + inertia * dU/dt.
struct MorisonParams {
  double drag = 0.0;     // C_d'
  double inertia = 0.0;  // C_m'

  void validate() const;
};

/// Oscillator autocovariance at lag `tau` seconds.
double sdof_kernel_eval(const SdofKernelParams& params, double tau);

/// Envelope bound |k(tau)| <= k(0) exp(-zeta omega_n |tau|) (1 + zeta omega_n / omega_d).
double sdof_kernel_envelope(const SdofKernelParams& params, double tau);

double morison_force(const MorisonParams& params, double velocity, double acceleration);

/// theta0 + theta . x
double linear_mean(double theta0, std::span<const double> theta, std::span<const double> x);

}  // namespace pigp
