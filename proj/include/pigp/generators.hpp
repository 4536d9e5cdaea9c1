#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "pigp/gp.hpp"
#include "pigp/narx.hpp"
#include "pigp/reduced_rank.hpp"
#include "pigp/state_space.hpp"

namespace pigp {

/// Sampled forcing held constant over each integration step. White noise of
/// continuous intensity sigma^2 is drawn with per-sample variance sigma^2 / dt,
/// so a linear oscillator's stationary displacement variance is
/// sigma^2 / (4 m^2 zeta omega_n^3) for every dt.
struct Forcing {
  std::optional<double> white_noise_sigma;
  Eigen::VectorXd series;  // used when white_noise_sigma is empty

  static Forcing white_noise(double sigma) { return {sigma, {}}; }
  static Forcing sampled(Eigen::VectorXd values) { return {std::nullopt, std::move(values)}; }
};

Eigen::VectorXd draw_forcing(const Forcing& forcing, Eigen::Index steps, double dt, std::uint64_t seed);

struct SdofSimSpec {
  double m = 1.0;
  double c = 0.1;
  double k = 1.0;
  double k3 = 0.0;  // cubic stiffness
  double dt = 0.01;
  Eigen::Index steps = 1000;
  double y0 = 0.0;
  double v0 = 0.0;
  Forcing forcing = Forcing::white_noise(1.0);
  std::uint64_t seed = 1;
};

/// Fourth-order Runge-Kutta simulation of m y'' + c y' + k y + k3 y^3 = F(t).
/// Returns u = forcing (T x 1), y = displacement.
SequenceData simulate_sdof(const SdofSimSpec& spec);

struct ChainResponse {
  Eigen::VectorXd time;
  Eigen::MatrixXd displacement;  // T x p
  Eigen::MatrixXd velocity;
  Eigen::MatrixXd acceleration;
};

/// RK4 integration of M q'' + C q' + K q + k3 .* q^3 = b f with zero-order-held f.
ChainResponse integrate_structure(const StructuralModel& s, const Eigen::VectorXd& cubic, const Eigen::VectorXd& force,
                                  double dt, const Eigen::VectorXd& q0, const Eigen::VectorXd& v0);

/// Sum of equal-amplitude sinusoids with frequencies drawn uniformly in
/// [f_lo, f_hi] Hz and random phases, scaled to the requested RMS.
Eigen::VectorXd band_limited_series(Eigen::Index steps, double dt, double f_lo, double f_hi, int components, double rms,
                                    std::uint64_t seed);

struct ChainSimSpec {
  std::vector<double> masses{1.0, 1.0, 1.0};
  std::vector<double> dampings{2.0, 2.0, 2.0};
  std::vector<double> stiffnesses{400.0, 400.0, 400.0};
  int force_dof = 2;
  std::vector<ObservationChannel> observed;
  double dt = 0.01;
  Eigen::Index steps = 2000;
  Forcing forcing = Forcing::white_noise(1.0);
  double noise_fraction = 0.01;  // observation noise std relative to channel std
  std::vector<double> initial_displacement;
  std::vector<double> initial_velocity;
  std::uint64_t seed = 1;
};

struct ChainSimResult {
  StructuralModel structure;
  ChainResponse response;
  Eigen::VectorXd force;
  Eigen::MatrixXd clean_observations;  // T x channels
  Eigen::MatrixXd observations;        // with noise
  std::vector<double> noise_variances;
};

ChainSimResult simulate_mdof_chain(const ChainSimSpec& spec);

/// Kinetic plus potential energy of a linear chain state.
double chain_energy(const StructuralModel& s, const Eigen::VectorXd& q, const Eigen::VectorXd& v);

/// Bridge-deflection analogue: deflection is linear in temperature plus a
/// daily periodic term. Temperature declines across the record, so the
/// training window (first part) is warm and the test window cold.
struct TrendSpec {
  double days = 60.0;
  int samples_per_day = 24;
  double temp_start = 22.0;
  double temp_end = 2.0;
  double daily_temp_amplitude = 3.0;
  double weather_sigma = 1.0;  // AR(1) temperature fluctuation
  double theta0 = 50.0;
  double slope = -1.2;
  double periodic_amplitude = 2.0;
  double noise = 0.3;
  double train_fraction = 0.5;
  std::uint64_t seed = 1;
};

struct TrendSeries {
  Dataset data;  // X = [temperature, hour of day], time in seconds
  Eigen::Index train_end = 0;
};

TrendSeries generate_trend_series(const TrendSpec& spec);

/// Wave-loading analogue: U is a random-phase sum of sinusoids, loading is
/// Morison's law plus an input-dependent memory term and noise.
struct MorisonTaskSpec {
  Eigen::Index steps = 600;
  double dt = 0.25;
  double drag = 1.0;
  double inertia = 1.5;
  double discrepancy = 0.25;  // memory term magnitude relative to the drag term
  double amplitude = 1.0;     // velocity amplitude scale
  int components = 12;
  double f_lo = 0.08;
  double f_hi = 0.25;
  double noise = 0.02;
  std::uint64_t seed = 1;
};

/// u = [U, dU/dt], y = load.
SequenceData generate_morison_series(const MorisonTaskSpec& spec);

/// Random field on a rectangle drawn from the reduced-rank prior of a kernel
/// with the given boundary condition.
struct FieldSpec {
  std::vector<double> half_widths{1.0, 1.0};
  Boundary boundary = Boundary::Dirichlet;
  int modes = 24;  // per dimension for the generating expansion
  double sigma_f = 1.0;
  double lengthscale = 0.4;
  double noise = 0.01;
  std::uint64_t seed = 1;
};

struct FieldSample {
  DomainSpec domain;
  Eigen::VectorXd coefficients;
  ReducedRankBasis basis;

  double value(ConstVecRef x) const;
};

FieldSample generate_bounded_field(const FieldSpec& spec);

/// g^d interior grid points (cell centres) of a domain.
Eigen::MatrixXd interior_grid(const DomainSpec& domain, int per_dim);

}  // namespace pigp
