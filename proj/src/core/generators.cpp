#include "pigp/generators.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

#include "pigp/error.hpp"
#include "pigp/physics.hpp"

namespace pigp {

Eigen::VectorXd draw_forcing(const Forcing& forcing, Eigen::Index steps, double dt, std::uint64_t seed) {
  if (!forcing.white_noise_sigma) {
    require(forcing.series.size() == steps, ErrorKind::Data,
            "forcing: supplied series has " + std::to_string(forcing.series.size()) + " samples, expected " +
                std::to_string(steps));
    return forcing.series;
  }
  const double sigma = *forcing.white_noise_sigma;
  require(std::isfinite(sigma) && sigma >= 0.0, ErrorKind::InvalidArgument, "forcing: sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd f(steps);
  const double scale = sigma / std::sqrt(dt);
  for (Eigen::Index i = 0; i < steps; ++i) f[i] = scale * normal(rng);
  return f;
}

ChainResponse integrate_structure(const StructuralModel& s, const Eigen::VectorXd& cubic, const Eigen::VectorXd& force,
                                  double dt, const Eigen::VectorXd& q0, const Eigen::VectorXd& v0) {
  s.validate();
  const Eigen::Index p = s.dofs();
  require(std::isfinite(dt) && dt > 0.0, ErrorKind::InvalidArgument, "integrate: dt must be positive");
  require(cubic.size() == p && q0.size() == p && v0.size() == p, ErrorKind::InvalidArgument,
          "integrate: state vectors must match the number of DOFs");
  require(force.allFinite(), ErrorKind::Data, "integrate: non-finite force samples");
  const Eigen::LLT<Eigen::MatrixXd> mass(s.M);
  const Eigen::Index T = force.size();

  auto accel = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& v, double f) -> Eigen::VectorXd {
    const Eigen::VectorXd rhs =
        s.force_input * f - s.C * v - s.K * q - cubic.cwiseProduct(q.cwiseProduct(q).cwiseProduct(q));
    return mass.solve(rhs);
  };

  ChainResponse out;
  out.time = Eigen::VectorXd::LinSpaced(T, 0.0, dt * static_cast<double>(T - 1));
  out.displacement.resize(T, p);
  out.velocity.resize(T, p);
  out.acceleration.resize(T, p);
  Eigen::VectorXd q = q0, v = v0;
  for (Eigen::Index k = 0; k < T; ++k) {
    const double f = force[k];
    out.displacement.row(k) = q.transpose();
    out.velocity.row(k) = v.transpose();
    const Eigen::VectorXd a1 = accel(q, v, f);
    out.acceleration.row(k) = a1.transpose();
    if (k + 1 == T) break;
    const Eigen::VectorXd q1 = v;
    const Eigen::VectorXd q2 = v + 0.5 * dt * a1;
    const Eigen::VectorXd a2 = accel(q + 0.5 * dt * q1, q2, f);
    const Eigen::VectorXd q3 = v + 0.5 * dt * a2;
    const Eigen::VectorXd a3 = accel(q + 0.5 * dt * q2, q3, f);
    const Eigen::VectorXd q4 = v + dt * a3;
    const Eigen::VectorXd a4 = accel(q + dt * q3, q4, f);
    q += dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
    v += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    require(q.allFinite() && v.allFinite() && q.cwiseAbs().maxCoeff() < 1e100 && v.cwiseAbs().maxCoeff() < 1e100,
            ErrorKind::Numerical, "integrate: response diverged at step " + std::to_string(k) + "; dt too large");
  }
  return out;
}

SequenceData simulate_sdof(const SdofSimSpec& spec) {
  require(spec.m > 0.0, ErrorKind::InvalidArgument, "sdof: mass must be positive");
  require(spec.steps >= 1, ErrorKind::InvalidArgument, "sdof: need at least one step");
  const StructuralModel s = make_chain({spec.m}, {spec.c}, {spec.k}, 0, {});
  const Eigen::VectorXd f = draw_forcing(spec.forcing, spec.steps, spec.dt, spec.seed);
  const ChainResponse r = integrate_structure(s, Eigen::VectorXd::Constant(1, spec.k3), f, spec.dt,
                                              Eigen::VectorXd::Constant(1, spec.y0), Eigen::VectorXd::Constant(1, spec.v0));
  SequenceData seq;
  seq.u = f;
  seq.y = r.displacement.col(0);
  seq.dt = spec.dt;
  seq.time = r.time;
  return seq;
}

Eigen::VectorXd band_limited_series(Eigen::Index steps, double dt, double f_lo, double f_hi, int components, double rms,
                                    std::uint64_t seed) {
  require(components >= 1 && f_lo > 0.0 && f_hi >= f_lo, ErrorKind::InvalidArgument,
          "band-limited series: need components >= 1 and 0 < f_lo <= f_hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(f_lo, f_hi), phase(0.0, 2.0 * std::numbers::pi);
  Eigen::VectorXd w(components), ph(components);
  for (int i = 0; i < components; ++i) {
    w[i] = 2.0 * std::numbers::pi * freq(rng);
    ph[i] = phase(rng);
  }
  const double amp = rms * std::sqrt(2.0 / components);
  Eigen::VectorXd out(steps);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const double t = dt * static_cast<double>(k);
    out[k] = amp * (w.array() * t + ph.array()).sin().sum();
  }
  return out;
}

ChainSimResult simulate_mdof_chain(const ChainSimSpec& spec) {
  ChainSimResult out;
  out.structure = make_chain(spec.masses, spec.dampings, spec.stiffnesses, spec.force_dof, spec.observed);
  const Eigen::Index p = out.structure.dofs();
  auto initial = [&](const std::vector<double>& v) {
    if (v.empty()) return Eigen::VectorXd::Zero(p).eval();
    require(static_cast<Eigen::Index>(v.size()) == p, ErrorKind::InvalidArgument, "chain: initial state size mismatch");
    return Eigen::VectorXd::Map(v.data(), p).eval();
  };
  out.force = draw_forcing(spec.forcing, spec.steps, spec.dt, spec.seed);
  out.response = integrate_structure(out.structure, Eigen::VectorXd::Zero(p), out.force, spec.dt,
                                     initial(spec.initial_displacement), initial(spec.initial_velocity));

  const auto T = spec.steps;
  const auto nobs = static_cast<Eigen::Index>(spec.observed.size());
  out.clean_observations.resize(T, nobs);
  for (Eigen::Index j = 0; j < nobs; ++j) {
    const auto& ch = spec.observed[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd& src = ch.quantity == Observable::Displacement ? out.response.displacement
                                 : ch.quantity == Observable::Velocity   ? out.response.velocity
                                                                         : out.response.acceleration;
    out.clean_observations.col(j) = src.col(ch.dof);
  }

  std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.observations = out.clean_observations;
  for (Eigen::Index j = 0; j < nobs; ++j) {
    const Eigen::VectorXd col = out.clean_observations.col(j);
    const double sd = spec.noise_fraction * std::sqrt((col.array() - col.mean()).square().mean());
    out.noise_variances.push_back(sd * sd);
    for (Eigen::Index k = 0; k < T; ++k) out.observations(k, j) += sd * normal(rng);
  }
  return out;
}

double chain_energy(const StructuralModel& s, const Eigen::VectorXd& q, const Eigen::VectorXd& v) {
  return 0.5 * v.dot(s.M * v) + 0.5 * q.dot(s.K * q);
}

TrendSeries generate_trend_series(const TrendSpec& spec) {
  require(spec.days > 0.0 && spec.samples_per_day >= 1, ErrorKind::InvalidArgument, "trend: invalid duration");
  require(spec.train_fraction > 0.0 && spec.train_fraction < 1.0, ErrorKind::InvalidArgument,
          "trend: train fraction must lie in (0, 1)");
  const auto n = static_cast<Eigen::Index>(std::llround(spec.days * spec.samples_per_day));
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double rho = 0.95;
  const double two_pi = 2.0 * std::numbers::pi;

  TrendSeries out;
  out.data.X.resize(n, 2);
  out.data.y.resize(n);
  out.data.time = Eigen::VectorXd(n);
  double weather = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double day = static_cast<double>(k) / spec.samples_per_day;
    const double hour = 24.0 * (day - std::floor(day));
    weather = rho * weather + std::sqrt(1.0 - rho * rho) * spec.weather_sigma * normal(rng);
    const double temp = spec.temp_start + (spec.temp_end - spec.temp_start) * day / spec.days +
                        spec.daily_temp_amplitude * std::sin(two_pi * (hour - 9.0) / 24.0) + weather;
    const double eps = spec.noise * normal(rng);
    out.data.X(k, 0) = temp;
    out.data.X(k, 1) = hour;
    out.data.y[k] = spec.theta0 + spec.slope * temp + spec.periodic_amplitude * std::sin(two_pi * hour / 24.0 + 0.5) + eps;
    (*out.data.time)[k] = day * 86400.0;
  }
  out.train_end = static_cast<Eigen::Index>(std::floor(spec.train_fraction * static_cast<double>(n)));
  return out;
}

SequenceData generate_morison_series(const MorisonTaskSpec& spec) {
  require(spec.steps >= 2 && spec.dt > 0.0 && spec.components >= 1, ErrorKind::InvalidArgument,
          "morison task: invalid length, step or component count");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> freq(spec.f_lo, spec.f_hi), phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd w(spec.components), ph(spec.components);
  for (int i = 0; i < spec.components; ++i) {
    w[i] = 2.0 * std::numbers::pi * freq(rng);
    ph[i] = phase(rng);
  }
  const double amp = spec.amplitude * std::sqrt(2.0 / spec.components);
  auto velocity = [&](double t) { return amp * (w.array() * t + ph.array()).cos().sum(); };
  auto accel = [&](double t) { return -amp * (w.array() * (w.array() * t + ph.array()).sin()).sum(); };

  const MorisonParams mp{spec.drag, spec.inertia};
  SequenceData seq;
  seq.dt = spec.dt;
  seq.u.resize(spec.steps, 2);
  seq.y.resize(spec.steps);
  seq.time = Eigen::VectorXd(spec.steps);
  for (Eigen::Index k = 0; k < spec.steps; ++k) {
    const double t = spec.dt * static_cast<double>(k);
    const double U = velocity(t);
    const double Ud = accel(t);
    const double Ulag = velocity(t - 2.0 * spec.dt);
    const double memory = spec.discrepancy * spec.drag * Ulag * std::abs(Ulag);
    seq.u(k, 0) = U;
    seq.u(k, 1) = Ud;
    seq.y[k] = morison_force(mp, U, Ud) + memory + spec.noise * normal(rng);
    (*seq.time)[k] = t;
  }
  return seq;
}

double FieldSample::value(ConstVecRef x) const { return basis.evaluate(x).dot(coefficients); }

FieldSample generate_bounded_field(const FieldSpec& spec) {
  FieldSample out;
  out.domain.half_widths = spec.half_widths;
  out.domain.boundary = spec.boundary;
  out.domain.basis_counts.assign(spec.half_widths.size(), spec.modes);
  const KernelSpec kernel = KernelSpec::squared_exponential(spec.sigma_f, {spec.lengthscale});
  out.basis = bind_kernel(eigenpairs(out.domain), kernel);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.coefficients.resize(out.basis.size());
  for (Eigen::Index j = 0; j < out.basis.size(); ++j)
    out.coefficients[j] = std::sqrt(out.basis.spectral_weights[j]) * normal(rng);
  return out;
}

Eigen::MatrixXd interior_grid(const DomainSpec& domain, int per_dim) {
  require(per_dim >= 1, ErrorKind::InvalidArgument, "grid: need at least one point per dimension");
  const auto d = static_cast<Eigen::Index>(domain.dimension());
  Eigen::Index total = 1;
  for (Eigen::Index k = 0; k < d; ++k) total *= per_dim;
  Eigen::MatrixXd G(total, d);
  for (Eigen::Index i = 0; i < total; ++i) {
    Eigen::Index rem = i;
    for (Eigen::Index k = 0; k < d; ++k) {
      const Eigen::Index idx = rem % per_dim;
      rem /= per_dim;
      const double L = domain.half_widths[static_cast<std::size_t>(k)];
      G(i, k) = domain.center_of(static_cast<std::size_t>(k)) - L + (static_cast<double>(idx) + 0.5) * 2.0 * L / per_dim;
    }
  }
  return G;
}

}  // namespace pigp
