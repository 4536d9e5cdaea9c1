#include "pigp/state_space.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "pigp/error.hpp"

namespace pigp {

namespace {

void symmetrize(Eigen::MatrixXd& P) { P = 0.5 * (P + P.transpose()).eval(); }

}  // namespace

void StateSpaceModel::validate() const {
  const auto n = A.rows();
  require(A.cols() == n && n > 0, ErrorKind::InvalidArgument, "state space: drift matrix must be square");
  require(Lc.rows() == n && Qc.rows() == Lc.cols() && Qc.cols() == Lc.cols(), ErrorKind::InvalidArgument,
          "state space: diffusion dimensions inconsistent");
  require(H.cols() == n, ErrorKind::InvalidArgument, "state space: observation matrix column count mismatch");
  require(m0.size() == n && P0.rows() == n && P0.cols() == n, ErrorKind::InvalidArgument,
          "state space: initial moments dimension mismatch");
  require(A.allFinite() && Lc.allFinite() && Qc.allFinite() && H.allFinite() && P0.allFinite() && m0.allFinite(),
          ErrorKind::Numerical, "state space: non-finite entries");
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W) {
  const auto n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  // vec(A P + P A^T) = (I (x) A + A (x) I) vec(P)
  const Eigen::MatrixXd S = Eigen::kroneckerProduct(I, A) + Eigen::kroneckerProduct(A, I);
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(W.data(), W.size());
  const Eigen::VectorXd p = S.fullPivLu().solve(rhs);
  Eigen::MatrixXd P = Eigen::Map<const Eigen::MatrixXd>(p.data(), n, n);
  symmetrize(P);
  return P;
}

StateSpaceModel matern_to_ss(double nu, double sigma, double lengthscale) {
  require(std::isfinite(sigma) && sigma > 0.0 && std::isfinite(lengthscale) && lengthscale > 0.0,
          ErrorKind::InvalidArgument, "matern state space: sigma and lengthscale must be positive");
  StateSpaceModel ss;
  const double s2 = sigma * sigma;
  if (nu == 0.5) {
    const double lambda = 1.0 / lengthscale;
    ss.A = Eigen::MatrixXd::Constant(1, 1, -lambda);
    ss.Lc = Eigen::MatrixXd::Ones(1, 1);
    ss.Qc = Eigen::MatrixXd::Constant(1, 1, 2.0 * s2 * lambda);
  } else if (nu == 1.5) {
    const double lambda = std::sqrt(3.0) / lengthscale;
    ss.A.resize(2, 2);
    ss.A << 0.0, 1.0, -lambda * lambda, -2.0 * lambda;
    ss.Lc.resize(2, 1);
    ss.Lc << 0.0, 1.0;
    ss.Qc = Eigen::MatrixXd::Constant(1, 1, 4.0 * s2 * lambda * lambda * lambda);
  } else {
    fail(ErrorKind::InvalidArgument, "matern state space: smoothness must be 1/2 or 3/2");
  }
  const auto n = ss.A.rows();
  ss.H = Eigen::MatrixXd::Zero(1, n);
  ss.H(0, 0) = 1.0;
  ss.m0 = Eigen::VectorXd::Zero(n);
  ss.P0 = solve_lyapunov(ss.A, ss.Lc * ss.Qc * ss.Lc.transpose());
  return ss;
}

std::string to_string(Observable q) {
  switch (q) {
    case Observable::Displacement: return "displacement";
    case Observable::Velocity: return "velocity";
    case Observable::Acceleration: return "acceleration";
  }
  return "?";
}

Observable observable_from_string(const std::string& name) {
  if (name == "displacement") return Observable::Displacement;
  if (name == "velocity") return Observable::Velocity;
  if (name == "acceleration") return Observable::Acceleration;
  fail(ErrorKind::Config, "unknown observable '" + name + "'");
}

void StructuralModel::validate() const {
  const auto p = M.rows();
  require(p >= 1 && M.cols() == p && C.rows() == p && C.cols() == p && K.rows() == p && K.cols() == p,
          ErrorKind::InvalidArgument, "structure: M, C, K must be square and of equal size");
  require(force_input.size() == p, ErrorKind::InvalidArgument, "structure: force selection vector size mismatch");
  require(M.allFinite() && C.allFinite() && K.allFinite() && force_input.allFinite(), ErrorKind::InvalidArgument,
          "structure: non-finite matrix entries");
  require((M - M.transpose()).norm() <= 1e-12 * M.norm(), ErrorKind::InvalidArgument, "structure: M not symmetric");
  require(M.llt().info() == Eigen::Success, ErrorKind::InvalidArgument, "structure: mass matrix not positive definite");
  for (const auto& ch : observed)
    require(ch.dof >= 0 && ch.dof < p, ErrorKind::InvalidArgument,
            "structure: observed DOF " + std::to_string(ch.dof) + " out of range");
}

StructuralModel make_chain(const std::vector<double>& masses, const std::vector<double>& dampings,
                           const std::vector<double>& stiffnesses, int force_dof,
                           std::vector<ObservationChannel> observed) {
  const auto p = static_cast<Eigen::Index>(masses.size());
  require(p >= 1 && dampings.size() == masses.size() && stiffnesses.size() == masses.size(),
          ErrorKind::InvalidArgument, "chain: masses, dampings and stiffnesses need equal length >= 1");
  require(force_dof >= 0 && force_dof < p, ErrorKind::InvalidArgument, "chain: force DOF out of range");
  StructuralModel s;
  s.M = Eigen::MatrixXd::Zero(p, p);
  s.C = Eigen::MatrixXd::Zero(p, p);
  s.K = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto u = static_cast<std::size_t>(i);
    s.M(i, i) = masses[u];
    s.C(i, i) += dampings[u];
    s.K(i, i) += stiffnesses[u];
    if (i > 0) {
      s.C(i - 1, i - 1) += dampings[u];
      s.K(i - 1, i - 1) += stiffnesses[u];
      s.C(i - 1, i) = s.C(i, i - 1) = -dampings[u];
      s.K(i - 1, i) = s.K(i, i - 1) = -stiffnesses[u];
    }
  }
  s.force_input = Eigen::VectorXd::Zero(p);
  s.force_input[force_dof] = 1.0;
  s.observed = std::move(observed);
  s.validate();
  return s;
}

StateSpaceModel augment(const StructuralModel& structural, const std::optional<StateSpaceModel>& force_fragment,
                        double initial_state_var) {
  structural.validate();
  const Eigen::Index p = structural.dofs();
  const Eigen::Index q = force_fragment ? force_fragment->state_dim() : 0;
  const Eigen::Index n = 2 * p + q;

  const Eigen::MatrixXd Minv = structural.M.llt().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd MK = Minv * structural.K;
  const Eigen::MatrixXd MC = Minv * structural.C;

  // acceleration rows: [-M^-1 K, -M^-1 C, M^-1 b h_f]
  Eigen::MatrixXd accel = Eigen::MatrixXd::Zero(p, n);
  accel.block(0, 0, p, p) = -MK;
  accel.block(0, p, p, p) = -MC;
  if (force_fragment) accel.block(0, 2 * p, p, q) = Minv * structural.force_input * force_fragment->H.row(0);

  StateSpaceModel ss;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  ss.A.block(0, p, p, p) = Eigen::MatrixXd::Identity(p, p);
  ss.A.block(p, 0, p, n) = accel;

  ss.m0 = Eigen::VectorXd::Zero(n);
  ss.P0 = Eigen::MatrixXd::Zero(n, n);
  ss.P0.topLeftCorner(2 * p, 2 * p) = initial_state_var * Eigen::MatrixXd::Identity(2 * p, 2 * p);

  if (force_fragment) {
    force_fragment->validate();
    ss.A.bottomRightCorner(q, q) = force_fragment->A;
    ss.Lc = Eigen::MatrixXd::Zero(n, force_fragment->Lc.cols());
    ss.Lc.bottomRows(q) = force_fragment->Lc;
    ss.Qc = force_fragment->Qc;
    ss.m0.tail(q) = force_fragment->m0;
    ss.P0.bottomRightCorner(q, q) = force_fragment->P0;
  } else {
    ss.Lc = Eigen::MatrixXd::Zero(n, 1);
    ss.Qc = Eigen::MatrixXd::Zero(1, 1);
  }

  ss.H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(structural.observed.size()), n);
  for (std::size_t r = 0; r < structural.observed.size(); ++r) {
    const auto& ch = structural.observed[r];
    const auto row = static_cast<Eigen::Index>(r);
    switch (ch.quantity) {
      case Observable::Displacement: ss.H(row, ch.dof) = 1.0; break;
      case Observable::Velocity: ss.H(row, p + ch.dof) = 1.0; break;
      case Observable::Acceleration: ss.H.row(row) = accel.row(ch.dof); break;
    }
  }
  return ss;
}

StateSpaceModel discretize(StateSpaceModel model, double dt) {
  require(std::isfinite(dt) && dt > 0.0, ErrorKind::InvalidArgument, "discretize: time step must be positive");
  model.validate();
  const auto n = model.state_dim();
  const Eigen::MatrixXd W = model.Lc * model.Qc * model.Lc.transpose();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  F.topLeftCorner(n, n) = -model.A * dt;
  F.topRightCorner(n, n) = W * dt;
  F.bottomRightCorner(n, n) = model.A.transpose() * dt;
  const Eigen::MatrixXd E = F.exp();
  model.Ad = E.bottomRightCorner(n, n).transpose();
  model.Qd = model.Ad * E.topRightCorner(n, n);
  symmetrize(model.Qd);
  require(model.Ad.allFinite() && model.Qd.allFinite(), ErrorKind::Numerical, "discretize: non-finite result");
  model.dt = dt;
  return model;
}

FilterResult kalman_filter(const StateSpaceModel& model, const Eigen::MatrixXd& observations) {
  require(model.discretized(), ErrorKind::InvalidArgument, "kalman: model must be discretized");
  model.validate();
  const auto n = model.state_dim();
  const auto T = observations.rows();
  require(observations.cols() == model.obs_dim(), ErrorKind::InvalidArgument,
          "kalman: observation width " + std::to_string(observations.cols()) + " != " +
              std::to_string(model.obs_dim()));
  require(model.R.rows() == model.obs_dim() && model.R.cols() == model.obs_dim(), ErrorKind::InvalidArgument,
          "kalman: observation noise covariance dimension mismatch");

  FilterResult out;
  out.predicted_mean.reserve(static_cast<std::size_t>(T));
  out.predicted_cov.reserve(static_cast<std::size_t>(T));
  out.filtered_mean.reserve(static_cast<std::size_t>(T));
  out.filtered_cov.reserve(static_cast<std::size_t>(T));
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const double log2pi = std::log(2.0 * std::numbers::pi);

  Eigen::VectorXd m = model.m0;
  Eigen::MatrixXd P = model.P0;
  for (Eigen::Index t = 0; t < T; ++t) {
    if (t > 0) {
      m = model.Ad * m;
      P = model.Ad * P * model.Ad.transpose() + model.Qd;
      symmetrize(P);
    }
    out.predicted_mean.push_back(m);
    out.predicted_cov.push_back(P);

    std::vector<Eigen::Index> rows;
    for (Eigen::Index j = 0; j < observations.cols(); ++j)
      if (!std::isnan(observations(t, j))) rows.push_back(j);
    if (!rows.empty()) {
      const auto k = static_cast<Eigen::Index>(rows.size());
      Eigen::MatrixXd H(k, n), R(k, k);
      Eigen::VectorXd y(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        H.row(a) = model.H.row(rows[static_cast<std::size_t>(a)]);
        y[a] = observations(t, rows[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < k; ++b) R(a, b) = model.R(rows[static_cast<std::size_t>(a)], rows[static_cast<std::size_t>(b)]);
      }
      const Eigen::VectorXd v = y - H * m;
      Eigen::MatrixXd S = H * P * H.transpose() + R;
      symmetrize(S);
      Eigen::LLT<Eigen::MatrixXd> llt(S);
      require(llt.info() == Eigen::Success, ErrorKind::Numerical,
              "kalman: innovation covariance not positive definite at step " + std::to_string(t));
      const Eigen::MatrixXd Kg = llt.solve(H * P).transpose();
      m += Kg * v;
      const Eigen::MatrixXd IKH = I - Kg * H;
      P = IKH * P * IKH.transpose() + Kg * R * Kg.transpose();
      symmetrize(P);
      const Eigen::VectorXd w = llt.matrixL().solve(v);
      const double logdet = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
      out.log_likelihood += -0.5 * (w.squaredNorm() + logdet + static_cast<double>(k) * log2pi);
    }
    out.filtered_mean.push_back(m);
    out.filtered_cov.push_back(P);
  }
  return out;
}

SmootherResult rts_smoother(const StateSpaceModel& model, const FilterResult& filtered,
                            std::optional<Eigen::Index> force_state) {
  require(model.discretized(), ErrorKind::InvalidArgument, "rts: model must be discretized");
  const std::size_t T = filtered.filtered_mean.size();
  require(T >= 1, ErrorKind::InvalidArgument, "rts: empty filter output");
  SmootherResult out;
  out.filtered_mean = filtered.filtered_mean;
  out.filtered_cov = filtered.filtered_cov;
  out.smoothed_mean = filtered.filtered_mean;
  out.smoothed_cov = filtered.filtered_cov;
  out.log_likelihood = filtered.log_likelihood;

  for (std::size_t t = T - 1; t-- > 0;) {
    const Eigen::MatrixXd& Pf = filtered.filtered_cov[t];
    const Eigen::MatrixXd& Pp = filtered.predicted_cov[t + 1];
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Pp);
    require(ldlt.info() == Eigen::Success, ErrorKind::Numerical,
            "rts: singular predicted covariance at step " + std::to_string(t + 1));
    // G = Pf Ad^T Pp^{-1}
    const Eigen::MatrixXd G = ldlt.solve(model.Ad * Pf).transpose();
    require(G.allFinite(), ErrorKind::Numerical, "rts: singular predicted covariance at step " + std::to_string(t + 1));
    out.smoothed_mean[t] = filtered.filtered_mean[t] + G * (out.smoothed_mean[t + 1] - filtered.predicted_mean[t + 1]);
    Eigen::MatrixXd Ps = Pf + G * (out.smoothed_cov[t + 1] - Pp) * G.transpose();
    symmetrize(Ps);
    out.smoothed_cov[t] = std::move(Ps);
  }

  if (force_state) {
    const Eigen::Index f = *force_state;
    require(f >= 0 && f < model.state_dim(), ErrorKind::InvalidArgument, "rts: force state index out of range");
    out.force_mean.resize(static_cast<Eigen::Index>(T));
    out.force_variance.resize(static_cast<Eigen::Index>(T));
    for (std::size_t t = 0; t < T; ++t) {
      out.force_mean[static_cast<Eigen::Index>(t)] = out.smoothed_mean[t][f];
      out.force_variance[static_cast<Eigen::Index>(t)] = std::max(0.0, out.smoothed_cov[t](f, f));
    }
  }
  return out;
}

namespace {

StateSpaceModel build_force_model(const StructuralModel& structural, double dt, const MaternForcePrior& prior,
                                  const ObservationNoise& noise) {
  require(noise.variances.size() == structural.observed.size(), ErrorKind::InvalidArgument,
          "force estimation: need one noise variance per observed channel");
  for (double v : noise.variances)
    require(std::isfinite(v) && v > 0.0, ErrorKind::InvalidArgument, "force estimation: noise variances must be positive");
  StateSpaceModel ss = augment(structural, matern_to_ss(prior.nu, prior.sigma, prior.lengthscale), noise.initial_state_var);
  ss.R = Eigen::VectorXd::Map(noise.variances.data(), static_cast<Eigen::Index>(noise.variances.size())).asDiagonal();
  return discretize(std::move(ss), dt);
}

}  // namespace

SmootherResult estimate_force(const StructuralModel& structural, const Eigen::MatrixXd& observations, double dt,
                              const MaternForcePrior& prior, const ObservationNoise& noise) {
  const StateSpaceModel ss = build_force_model(structural, dt, prior, noise);
  return rts_smoother(ss, kalman_filter(ss, observations), 2 * structural.dofs());
}

double force_model_log_likelihood(const StructuralModel& structural, const Eigen::MatrixXd& observations, double dt,
                                  const MaternForcePrior& prior, const ObservationNoise& noise) {
  const StateSpaceModel ss = build_force_model(structural, dt, prior, noise);
  return kalman_filter(ss, observations).log_likelihood;
}

}  // namespace pigp
