#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pigp {

/// Linear-Gaussian state-space model
///   dx = A x dt + Lc dβ,  E[dβ dβ^T] = Qc dt
///   y_k = H x(t_k) + r_k, r_k ~ N(0, R)
/// with x(t_0) ~ N(m0, P0). `discretize` fills the exact discrete pair (Ad, Qd).
struct StateSpaceModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd Lc;
  Eigen::MatrixXd Qc;
  Eigen::MatrixXd H;
  Eigen::MatrixXd R;
  Eigen::VectorXd m0;
  Eigen::MatrixXd P0;

  double dt = 0.0;
  Eigen::MatrixXd Ad;
  Eigen::MatrixXd Qd;

  Eigen::Index state_dim() const { return A.rows(); }
  Eigen::Index obs_dim() const { return H.rows(); }
  bool discretized() const { return dt > 0.0 && Ad.size() > 0; }
  void validate() const;
};

/// Solves A P + P A^T + W = 0 for P.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W);

/// State-space form of a Matern GP with smoothness nu in {1/2, 3/2}. The
/// first state is the process value; P0 is the stationary covariance and H
/// picks the first state. R is left empty.
StateSpaceModel matern_to_ss(double nu, double sigma, double lengthscale);

enum class Observable { Displacement, Velocity, Acceleration };

std::string to_string(Observable q);
Observable observable_from_string(const std::string& name);

struct ObservationChannel {
  Observable quantity = Observable::Displacement;
  int dof = 0;
};

/// M q'' + C q' + K q = b f(t) with observed channels selected per degree of freedom.
struct StructuralModel {
  Eigen::MatrixXd M;
  Eigen::MatrixXd C;
  Eigen::MatrixXd K;
  Eigen::VectorXd force_input;  // b
  std::vector<ObservationChannel> observed;

  Eigen::Index dofs() const { return M.rows(); }
  void validate() const;
};

/// Tridiagonal chain: spring/damper i joins DOF i-1 and DOF i (DOF 0 to ground).
StructuralModel make_chain(const std::vector<double>& masses, const std::vector<double>& dampings,
                           const std::vector<double>& stiffnesses, int force_dof,
                           std::vector<ObservationChannel> observed);

/// Structural states [q; q'] followed by the force states. The force
/// fragment's first output drives the structure through `force_input`. Without
/// a fragment the result is the bare structural model. P0 is
/// blockdiag(initial_state_var I, force P0); R is left empty.
StateSpaceModel augment(const StructuralModel& structural, const std::optional<StateSpaceModel>& force_fragment,
                        double initial_state_var = 0.0);

/// Exact discretization: Ad = exp(A dt) and Qd by the Van Loan block exponential.
StateSpaceModel discretize(StateSpaceModel model, double dt);

struct FilterResult {
  std::vector<Eigen::VectorXd> predicted_mean;
  std::vector<Eigen::MatrixXd> predicted_cov;
  std::vector<Eigen::VectorXd> filtered_mean;
  std::vector<Eigen::MatrixXd> filtered_cov;
  double log_likelihood = 0.0;
};

/// Kalman filter with Joseph-form updates. Observations are T x obs_dim;
/// NaN entries are missing and excluded from the update at that step.
FilterResult kalman_filter(const StateSpaceModel& model, const Eigen::MatrixXd& observations);

struct SmootherResult {
  std::vector<Eigen::VectorXd> filtered_mean;
  std::vector<Eigen::MatrixXd> filtered_cov;
  std::vector<Eigen::VectorXd> smoothed_mean;
  std::vector<Eigen::MatrixXd> smoothed_cov;
  Eigen::VectorXd force_mean;
  Eigen::VectorXd force_variance;
  double log_likelihood = 0.0;
};

/// Rauch-Tung-Striebel backward pass. `force_state` selects the state whose
/// marginal is reported as the force posterior.
SmootherResult rts_smoother(const StateSpaceModel& model, const FilterResult& filtered,
                            std::optional<Eigen::Index> force_state = std::nullopt);

struct MaternForcePrior {
  double nu = 1.5;
  double sigma = 1.0;
  double lengthscale = 1.0;
};

struct ObservationNoise {
  std::vector<double> variances;  // one per observed channel
  double initial_state_var = 1e-8;
};

/// Joint input-state estimation: augment the structure with a Matern force
/// prior, discretize, filter and smooth.
SmootherResult estimate_force(const StructuralModel& structural, const Eigen::MatrixXd& observations, double dt,
                              const MaternForcePrior& prior, const ObservationNoise& noise);

/// Filter log-likelihood of the augmented model, for hyperparameter search.
double force_model_log_likelihood(const StructuralModel& structural, const Eigen::MatrixXd& observations, double dt,
                                  const MaternForcePrior& prior, const ObservationNoise& noise);

}  // namespace pigp
