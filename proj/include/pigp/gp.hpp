#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pigp/kernel.hpp"

namespace pigp {

/// Inputs X (n x d), outputs y (n) and optional timestamps (seconds).
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::optional<Eigen::VectorXd> time;

  Eigen::Index size() const { return X.rows(); }
  Eigen::Index dimension() const { return X.cols(); }
  void validate() const;
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

/// Prior mean of the process. External means are named physics models
/// evaluated on an input row.
struct MeanFunctionSpec {
  enum class Form { Zero, Linear, External };

  Form form = Form::Zero;
  double theta0 = 0.0;
  std::vector<double> theta;
  std::string name;
  std::function<double(ConstVecRef)> external;

  static MeanFunctionSpec zero() { return {}; }
  static MeanFunctionSpec linear(double theta0, std::vector<double> theta);
  static MeanFunctionSpec make_external(std::string name, std::function<double(ConstVecRef)> fn);

  double operator()(ConstVecRef x) const;
  Eigen::VectorXd evaluate(const Eigen::MatrixXd& X) const;
};

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  std::optional<Eigen::MatrixXd> covariance;
};

/// Fitted exact GP regression. Immutable once constructed by fit_exact.
class TrainedGp {
 public:
  const KernelSpec& kernel() const { return kernel_; }
  const MeanFunctionSpec& mean() const { return mean_; }
  double noise_variance() const { return noise_var_; }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& inputs() const { return X_; }
  const Eigen::VectorXd& targets() const { return y_; }
  /// y - m(X)
  const Eigen::VectorXd& residual() const { return residual_; }
  /// Lower Cholesky factor of K + (noise + jitter) I.
  const Eigen::MatrixXd& factor() const { return L_; }
  const Eigen::VectorXd& weights() const { return alpha_; }
  double log_marginal_likelihood() const { return lml_; }

 private:
  friend TrainedGp fit_exact(const Dataset&, const KernelSpec&, const MeanFunctionSpec&, double);

  KernelSpec kernel_;
  MeanFunctionSpec mean_;
  double noise_var_ = 0.0;
  double jitter_ = 0.0;
  Eigen::MatrixXd X_;
  Eigen::VectorXd y_;
  Eigen::VectorXd residual_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

/// Cholesky factorization with an escalating diagonal jitter.
///
/// With positive noise the unjittered matrix is tried first. Otherwise, and
/// on failure, jitter runs from 1e-10 to 1e-4 times the mean diagonal in
/// decades. Throws ErrorKind::Numerical when every rung fails.
struct JitteredCholesky {
  Eigen::MatrixXd L;
  double jitter = 0.0;
};
JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& A, bool try_plain_first);

TrainedGp fit_exact(const Dataset& data, const KernelSpec& kernel, const MeanFunctionSpec& mean, double noise_var);

Prediction predict(const TrainedGp& model, const Eigen::MatrixXd& X_star, bool full_covariance = false);

double log_marginal_likelihood(const TrainedGp& model);

}  // namespace pigp
