#include "pigp/gp.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "pigp/error.hpp"

namespace pigp {

void Dataset::validate() const {
  require(X.rows() == y.size(), ErrorKind::Data,
          "dataset: " + std::to_string(X.rows()) + " input rows but " + std::to_string(y.size()) + " outputs");
  require(X.allFinite() && y.allFinite(), ErrorKind::Data, "dataset: non-finite entries");
  if (time) {
    require(time->size() == y.size(), ErrorKind::Data, "dataset: timestamp count differs from output count");
    require(time->allFinite(), ErrorKind::Data, "dataset: non-finite timestamps");
  }
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  if (time) out.time = Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    require(r >= 0 && r < X.rows(), ErrorKind::InvalidArgument, "dataset: subset row out of range");
    const auto k = static_cast<Eigen::Index>(i);
    out.X.row(k) = X.row(r);
    out.y[k] = y[r];
    if (time) (*out.time)[k] = (*time)[r];
  }
  return out;
}

MeanFunctionSpec MeanFunctionSpec::linear(double theta0, std::vector<double> theta) {
  MeanFunctionSpec m;
  m.form = Form::Linear;
  m.theta0 = theta0;
  m.theta = std::move(theta);
  return m;
}

MeanFunctionSpec MeanFunctionSpec::make_external(std::string name, std::function<double(ConstVecRef)> fn) {
  require(static_cast<bool>(fn), ErrorKind::InvalidArgument, "mean: external mean '" + name + "' has no function");
  MeanFunctionSpec m;
  m.form = Form::External;
  m.name = std::move(name);
  m.external = std::move(fn);
  return m;
}

double MeanFunctionSpec::operator()(ConstVecRef x) const {
  switch (form) {
    case Form::Zero: return 0.0;
    case Form::Linear: {
      require(theta.size() == static_cast<std::size_t>(x.size()), ErrorKind::InvalidArgument,
              "linear mean: slope dimension does not match input");
      double acc = theta0;
      for (Eigen::Index k = 0; k < x.size(); ++k) acc += theta[static_cast<std::size_t>(k)] * x[k];
      return acc;
    }
    case Form::External: return external(x);
  }
  return 0.0;
}

Eigen::VectorXd MeanFunctionSpec::evaluate(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd m(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) m[i] = (*this)(X.row(i).transpose());
  return m;
}

JitteredCholesky cholesky_with_jitter(const Eigen::MatrixXd& A, bool try_plain_first) {
  require(A.rows() == A.cols() && A.rows() > 0, ErrorKind::InvalidArgument, "cholesky: matrix must be square");
  const double scale = A.diagonal().mean();
  require(std::isfinite(scale), ErrorKind::Numerical, "cholesky: non-finite matrix");
  const auto n = A.rows();
  auto attempt = [&](double jitter) -> std::optional<JitteredCholesky> {
    Eigen::LLT<Eigen::MatrixXd> llt(A + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success) return std::nullopt;
    Eigen::MatrixXd L = llt.matrixL();
    if (!L.allFinite() || (L.diagonal().array() <= 0.0).any()) return std::nullopt;
    return JitteredCholesky{std::move(L), jitter};
  };
  if (try_plain_first) {
    if (auto r = attempt(0.0)) return *r;
  }
  for (double rel = 1e-10; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
    if (auto r = attempt(rel * std::abs(scale))) return *r;
  }
  fail(ErrorKind::Numerical, "cholesky: factorization failed at maximum jitter; kernel or hyperparameters ill-conditioned");
}

TrainedGp fit_exact(const Dataset& data, const KernelSpec& kernel, const MeanFunctionSpec& mean, double noise_var) {
  require(data.size() >= 1, ErrorKind::Data, "fit: empty dataset");
  data.validate();
  require(std::isfinite(noise_var) && noise_var >= 0.0, ErrorKind::InvalidArgument,
          "fit: noise variance must be non-negative");
  kernel.validate();
  kernel.check_dimension(static_cast<std::size_t>(data.dimension()));

  TrainedGp gp;
  gp.kernel_ = kernel;
  gp.mean_ = mean;
  gp.noise_var_ = noise_var;
  gp.X_ = data.X;
  gp.y_ = data.y;
  gp.residual_ = data.y - mean.evaluate(data.X);

  Eigen::MatrixXd K = build_gram(kernel, data.X);
  K.diagonal().array() += noise_var;
  auto chol = cholesky_with_jitter(K, noise_var > 0.0);
  gp.L_ = std::move(chol.L);
  gp.jitter_ = chol.jitter;

  gp.alpha_ = gp.L_.transpose().triangularView<Eigen::Upper>().solve(
      gp.L_.triangularView<Eigen::Lower>().solve(gp.residual_));

  const double n = static_cast<double>(data.size());
  gp.lml_ = -0.5 * gp.residual_.dot(gp.alpha_) - gp.L_.diagonal().array().log().sum() -
            0.5 * n * std::log(2.0 * std::numbers::pi);
  return gp;
}

Prediction predict(const TrainedGp& model, const Eigen::MatrixXd& X_star, bool full_covariance) {
  require(X_star.cols() == model.inputs().cols(), ErrorKind::InvalidArgument,
          "predict: test inputs have " + std::to_string(X_star.cols()) + " columns, model expects " +
              std::to_string(model.inputs().cols()));
  const Eigen::MatrixXd Ks = build_gram(model.kernel(), X_star, model.inputs());
  Prediction out;
  out.mean = Ks * model.weights() + model.mean().evaluate(X_star);

  const Eigen::MatrixXd V = model.factor().triangularView<Eigen::Lower>().solve(Ks.transpose());
  out.variance.resize(X_star.rows());
  for (Eigen::Index i = 0; i < X_star.rows(); ++i) {
    const double prior = kernel_eval(model.kernel(), X_star.row(i).transpose(), X_star.row(i).transpose());
    out.variance[i] = std::max(0.0, prior - V.col(i).squaredNorm());
  }
  if (full_covariance) {
    Eigen::MatrixXd C = build_gram(model.kernel(), X_star) - V.transpose() * V;
    C.diagonal() = out.variance;
    out.covariance = std::move(C);
  }
  return out;
}

double log_marginal_likelihood(const TrainedGp& model) { return model.log_marginal_likelihood(); }

}  // namespace pigp
