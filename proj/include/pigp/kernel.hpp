#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pigp/physics.hpp"

namespace pigp {

using ConstVecRef = Eigen::Ref<const Eigen::VectorXd, 0, Eigen::InnerStride<>>;

enum class KernelFamily { SquaredExponential, Matern12, Matern32, SdofDerived };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Tagged covariance function description.
///
/// SquaredExponential accepts either one lengthscale (isotropic) or one per
/// input dimension (ARD). The Matern kernels are isotropic. SdofDerived is a
/// one-dimensional time kernel whose hyperparameters live in `sdof`; its
/// `sigma_f` and `lengthscales` are ignored.
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  double sigma_f = 1.0;
  std::vector<double> lengthscales{1.0};
  SdofKernelParams sdof{};

  static KernelSpec squared_exponential(double sigma_f, std::vector<double> lengthscales);
  static KernelSpec matern12(double sigma_f, double lengthscale);
  static KernelSpec matern32(double sigma_f, double lengthscale);
  static KernelSpec sdof_derived(const SdofKernelParams& params);

  void validate() const;
  /// Input dimension implied by the hyperparameters, if any.
  std::optional<std::size_t> fixed_dimension() const;
  void check_dimension(std::size_t d) const;
  /// Process variance k(x, x).
  double variance() const;
};

double kernel_eval(const KernelSpec& spec, ConstVecRef x, ConstVecRef x_prime);

/// Covariance between the rows of X and the rows of X_prime.
Eigen::MatrixXd build_gram(const KernelSpec& spec, const Eigen::MatrixXd& X, const Eigen::MatrixXd& X_prime);

/// Symmetric Gram matrix of the rows of X.
Eigen::MatrixXd build_gram(const KernelSpec& spec, const Eigen::MatrixXd& X);

/// One-dimensional spectral density S(omega) of a stationary kernel.
/// Supported for the squared-exponential (single lengthscale) and Matern families.
double spectral_density(const KernelSpec& spec, double omega);

/// Spectral density over d-dimensional frequency. The squared-exponential uses
/// its separable ARD form; the Matern kernels use the isotropic d-dimensional
/// density evaluated at |omega|.
double spectral_density(const KernelSpec& spec, const Eigen::VectorXd& omega);

}  // namespace pigp
