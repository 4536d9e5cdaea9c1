#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pigp/gp.hpp"
#include "pigp/kernel.hpp"

namespace pigp {

enum class Boundary { Dirichlet, Neumann };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& name);

/// Hyper-rectangle prod_k [c_k - L_k, c_k + L_k] with a homogeneous boundary
/// condition and a per-dimension basis count.
struct DomainSpec {
  std::vector<double> half_widths;
  std::vector<double> center;  // empty means the origin
  Boundary boundary = Boundary::Dirichlet;
  std::vector<int> basis_counts;
  std::optional<int> max_total;  // keep only the lowest-eigenvalue functions

  std::size_t dimension() const { return half_widths.size(); }
  double center_of(std::size_t k) const { return center.empty() ? 0.0 : center[k]; }
  void validate() const;
  bool contains(ConstVecRef x, bool strict) const;
};

/// Laplacian eigenpairs of a domain. Each basis function is a tensor product
/// of one-dimensional sine (Dirichlet) or cosine (Neumann) modes; `indices`
/// stores the mode number per dimension.
struct ReducedRankBasis {
  DomainSpec domain;
  std::vector<std::vector<int>> indices;
  Eigen::VectorXd eigenvalues;       // ascending
  Eigen::VectorXd spectral_weights;  // S(sqrt(lambda)); empty until bound to a kernel

  Eigen::Index size() const { return eigenvalues.size(); }
  /// Evaluate all basis functions at one point.
  Eigen::VectorXd evaluate(ConstVecRef x) const;
  /// n x M design matrix.
  Eigen::MatrixXd design(const Eigen::MatrixXd& X) const;
  /// Per-dimension frequencies sqrt(lambda_{j_k}) of basis function j.
  Eigen::VectorXd frequencies(Eigen::Index j) const;
};

/// One-dimensional eigenfunction of mode j on [-L, L] (centered coordinate).
double eigenfunction_1d(Boundary b, int j, double half_width, double x);
double eigenvalue_1d(int j, double half_width);

ReducedRankBasis eigenpairs(const DomainSpec& domain);

/// Attach spectral weights S(sqrt(lambda_j)) of `spec` to a basis.
ReducedRankBasis bind_kernel(ReducedRankBasis basis, const KernelSpec& spec);

double approx_kernel(const ReducedRankBasis& basis, const KernelSpec& spec, ConstVecRef x, ConstVecRef x_prime);

/// Weight-space posterior of the reduced-rank GP.
class ReducedRankGp {
 public:
  const ReducedRankBasis& basis() const { return basis_; }
  const KernelSpec& kernel() const { return kernel_; }
  double noise_variance() const { return noise_var_; }
  const Eigen::VectorXd& weight_mean() const { return mean_; }
  const Eigen::MatrixXd& weight_covariance() const { return cov_; }
  double log_marginal_likelihood() const { return lml_; }

 private:
  friend ReducedRankGp fit_reduced(const Dataset&, const DomainSpec&, const KernelSpec&, double);

  ReducedRankBasis basis_;
  KernelSpec kernel_;
  double noise_var_ = 0.0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  double lml_ = 0.0;
};

ReducedRankGp fit_reduced(const Dataset& data, const DomainSpec& domain, const KernelSpec& spec, double noise_var);

Prediction predict_reduced(const ReducedRankGp& model, const Eigen::MatrixXd& X_star);

}  // namespace pigp
