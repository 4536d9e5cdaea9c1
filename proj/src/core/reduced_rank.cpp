#include "pigp/reduced_rank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "pigp/error.hpp"

namespace pigp {

namespace {

// sin(pi a) and cos(pi a) with exact zeros at integer (resp. half-integer) a
double sin_pi(double a) {
  const double r = std::fmod(a, 2.0);
  if (r == 0.0 || std::abs(r) == 1.0) return 0.0;
  return std::sin(std::numbers::pi * r);
}

double cos_pi(double a) {
  const double r = std::fmod(std::abs(a), 2.0);
  if (r == 0.5 || r == 1.5) return 0.0;
  return std::cos(std::numbers::pi * r);
}

}  // namespace

std::string to_string(Boundary b) { return b == Boundary::Dirichlet ? "Dirichlet" : "Neumann"; }

Boundary boundary_from_string(const std::string& name) {
  if (name == "Dirichlet") return Boundary::Dirichlet;
  if (name == "Neumann") return Boundary::Neumann;
  fail(ErrorKind::Config, "unknown boundary condition '" + name + "'");
}

void DomainSpec::validate() const {
  require(!half_widths.empty(), ErrorKind::InvalidArgument, "domain: dimension must be >= 1");
  require(basis_counts.size() == half_widths.size(), ErrorKind::InvalidArgument,
          "domain: need one basis count per dimension");
  require(center.empty() || center.size() == half_widths.size(), ErrorKind::InvalidArgument,
          "domain: center dimension mismatch");
  for (double L : half_widths)
    require(std::isfinite(L) && L > 0.0, ErrorKind::InvalidArgument, "domain: half-widths must be positive");
  for (int m : basis_counts) require(m >= 1, ErrorKind::InvalidArgument, "domain: basis counts must be >= 1");
  if (max_total) require(*max_total >= 1, ErrorKind::InvalidArgument, "domain: total basis cap must be >= 1");
}

bool DomainSpec::contains(ConstVecRef x, bool strict) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) return false;
  for (std::size_t k = 0; k < dimension(); ++k) {
    const double r = std::abs(x[static_cast<Eigen::Index>(k)] - center_of(k));
    if (strict ? !(r < half_widths[k]) : !(r <= half_widths[k])) return false;
  }
  return true;
}

double eigenvalue_1d(int j, double half_width) {
  const double w = std::numbers::pi * j / (2.0 * half_width);
  return w * w;
}

double eigenfunction_1d(Boundary b, int j, double half_width, double x) {
  const double u = (x + half_width) / (2.0 * half_width);
  if (b == Boundary::Dirichlet) return std::sqrt(1.0 / half_width) * sin_pi(j * u);
  if (j == 0) return std::sqrt(0.5 / half_width);
  return std::sqrt(1.0 / half_width) * cos_pi(j * u);
}

ReducedRankBasis eigenpairs(const DomainSpec& domain) {
  domain.validate();
  const std::size_t d = domain.dimension();
  const int first = domain.boundary == Boundary::Dirichlet ? 1 : 0;

  std::vector<std::vector<int>> tuples{{}};
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<std::vector<int>> next;
    next.reserve(tuples.size() * static_cast<std::size_t>(domain.basis_counts[k]));
    for (const auto& t : tuples) {
      for (int j = first; j < first + domain.basis_counts[k]; ++j) {
        auto e = t;
        e.push_back(j);
        next.push_back(std::move(e));
      }
    }
    tuples = std::move(next);
  }

  std::vector<double> lambda(tuples.size(), 0.0);
  for (std::size_t i = 0; i < tuples.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) lambda[i] += eigenvalue_1d(tuples[i][k], domain.half_widths[k]);

  std::vector<std::size_t> order(tuples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lambda[a] < lambda[b]; });
  std::size_t keep = order.size();
  if (domain.max_total) keep = std::min(keep, static_cast<std::size_t>(*domain.max_total));

  ReducedRankBasis basis;
  basis.domain = domain;
  basis.eigenvalues.resize(static_cast<Eigen::Index>(keep));
  for (std::size_t i = 0; i < keep; ++i) {
    basis.indices.push_back(tuples[order[i]]);
    basis.eigenvalues[static_cast<Eigen::Index>(i)] = lambda[order[i]];
  }
  return basis;
}

Eigen::VectorXd ReducedRankBasis::frequencies(Eigen::Index j) const {
  const auto& idx = indices[static_cast<std::size_t>(j)];
  Eigen::VectorXd w(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k)
    w[static_cast<Eigen::Index>(k)] = std::numbers::pi * idx[k] / (2.0 * domain.half_widths[k]);
  return w;
}

Eigen::VectorXd ReducedRankBasis::evaluate(ConstVecRef x) const {
  require(domain.contains(x, false), ErrorKind::InvalidArgument, "reduced-rank: point outside the domain");
  const std::size_t d = domain.dimension();
  Eigen::VectorXd phi(size());
  for (Eigen::Index j = 0; j < size(); ++j) {
    double v = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      v *= eigenfunction_1d(domain.boundary, indices[static_cast<std::size_t>(j)][k], domain.half_widths[k],
                            x[static_cast<Eigen::Index>(k)] - domain.center_of(k));
    }
    phi[j] = v;
  }
  return phi;
}

Eigen::MatrixXd ReducedRankBasis::design(const Eigen::MatrixXd& X) const {
  Eigen::MatrixXd Phi(X.rows(), size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) Phi.row(i) = evaluate(X.row(i).transpose()).transpose();
  return Phi;
}

ReducedRankBasis bind_kernel(ReducedRankBasis basis, const KernelSpec& spec) {
  basis.spectral_weights.resize(basis.size());
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const double s = spectral_density(spec, basis.frequencies(j));
    require(std::isfinite(s) && s >= 0.0, ErrorKind::Numerical, "reduced-rank: invalid spectral weight");
    basis.spectral_weights[j] = s;
  }
  return basis;
}

double approx_kernel(const ReducedRankBasis& basis, const KernelSpec& spec, ConstVecRef x, ConstVecRef x_prime) {
  const ReducedRankBasis bound = basis.spectral_weights.size() == basis.size() ? basis : bind_kernel(basis, spec);
  const Eigen::VectorXd a = bound.evaluate(x);
  const Eigen::VectorXd b = bound.evaluate(x_prime);
  return (a.array() * b.array() * bound.spectral_weights.array()).sum();
}

ReducedRankGp fit_reduced(const Dataset& data, const DomainSpec& domain, const KernelSpec& spec, double noise_var) {
  require(data.size() >= 1, ErrorKind::Data, "reduced-rank: empty dataset");
  data.validate();
  domain.validate();
  require(static_cast<std::size_t>(data.dimension()) == domain.dimension(), ErrorKind::InvalidArgument,
          "reduced-rank: data dimension does not match the domain");
  require(std::isfinite(noise_var) && noise_var >= 0.0, ErrorKind::InvalidArgument,
          "reduced-rank: noise variance must be non-negative");
  for (Eigen::Index i = 0; i < data.size(); ++i)
    require(domain.contains(data.X.row(i).transpose(), true), ErrorKind::InvalidArgument,
            "reduced-rank: training input " + std::to_string(i) + " outside the domain");

  ReducedRankGp gp;
  gp.basis_ = bind_kernel(eigenpairs(domain), spec);
  gp.kernel_ = spec;
  gp.noise_var_ = noise_var;

  const Eigen::VectorXd sqrt_s = gp.basis_.spectral_weights.array().sqrt();
  const Eigen::MatrixXd B = gp.basis_.design(data.X) * sqrt_s.asDiagonal();
  const Eigen::Index M = B.cols();
  const auto n = static_cast<double>(data.size());

  Eigen::MatrixXd A = B.transpose() * B;
  A.diagonal().array() += noise_var;
  const auto chol = cholesky_with_jitter(A, noise_var > 0.0);
  const double eff_noise = noise_var + chol.jitter;
  const auto L = chol.L.triangularView<Eigen::Lower>();
  const auto U = chol.L.transpose().triangularView<Eigen::Upper>();

  const Eigen::VectorXd Bty = B.transpose() * data.y;
  const Eigen::VectorXd z = L.solve(Bty);
  const Eigen::VectorXd w = U.solve(z);
  gp.mean_ = sqrt_s.cwiseProduct(w);

  // cov = eff_noise * D A^{-1} D with D = diag(sqrt_s); W = L^{-1} D
  const Eigen::MatrixXd W = L.solve(Eigen::MatrixXd(sqrt_s.asDiagonal()));
  gp.cov_ = eff_noise * (W.transpose() * W);

  const double quad = (data.y.squaredNorm() - z.squaredNorm()) / eff_noise;
  const double logdet = (n - static_cast<double>(M)) * std::log(eff_noise) + 2.0 * chol.L.diagonal().array().log().sum();
  gp.lml_ = -0.5 * quad - 0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
  return gp;
}

Prediction predict_reduced(const ReducedRankGp& model, const Eigen::MatrixXd& X_star) {
  require(static_cast<std::size_t>(X_star.cols()) == model.basis().domain.dimension(), ErrorKind::InvalidArgument,
          "reduced-rank: test input dimension mismatch");
  const Eigen::MatrixXd Phi = model.basis().design(X_star);
  Prediction out;
  out.mean = Phi * model.weight_mean();
  out.variance = (Phi * model.weight_covariance()).cwiseProduct(Phi).rowwise().sum().cwiseMax(0.0);
  return out;
}

}  // namespace pigp
