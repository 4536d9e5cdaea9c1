#include "pigp/kernel.hpp"

#include <cmath>
#include <numbers>

#include "pigp/error.hpp"

namespace pigp {

namespace {

template <class A, class B>
double squared_scaled_distance(const KernelSpec& spec, const A& x, const B& xp) {
  const auto& ls = spec.lengthscales;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double l = ls.size() == 1 ? ls[0] : ls[static_cast<std::size_t>(k)];
    const double r = (x[k] - xp[k]) / l;
    acc += r * r;
  }
  return acc;
}

double matern_nu(KernelFamily f) { return f == KernelFamily::Matern12 ? 0.5 : 1.5; }

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "SquaredExponential";
    case KernelFamily::Matern12: return "Matern12";
    case KernelFamily::Matern32: return "Matern32";
    case KernelFamily::SdofDerived: return "SdofDerived";
  }
  return "?";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "SquaredExponential" || name == "SE") return KernelFamily::SquaredExponential;
  if (name == "Matern12") return KernelFamily::Matern12;
  if (name == "Matern32") return KernelFamily::Matern32;
  if (name == "SdofDerived" || name == "SDOF") return KernelFamily::SdofDerived;
  fail(ErrorKind::Config, "unknown kernel family '" + name + "'");
}

KernelSpec KernelSpec::squared_exponential(double sigma_f, std::vector<double> lengthscales) {
  KernelSpec s;
  s.family = KernelFamily::SquaredExponential;
  s.sigma_f = sigma_f;
  s.lengthscales = std::move(lengthscales);
  s.validate();
  return s;
}

KernelSpec KernelSpec::matern12(double sigma_f, double lengthscale) {
  KernelSpec s;
  s.family = KernelFamily::Matern12;
  s.sigma_f = sigma_f;
  s.lengthscales = {lengthscale};
  s.validate();
  return s;
}

KernelSpec KernelSpec::matern32(double sigma_f, double lengthscale) {
  KernelSpec s = matern12(sigma_f, lengthscale);
  s.family = KernelFamily::Matern32;
  return s;
}

KernelSpec KernelSpec::sdof_derived(const SdofKernelParams& params) {
  KernelSpec s;
  s.family = KernelFamily::SdofDerived;
  s.sdof = params;
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  if (family == KernelFamily::SdofDerived) {
    sdof.validate();
    return;
  }
  require(std::isfinite(sigma_f) && sigma_f > 0.0, ErrorKind::InvalidArgument,
          "kernel: signal scale must be positive");
  require(!lengthscales.empty(), ErrorKind::InvalidArgument, "kernel: at least one lengthscale required");
  require(family == KernelFamily::SquaredExponential || lengthscales.size() == 1, ErrorKind::InvalidArgument,
          "kernel: " + to_string(family) + " is isotropic and takes a single lengthscale");
  for (double l : lengthscales)
    require(std::isfinite(l) && l > 0.0, ErrorKind::InvalidArgument, "kernel: lengthscales must be positive");
}

std::optional<std::size_t> KernelSpec::fixed_dimension() const {
  if (family == KernelFamily::SdofDerived) return 1;
  if (family == KernelFamily::SquaredExponential && lengthscales.size() > 1) return lengthscales.size();
  return std::nullopt;
}

void KernelSpec::check_dimension(std::size_t d) const {
  require(d >= 1, ErrorKind::InvalidArgument, "kernel: inputs must have at least one dimension");
  if (auto fixed = fixed_dimension()) {
    require(*fixed == d, ErrorKind::InvalidArgument,
            "kernel: " + to_string(family) + " expects " + std::to_string(*fixed) + "-dimensional inputs, got " +
                std::to_string(d));
  }
}

double KernelSpec::variance() const {
  if (family == KernelFamily::SdofDerived) return sdof.variance();
  return sigma_f * sigma_f;
}

namespace {

template <class A, class B>
double eval_unchecked(const KernelSpec& spec, const A& x, const B& x_prime) {
  const double s2 = spec.sigma_f * spec.sigma_f;
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return s2 * std::exp(-0.5 * squared_scaled_distance(spec, x, x_prime));
    case KernelFamily::Matern12:
      return s2 * std::exp(-(x - x_prime).norm() / spec.lengthscales[0]);
    case KernelFamily::Matern32: {
      const double r = std::sqrt(3.0) * (x - x_prime).norm() / spec.lengthscales[0];
      return s2 * (1.0 + r) * std::exp(-r);
    }
    case KernelFamily::SdofDerived:
      return sdof_kernel_eval(spec.sdof, x[0] - x_prime[0]);
  }
  fail(ErrorKind::InvalidArgument, "kernel: unknown family");
}

}  // namespace

double kernel_eval(const KernelSpec& spec, ConstVecRef x, ConstVecRef x_prime) {
  spec.validate();
  require(x.size() == x_prime.size(), ErrorKind::InvalidArgument, "kernel: argument dimensions differ");
  spec.check_dimension(static_cast<std::size_t>(x.size()));
  return eval_unchecked(spec, x, x_prime);
}

Eigen::MatrixXd build_gram(const KernelSpec& spec, const Eigen::MatrixXd& X, const Eigen::MatrixXd& X_prime) {
  require(X.cols() == X_prime.cols(), ErrorKind::InvalidArgument, "gram: input dimensions differ");
  spec.validate();
  spec.check_dimension(static_cast<std::size_t>(X.cols()));
  Eigen::MatrixXd K(X.rows(), X_prime.rows());
  for (Eigen::Index j = 0; j < X_prime.rows(); ++j)
    for (Eigen::Index i = 0; i < X.rows(); ++i) K(i, j) = eval_unchecked(spec, X.row(i), X_prime.row(j));
  return K;
}

Eigen::MatrixXd build_gram(const KernelSpec& spec, const Eigen::MatrixXd& X) {
  spec.validate();
  spec.check_dimension(static_cast<std::size_t>(X.cols()));
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      K(i, j) = eval_unchecked(spec, X.row(i), X.row(j));
      K(j, i) = K(i, j);
    }
  }
  return K;
}

double spectral_density(const KernelSpec& spec, double omega) {
  return spectral_density(spec, Eigen::VectorXd::Constant(1, omega));
}

double spectral_density(const KernelSpec& spec, const Eigen::VectorXd& omega) {
  spec.validate();
  const auto d = static_cast<double>(omega.size());
  require(omega.size() >= 1, ErrorKind::InvalidArgument, "spectral density: empty frequency vector");
  const double s2 = spec.sigma_f * spec.sigma_f;
  switch (spec.family) {
    case KernelFamily::SquaredExponential: {
      require(spec.lengthscales.size() == 1 || spec.lengthscales.size() == static_cast<std::size_t>(omega.size()),
              ErrorKind::InvalidArgument, "spectral density: lengthscale count does not match frequency dimension");
      double s = s2;
      for (Eigen::Index k = 0; k < omega.size(); ++k) {
        const double l = spec.lengthscales.size() == 1 ? spec.lengthscales[0] : spec.lengthscales[static_cast<std::size_t>(k)];
        s *= std::sqrt(2.0 * std::numbers::pi * l * l) * std::exp(-0.5 * omega[k] * omega[k] * l * l);
      }
      return s;
    }
    case KernelFamily::Matern12:
    case KernelFamily::Matern32: {
      const double nu = matern_nu(spec.family);
      const double lambda = std::sqrt(2.0 * nu) / spec.lengthscales[0];
      const double w2 = omega.squaredNorm();
      const double log_c = d * std::log(2.0) + 0.5 * d * std::log(std::numbers::pi) + std::lgamma(nu + 0.5 * d) -
                           std::lgamma(nu) + 2.0 * nu * std::log(lambda);
      return s2 * std::exp(log_c - (nu + 0.5 * d) * std::log(lambda * lambda + w2));
    }
    case KernelFamily::SdofDerived:
      break;
  }
  fail(ErrorKind::InvalidArgument, "spectral density: not available for " + to_string(spec.family));
}

}  // namespace pigp
