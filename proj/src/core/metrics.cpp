#include "pigp/metrics.hpp"

#include <cmath>
#include <string>

#include "pigp/error.hpp"

namespace pigp {

double population_variance(const Eigen::VectorXd& y) {
  require(y.size() >= 1, ErrorKind::InvalidArgument, "variance: empty vector");
  return (y.array() - y.mean()).square().mean();
}

double nmse(const Eigen::VectorXd& y, const Eigen::VectorXd& f) {
  require(y.size() == f.size(), ErrorKind::InvalidArgument,
          "nmse: length mismatch (" + std::to_string(y.size()) + " vs " + std::to_string(f.size()) + ")");
  require(y.size() >= 2, ErrorKind::InvalidArgument, "nmse: need at least two points");
  require(y.allFinite() && f.allFinite(), ErrorKind::Numerical, "nmse: non-finite values");
  const double var = population_variance(y);
  require(var > 0.0, ErrorKind::InvalidArgument, "nmse: targets have zero variance");
  return 100.0 / (static_cast<double>(y.size()) * var) * (y - f).squaredNorm();
}

}  // namespace pigp
