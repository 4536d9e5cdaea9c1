#pragma once

#include <Eigen/Core>

namespace pigp {

/// Normalized mean-squared error in percent, 100 / (n var(y)) sum (y - f)^2,
/// with var(y) the population variance of the targets.
double nmse(const Eigen::VectorXd& y, const Eigen::VectorXd& f);

double population_variance(const Eigen::VectorXd& y);

}  // namespace pigp
