#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pigp {

/// Box constraint for one search parameter, in natural units. Log-scaled
/// parameters are searched uniformly in log space and must have lower > 0.
struct ParamBound {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  bool log_scale = false;
};

struct PsoConfig {
  int particles = 30;
  int iterations = 200;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  std::uint64_t seed = 1;
  std::vector<ParamBound> bounds;

  void validate() const;
};

struct PsoResult {
  Eigen::VectorXd best;       // natural units
  double best_value = 0.0;
  std::vector<double> trace;  // global best after initialization and after each iteration
  long evaluations = 0;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Global-best particle swarm minimization inside a box. Non-finite
/// objective values count as +inf. Deterministic for a fixed seed.
PsoResult pso_minimize(const Objective& objective, const PsoConfig& cfg);

}  // namespace pigp
