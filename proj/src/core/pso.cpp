#include "pigp/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pigp/error.hpp"

namespace pigp {

void PsoConfig::validate() const {
  require(particles >= 1 && iterations >= 1, ErrorKind::InvalidArgument, "pso: particle and iteration counts must be >= 1");
  require(!bounds.empty(), ErrorKind::InvalidArgument, "pso: no search parameters");
  for (const auto& b : bounds) {
    require(std::isfinite(b.lower) && std::isfinite(b.upper) && b.lower < b.upper, ErrorKind::InvalidArgument,
            "pso: bound '" + b.name + "' requires lower < upper");
    require(!b.log_scale || b.lower > 0.0, ErrorKind::InvalidArgument,
            "pso: log-scaled bound '" + b.name + "' must be positive");
  }
}

PsoResult pso_minimize(const Objective& objective, const PsoConfig& cfg) {
  cfg.validate();
  const auto dim = static_cast<Eigen::Index>(cfg.bounds.size());
  const int np = cfg.particles;
  constexpr double inf = std::numeric_limits<double>::infinity();

  // search space: natural units or log units per parameter
  Eigen::VectorXd lo(dim), hi(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto& b = cfg.bounds[static_cast<std::size_t>(k)];
    lo[k] = b.log_scale ? std::log(b.lower) : b.lower;
    hi[k] = b.log_scale ? std::log(b.upper) : b.upper;
  }
  const Eigen::VectorXd vmax = 0.5 * (hi - lo);

  auto to_natural = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd x(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const auto& b = cfg.bounds[static_cast<std::size_t>(k)];
      x[k] = b.log_scale ? std::clamp(std::exp(s[k]), b.lower, b.upper) : s[k];
    }
    return x;
  };

  PsoResult result;
  auto evaluate = [&](const Eigen::VectorXd& s) {
    ++result.evaluations;
    const double v = objective(to_natural(s));
    return std::isfinite(v) ? v : inf;
  };

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Eigen::VectorXd> pos(static_cast<std::size_t>(np)), vel(pos.size()), pbest(pos.size());
  std::vector<double> pbest_val(pos.size(), inf);
  Eigen::VectorXd gbest = 0.5 * (lo + hi);
  double gbest_val = inf;

  for (std::size_t i = 0; i < pos.size(); ++i) {
    pos[i].resize(dim);
    vel[i].resize(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      pos[i][k] = lo[k] + unit(rng) * (hi[k] - lo[k]);
      vel[i][k] = (2.0 * unit(rng) - 1.0) * vmax[k] * 0.5;
    }
  }
  for (std::size_t i = 0; i < pos.size(); ++i) {
    pbest[i] = pos[i];
    pbest_val[i] = evaluate(pos[i]);
    if (pbest_val[i] < gbest_val) {
      gbest_val = pbest_val[i];
      gbest = pbest[i];
    }
  }
  result.trace.push_back(gbest_val);

  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        double v = cfg.inertia * vel[i][k] + cfg.cognitive * r1 * (pbest[i][k] - pos[i][k]) +
                   cfg.social * r2 * (gbest[k] - pos[i][k]);
        v = std::clamp(v, -vmax[k], vmax[k]);
        double p = pos[i][k] + v;
        if (p < lo[k] || p > hi[k]) {
          p = std::clamp(p, lo[k], hi[k]);
          v = 0.0;
        }
        vel[i][k] = v;
        pos[i][k] = p;
      }
    }
    // objective evaluations first, then an index-ordered reduction
    std::vector<double> values(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) values[i] = evaluate(pos[i]);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (values[i] < pbest_val[i]) {
        pbest_val[i] = values[i];
        pbest[i] = pos[i];
      }
      if (values[i] < gbest_val) {
        gbest_val = values[i];
        gbest = pos[i];
      }
    }
    result.trace.push_back(gbest_val);
  }

  result.best = to_natural(gbest);
  result.best_value = gbest_val;
  return result;
}

}  // namespace pigp
