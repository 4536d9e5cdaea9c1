#pragma once

#include <algorithm>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "pigp/gp.hpp"
#include "pigp/physics.hpp"

namespace pigp {

enum class NarxMode { BlackBox, ResidualMean, InputAugmentation };

std::string to_string(NarxMode mode);
NarxMode narx_mode_from_string(const std::string& name);

/// Lag structure and grey-box mode of a GP-NARX model. In the Morison modes
/// the exogenous channels are (U, dU/dt) in that order.
struct NarxConfig {
  int lags_u = 4;  // current u_t is always included
  int lags_y = 4;
  NarxMode mode = NarxMode::BlackBox;
  MorisonParams morison{};

  void validate() const;
  int first_index() const { return std::max(lags_u, lags_y); }
  Eigen::Index regressor_dimension(Eigen::Index channels) const;
};

/// Uniformly sampled exogenous channels u (T x c) and target y (T).
struct SequenceData {
  Eigen::MatrixXd u;
  Eigen::VectorXd y;
  double dt = 1.0;
  std::optional<Eigen::VectorXd> time;

  Eigen::Index length() const { return y.size(); }
  void validate() const;
};

struct LagMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd targets;
};

/// Rows [u_t, ..., u_{t-lu}, y_{t-1}, ..., y_{t-ly}] (+ Morison output at t in
/// input-augmentation mode) for t = max(lu, ly) .. T-1.
LagMatrix build_lag_matrix(const SequenceData& seq, const NarxConfig& cfg);

/// Morison prediction evaluated on the current-input columns of a lag row.
double morison_on_row(const MorisonParams& params, ConstVecRef row);

class NarxModel {
 public:
  NarxModel(NarxConfig cfg, Eigen::Index channels, TrainedGp gp)
      : cfg_(cfg), channels_(channels), gp_(std::move(gp)) {}

  const NarxConfig& config() const { return cfg_; }
  Eigen::Index channels() const { return channels_; }
  const TrainedGp& gp() const { return gp_; }

 private:
  NarxConfig cfg_;
  Eigen::Index channels_;
  TrainedGp gp_;
};

/// Mean function a NARX mode imposes on lag rows.
MeanFunctionSpec narx_mean(const NarxConfig& cfg);

NarxModel fit_narx(const SequenceData& seq, const NarxConfig& cfg, const KernelSpec& kernel, double noise_var);

/// One-step-ahead prediction using measured output lags, one entry per row of
/// build_lag_matrix.
Prediction predict_osa(const NarxModel& model, const SequenceData& seq);

/// Mean-feedback simulation. `y_seed` holds the ly outputs preceding the first
/// simulated step, oldest first. Returns T - lu predicted means for
/// t = lu .. T-1.
Eigen::VectorXd simulate_free_run(const NarxModel& model, const Eigen::MatrixXd& u, const Eigen::VectorXd& y_seed);

/// Percentage of test rows whose every coordinate lies inside the training
/// bounding box.
double coverage_metric(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test);
double coverage_metric(const Dataset& train, const Dataset& test);

}  // namespace pigp
