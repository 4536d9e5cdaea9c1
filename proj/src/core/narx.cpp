#include "pigp/narx.hpp"

#include <cmath>

#include "pigp/error.hpp"

namespace pigp {

std::string to_string(NarxMode mode) {
  switch (mode) {
    case NarxMode::BlackBox: return "BlackBox";
    case NarxMode::ResidualMean: return "ResidualMean";
    case NarxMode::InputAugmentation: return "InputAugmentation";
  }
  return "?";
}

NarxMode narx_mode_from_string(const std::string& name) {
  if (name == "BlackBox") return NarxMode::BlackBox;
  if (name == "ResidualMean") return NarxMode::ResidualMean;
  if (name == "InputAugmentation") return NarxMode::InputAugmentation;
  fail(ErrorKind::Config, "unknown NARX mode '" + name + "'");
}

void NarxConfig::validate() const {
  require(lags_u >= 0, ErrorKind::InvalidArgument, "narx: exogenous lag count must be >= 0");
  require(lags_y >= 1, ErrorKind::InvalidArgument, "narx: autoregressive lag count must be >= 1");
  if (mode != NarxMode::BlackBox) morison.validate();
}

Eigen::Index NarxConfig::regressor_dimension(Eigen::Index channels) const {
  return (lags_u + 1) * channels + lags_y + (mode == NarxMode::InputAugmentation ? 1 : 0);
}

void SequenceData::validate() const {
  require(u.rows() == y.size(), ErrorKind::Data, "sequence: input and output lengths differ");
  require(u.cols() >= 1, ErrorKind::Data, "sequence: at least one exogenous channel required");
  require(u.allFinite() && y.allFinite(), ErrorKind::Data, "sequence: non-finite entries");
  require(std::isfinite(dt) && dt > 0.0, ErrorKind::Data, "sequence: sample interval must be positive");
  if (time) {
    require(time->size() == y.size(), ErrorKind::Data, "sequence: timestamp count differs from length");
    for (Eigen::Index t = 1; t < time->size(); ++t) {
      const double step = (*time)[t] - (*time)[t - 1];
      require(std::abs(step - dt) <= 1e-6 * dt, ErrorKind::Data,
              "sequence: non-uniform timestamps at index " + std::to_string(t));
    }
  }
}

double morison_on_row(const MorisonParams& params, ConstVecRef row) {
  return morison_force(params, row[0], row[1]);
}

LagMatrix build_lag_matrix(const SequenceData& seq, const NarxConfig& cfg) {
  cfg.validate();
  seq.validate();
  const Eigen::Index T = seq.length();
  const Eigen::Index start = cfg.first_index();
  require(T > start, ErrorKind::Data,
          "narx: series of length " + std::to_string(T) + " too short for lags (" + std::to_string(cfg.lags_u) + ", " +
              std::to_string(cfg.lags_y) + ")");
  const Eigen::Index c = seq.u.cols();
  require(cfg.mode == NarxMode::BlackBox || c >= 2, ErrorKind::Data,
          "narx: Morison modes need (U, dU/dt) exogenous channels");

  const Eigen::Index n = T - start;
  LagMatrix out;
  out.X.resize(n, cfg.regressor_dimension(c));
  out.targets = seq.y.tail(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index t = start + r;
    Eigen::Index col = 0;
    for (Eigen::Index lag = 0; lag <= cfg.lags_u; ++lag)
      for (Eigen::Index ch = 0; ch < c; ++ch) out.X(r, col++) = seq.u(t - lag, ch);
    for (Eigen::Index lag = 1; lag <= cfg.lags_y; ++lag) out.X(r, col++) = seq.y[t - lag];
    if (cfg.mode == NarxMode::InputAugmentation) out.X(r, col++) = morison_force(cfg.morison, seq.u(t, 0), seq.u(t, 1));
  }
  return out;
}

MeanFunctionSpec narx_mean(const NarxConfig& cfg) {
  if (cfg.mode != NarxMode::ResidualMean) return MeanFunctionSpec::zero();
  const MorisonParams p = cfg.morison;
  return MeanFunctionSpec::make_external("morison", [p](ConstVecRef row) { return morison_on_row(p, row); });
}

NarxModel fit_narx(const SequenceData& seq, const NarxConfig& cfg, const KernelSpec& kernel, double noise_var) {
  const LagMatrix lm = build_lag_matrix(seq, cfg);
  Dataset data{lm.X, lm.targets, std::nullopt};
  return NarxModel(cfg, seq.u.cols(), fit_exact(data, kernel, narx_mean(cfg), noise_var));
}

Prediction predict_osa(const NarxModel& model, const SequenceData& seq) {
  require(seq.u.cols() == model.channels(), ErrorKind::InvalidArgument,
          "narx: sequence has " + std::to_string(seq.u.cols()) + " channels, model expects " +
              std::to_string(model.channels()));
  const LagMatrix lm = build_lag_matrix(seq, model.config());
  return predict(model.gp(), lm.X);
}

Eigen::VectorXd simulate_free_run(const NarxModel& model, const Eigen::MatrixXd& u, const Eigen::VectorXd& y_seed) {
  const NarxConfig& cfg = model.config();
  require(y_seed.size() == cfg.lags_y, ErrorKind::InvalidArgument,
          "narx: free run needs " + std::to_string(cfg.lags_y) + " seed outputs, got " + std::to_string(y_seed.size()));
  require(u.cols() == model.channels(), ErrorKind::InvalidArgument, "narx: free-run input channel count mismatch");
  const Eigen::Index T = u.rows();
  require(T > cfg.lags_u, ErrorKind::Data, "narx: free-run input shorter than exogenous lag window");

  // history holds seeds followed by simulated outputs
  std::vector<double> history(y_seed.data(), y_seed.data() + y_seed.size());
  const Eigen::Index c = u.cols();
  const Eigen::Index steps = T - cfg.lags_u;
  Eigen::VectorXd out(steps);
  Eigen::MatrixXd row(1, cfg.regressor_dimension(c));
  for (Eigen::Index s = 0; s < steps; ++s) {
    const Eigen::Index t = cfg.lags_u + s;
    Eigen::Index col = 0;
    for (Eigen::Index lag = 0; lag <= cfg.lags_u; ++lag)
      for (Eigen::Index ch = 0; ch < c; ++ch) row(0, col++) = u(t - lag, ch);
    for (Eigen::Index lag = 1; lag <= cfg.lags_y; ++lag) row(0, col++) = history[history.size() - static_cast<std::size_t>(lag)];
    if (cfg.mode == NarxMode::InputAugmentation) row(0, col++) = morison_force(cfg.morison, u(t, 0), u(t, 1));
    const double m = predict(model.gp(), row).mean[0];
    out[s] = m;
    history.push_back(m);
  }
  return out;
}

double coverage_metric(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test) {
  require(train.rows() > 0 && test.rows() > 0, ErrorKind::InvalidArgument, "coverage: empty set");
  require(train.cols() == test.cols(), ErrorKind::InvalidArgument, "coverage: dimension mismatch");
  const Eigen::RowVectorXd lo = train.colwise().minCoeff();
  const Eigen::RowVectorXd hi = train.colwise().maxCoeff();
  Eigen::Index inside = 0;
  for (Eigen::Index i = 0; i < test.rows(); ++i) {
    if ((test.row(i).array() >= lo.array()).all() && (test.row(i).array() <= hi.array()).all()) ++inside;
  }
  return 100.0 * static_cast<double>(inside) / static_cast<double>(test.rows());
}

double coverage_metric(const Dataset& train, const Dataset& test) { return coverage_metric(train.X, test.X); }

}  // namespace pigp
