#include "pigp/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>

#include <Eigen/QR>
#include <json.hpp>

#include "pigp/error.hpp"
#include "pigp/gp.hpp"
#include "pigp/metrics.hpp"

namespace pigp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Loaded {
  Table table;
  std::vector<double> channel_noise;  // mdof_chain only
};

std::string channel_name(const ObservationChannel& ch) { return to_string(ch.quantity) + "_" + std::to_string(ch.dof); }

Forcing resolve_forcing(const ForcingSpec& f, Eigen::Index steps, double dt, std::uint64_t seed) {
  switch (f.type) {
    case ForcingSpec::Type::WhiteNoise: return Forcing::white_noise(f.sigma);
    case ForcingSpec::Type::BandLimited:
      return Forcing::sampled(band_limited_series(steps, dt, f.f_lo, f.f_hi, f.components, f.sigma, seed));
    case ForcingSpec::Type::Zero: break;
  }
  return Forcing::sampled(Eigen::VectorXd::Zero(steps));
}

Loaded generate_data(const GeneratorSpec& g) {
  Loaded out;
  Table& t = out.table;
  switch (g.type) {
    case GeneratorSpec::Type::Sdof: {
      SdofSimSpec s = g.sdof;
      s.seed = g.seed;
      s.forcing = resolve_forcing(g.forcing, s.steps, s.dt, g.seed);
      const SequenceData seq = simulate_sdof(s);
      t.add("time", *seq.time);
      t.add("force", seq.u.col(0));
      t.add("displacement", seq.y);
      break;
    }
    case GeneratorSpec::Type::MdofChain: {
      ChainSimSpec c = g.chain;
      c.seed = g.seed;
      c.forcing = resolve_forcing(g.forcing, c.steps, c.dt, g.seed);
      const ChainSimResult r = simulate_mdof_chain(c);
      t.add("time", r.response.time);
      t.add("force", r.force);
      for (std::size_t j = 0; j < c.observed.size(); ++j)
        t.add(channel_name(c.observed[j]), r.observations.col(static_cast<Eigen::Index>(j)));
      out.channel_noise = r.noise_variances;
      break;
    }
    case GeneratorSpec::Type::Trend: {
      TrendSpec s = g.trend;
      s.seed = g.seed;
      const TrendSeries series = generate_trend_series(s);
      t.add("time", *series.data.time);
      t.add("temperature", series.data.X.col(0));
      t.add("hour", series.data.X.col(1));
      t.add("deflection", series.data.y);
      t.train_end = series.train_end;
      break;
    }
    case GeneratorSpec::Type::Morison: {
      MorisonTaskSpec s = g.morison;
      s.seed = g.seed;
      const SequenceData seq = generate_morison_series(s);
      t.add("time", *seq.time);
      t.add("velocity", seq.u.col(0));
      t.add("acceleration", seq.u.col(1));
      t.add("load", seq.y);
      break;
    }
    case GeneratorSpec::Type::BoundedField: {
      FieldSpec s = g.field.field;
      s.seed = g.seed;
      const FieldSample field = generate_bounded_field(s);
      const Eigen::MatrixXd train = interior_grid(field.domain, g.field.train_per_dim);
      const Eigen::MatrixXd test = interior_grid(field.domain, g.field.test_per_dim);
      Eigen::MatrixXd X(train.rows() + test.rows(), train.cols());
      X << train, test;
      std::mt19937_64 rng(g.seed ^ 0x5bd1e995ULL);
      std::normal_distribution<double> normal(0.0, 1.0);
      Eigen::VectorXd y(X.rows());
      for (Eigen::Index i = 0; i < X.rows(); ++i) y[i] = field.value(X.row(i).transpose()) + s.noise * normal(rng);
      for (Eigen::Index k = 0; k < X.cols(); ++k) t.add("x" + std::to_string(k), X.col(k));
      t.add("value", y);
      t.train_end = train.rows();
      break;
    }
  }
  return out;
}

Loaded load_source(const DataSource& s) {
  if (s.generator) return generate_data(*s.generator);
  return {read_csv(*s.csv), {}};
}

struct GeneratorDefaults {
  std::vector<std::string> inputs;
  std::string target;
};

GeneratorDefaults defaults_for(const GeneratorSpec& g) {
  switch (g.type) {
    case GeneratorSpec::Type::Sdof: return {{"time"}, "displacement"};
    case GeneratorSpec::Type::MdofChain: return {{}, "force"};
    case GeneratorSpec::Type::Trend: return {{"temperature", "hour"}, "deflection"};
    case GeneratorSpec::Type::Morison: return {{"velocity", "acceleration"}, "load"};
    case GeneratorSpec::Type::BoundedField: {
      std::vector<std::string> in;
      for (std::size_t k = 0; k < g.field.field.half_widths.size(); ++k) in.push_back("x" + std::to_string(k));
      return {in, "value"};
    }
  }
  return {};
}

struct Split {
  Table train;
  Table test;
  std::vector<Eigen::Index> test_index;  // row numbers within the test source
  bool contiguous = true;
};

std::vector<Eigen::Index> range(Eigen::Index a, Eigen::Index b) {
  std::vector<Eigen::Index> r;
  for (Eigen::Index i = a; i < b; ++i) r.push_back(i);
  return r;
}

Split split_table(const SplitSpec& spec, const Table& table) {
  const Eigen::Index n = table.rows();
  std::vector<Eigen::Index> train, test;
  bool contiguous = true;
  switch (spec.type) {
    case SplitSpec::Type::Natural:
      if (table.train_end) {
        train = range(0, *table.train_end);
        test = range(*table.train_end, n);
      } else {
        train = test = range(0, n);
      }
      break;
    case SplitSpec::Type::Stride:
      contiguous = false;
      for (Eigen::Index i = 0; i < n; ++i) (i % spec.stride == spec.offset ? train : test).push_back(i);
      break;
    case SplitSpec::Type::Fraction: {
      const auto cut = static_cast<Eigen::Index>(std::floor(spec.fraction * static_cast<double>(n)));
      train = range(0, cut);
      test = range(cut, n);
      break;
    }
    case SplitSpec::Type::Index:
      require(spec.index >= 1 && spec.index < n, ErrorKind::Data,
              "split index " + std::to_string(spec.index) + " outside 1.." + std::to_string(n - 1));
      train = range(0, spec.index);
      test = range(spec.index, n);
      break;
    case SplitSpec::Type::All: train = test = range(0, n); break;
  }
  require(!train.empty() && !test.empty(), ErrorKind::Data, "split leaves an empty training or test set");
  return {table.rows_subset(train), table.rows_subset(test), test, contiguous};
}

Eigen::VectorXd column_std(const Eigen::MatrixXd& X) {
  Eigen::VectorXd s(X.cols());
  for (Eigen::Index k = 0; k < X.cols(); ++k) {
    const double v = std::sqrt(population_variance(X.col(k)));
    s[k] = v > 0.0 && std::isfinite(v) ? v : 1.0;
  }
  return s;
}

// Kernel actually used for inputs whose columns have the given scale.
KernelConfig effective_kernel(KernelConfig k, const Eigen::VectorXd& scale) {
  if (!k.standardize) return k;
  if (k.lengthscales.size() == 1) k.lengthscales.assign(static_cast<std::size_t>(scale.size()), k.lengthscales[0]);
  require(k.lengthscales.size() == static_cast<std::size_t>(scale.size()), ErrorKind::Config,
          "model.kernel.lengthscales: expected 1 or " + std::to_string(scale.size()) + " entries");
  for (std::size_t j = 0; j < k.lengthscales.size(); ++j) k.lengthscales[j] *= scale[static_cast<Eigen::Index>(j)];
  k.standardize = false;
  return k;
}

bool is_gp_param(const std::string& name) {
  return name == "sigma_f" || name == "lengthscale" || name == "noise_variance" || name == "zeta" ||
         name == "omega_n" || name == "sigma2" || name.rfind("lengthscale_", 0) == 0;
}

void apply_param(const std::string& name, double v, ModelSpec& m) {
  if (name == "sigma_f") {
    m.kernel.sigma_f = v;
  } else if (name == "lengthscale") {
    for (double& l : m.kernel.lengthscales) l = v;
  } else if (name.rfind("lengthscale_", 0) == 0) {
    const auto k = static_cast<std::size_t>(std::stoul(name.substr(12)));
    require(k < m.kernel.lengthscales.size(), ErrorKind::Config, "optimizer: no lengthscale index " + name.substr(12));
    m.kernel.lengthscales[k] = v;
  } else if (name == "noise_variance") {
    m.noise_variance = v;
  } else if (name == "zeta") {
    m.kernel.zeta = v;
  } else if (name == "omega_n") {
    m.kernel.omega_n = v;
  } else if (name == "sigma2") {
    m.kernel.sigma2 = v;
  } else if (name == "force_sigma") {
    m.force_prior.sigma = v;
  } else if (name == "force_lengthscale") {
    m.force_prior.lengthscale = v;
  } else {
    fail(ErrorKind::Config, "optimizer: unknown parameter '" + name + "'");
  }
}

void check_bound_names(const ExperimentConfig& cfg) {
  for (const auto& b : cfg.optimizer.pso.bounds) {
    const bool ok = cfg.task == Task::LatentForce ? (b.name == "force_sigma" || b.name == "force_lengthscale")
                                                  : is_gp_param(b.name);
    require(ok, ErrorKind::Config, "optimizer: parameter '" + b.name + "' does not apply to task " + to_string(cfg.task));
    if (b.name.rfind("lengthscale_", 0) == 0) {
      const std::string idx = b.name.substr(12);
      require(!idx.empty() && idx.find_first_not_of("0123456789") == std::string::npos, ErrorKind::Config,
              "optimizer: malformed parameter name '" + b.name + "'");
      require(std::stoul(idx) < cfg.model.kernel.lengthscales.size(), ErrorKind::Config,
              "optimizer: '" + b.name + "' needs model.kernel.lengthscales with more entries");
    }
  }
}

struct Search {
  std::optional<PsoResult> result;
  json report() const {
    if (!result) return nullptr;
    return {{"best_value", result->best_value}, {"evaluations", result->evaluations}, {"trace", result->trace}};
  }
};

// Minimize `objective(model)` over the configured bounds and write the optimum into `model`.
template <class F>
Search optimize(const ExperimentConfig& cfg, ModelSpec& model, F&& objective) {
  Search s;
  if (!cfg.optimizer.enabled || cfg.optimizer.pso.bounds.empty()) return s;
  const auto& bounds = cfg.optimizer.pso.bounds;
  auto wrapped = [&](const Eigen::VectorXd& v) {
    ModelSpec m = model;
    for (std::size_t i = 0; i < bounds.size(); ++i) apply_param(bounds[i].name, v[static_cast<Eigen::Index>(i)], m);
    try {
      return objective(m);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  s.result = pso_minimize(wrapped, cfg.optimizer.pso);
  require(std::isfinite(s.result->best_value), ErrorKind::Numerical,
          "optimizer found no finite objective value inside the bounds");
  for (std::size_t i = 0; i < bounds.size(); ++i)
    apply_param(bounds[i].name, s.result->best[static_cast<Eigen::Index>(i)], model);
  return s;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  require(A.rows() >= A.cols(), ErrorKind::Data, "too few training rows for a least-squares mean fit");
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  require(qr.rank() == A.cols(), ErrorKind::Data, "mean fit: design matrix is rank deficient");
  return qr.solve(b);
}

// Fill fitted coefficients into `mean` and return the evaluable mean.
MeanFunctionSpec build_mean(MeanConfig& mean, const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const auto d = static_cast<std::size_t>(X.cols());
  switch (mean.form) {
    case MeanConfig::Form::Zero: return MeanFunctionSpec::zero();
    case MeanConfig::Form::Linear: {
      if (mean.fit) {
        Eigen::MatrixXd A(X.rows(), X.cols() + 1);
        A << Eigen::VectorXd::Ones(X.rows()), X;
        const Eigen::VectorXd c = least_squares(A, y);
        mean.theta0 = c[0];
        mean.theta.assign(c.data() + 1, c.data() + c.size());
        mean.fit = false;
      }
      require(mean.theta.size() == d, ErrorKind::Config,
              "model.mean.theta: expected " + std::to_string(d) + " coefficients");
      return MeanFunctionSpec::linear(mean.theta0, mean.theta);
    }
    case MeanConfig::Form::Morison: {
      require(d >= 2, ErrorKind::Config, "model.mean: the morison mean needs inputs (velocity, acceleration)");
      if (mean.fit) {
        Eigen::MatrixXd A(X.rows(), 2);
        A.col(0) = X.col(0).array() * X.col(0).array().abs();
        A.col(1) = X.col(1);
        const Eigen::VectorXd c = least_squares(A, y);
        mean.drag = c[0];
        mean.inertia = c[1];
        mean.fit = false;
      }
      const MorisonParams p{mean.drag, mean.inertia};
      return MeanFunctionSpec::make_external("morison", [p](ConstVecRef x) { return morison_force(p, x[0], x[1]); });
    }
  }
  return MeanFunctionSpec::zero();
}

json kernel_json(const KernelConfig& k) {
  if (k.family == KernelFamily::SdofDerived)
    return {{"family", to_string(k.family)}, {"zeta", k.zeta}, {"omega_n", k.omega_n}, {"sigma2", k.sigma2}};
  return {{"family", to_string(k.family)}, {"sigma_f", k.sigma_f}, {"lengthscales", k.lengthscales}};
}

double optional_nmse(const Eigen::VectorXd& truth, const Eigen::VectorXd& mean) {
  if (!truth.allFinite()) return kNaN;
  return nmse(truth, mean);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Outcome {
  Table predictions;  // index, truth, mean, variance
  double nmse_percent = kNaN;
  double lml = kNaN;
  std::optional<double> coverage;
  json extra = json::object();
  ModelSpec fitted;  // final hyperparameters and mean coefficients
  Table train_table;
  bool saveable = true;
};

Table prediction_table(const std::vector<Eigen::Index>& index, const Eigen::VectorXd& truth, const Eigen::VectorXd& mean,
                       const Eigen::VectorXd& variance) {
  Table t;
  Eigen::VectorXd idx(static_cast<Eigen::Index>(index.size()));
  for (std::size_t i = 0; i < index.size(); ++i) idx[static_cast<Eigen::Index>(i)] = static_cast<double>(index[i]);
  t.add("index", idx);
  t.add("truth", truth);
  t.add("mean", mean);
  t.add("variance", variance);
  return t;
}

Eigen::VectorXd target_or_nan(const Table& t, const std::string& target) {
  return t.has(target) ? t.column(target) : Eigen::VectorXd::Constant(t.rows(), kNaN);
}

std::optional<Eigen::VectorXd> time_of(const Table& t) {
  if (!t.has("time")) return std::nullopt;
  return t.column("time");
}

Outcome run_exact(const ExperimentConfig& cfg, const Split& split) {
  Outcome out;
  ModelSpec model = cfg.model;
  const Eigen::MatrixXd Xtr = split.train.columns(model.inputs);
  const Eigen::VectorXd ytr = split.train.column(model.target);
  const Dataset train{Xtr, ytr, std::nullopt};
  train.validate();
  const MeanFunctionSpec mean = build_mean(model.mean, Xtr, ytr);
  const Eigen::VectorXd scale = column_std(Xtr);

  auto fit = [&](const ModelSpec& m) {
    return fit_exact(train, effective_kernel(m.kernel, scale).to_spec(), mean, m.noise_variance);
  };
  const Search search = optimize(cfg, model, [&](const ModelSpec& m) { return -fit(m).log_marginal_likelihood(); });
  model.kernel = effective_kernel(model.kernel, scale);
  const TrainedGp gp = fit(model);

  const Eigen::MatrixXd Xte = split.test.columns(model.inputs);
  require(Xte.allFinite(), ErrorKind::Data, "test inputs contain non-finite values");
  const Prediction p = predict(gp, Xte);
  const Eigen::VectorXd truth = target_or_nan(split.test, model.target);

  out.predictions = prediction_table(split.test_index, truth, p.mean, p.variance);
  out.nmse_percent = optional_nmse(truth, p.mean);
  out.lml = gp.log_marginal_likelihood();
  out.coverage = coverage_metric(Xtr, Xte);
  out.extra["optimizer"] = search.report();
  out.extra["jitter"] = gp.jitter();
  out.fitted = model;
  return out;
}

Outcome run_reduced(const ExperimentConfig& cfg, const Split& split) {
  Outcome out;
  ModelSpec model = cfg.model;
  require(model.domain.has_value(), ErrorKind::Config, "model.domain: required for ReducedRank");
  const DomainSpec& domain = *model.domain;
  const Eigen::MatrixXd Xtr = split.train.columns(model.inputs);
  const Eigen::VectorXd ytr = split.train.column(model.target);
  const Dataset train{Xtr, ytr, std::nullopt};
  train.validate();
  require(static_cast<std::size_t>(Xtr.cols()) == domain.dimension(), ErrorKind::Config,
          "model.domain: dimension differs from the number of inputs");
  for (Eigen::Index i = 0; i < Xtr.rows(); ++i)
    require(domain.contains(Xtr.row(i).transpose(), true), ErrorKind::Data,
            "training row " + std::to_string(i) + " lies outside the open domain");
  require(model.mean.form == MeanConfig::Form::Zero, ErrorKind::Config, "model.mean: ReducedRank supports the zero mean");
  const Eigen::VectorXd scale = column_std(Xtr);

  auto fit = [&](const ModelSpec& m) {
    return fit_reduced(train, domain, effective_kernel(m.kernel, scale).to_spec(), m.noise_variance);
  };
  const ModelSpec initial = model;
  const Search search = optimize(cfg, model, [&](const ModelSpec& m) { return -fit(m).log_marginal_likelihood(); });
  model.kernel = effective_kernel(model.kernel, scale);
  const ReducedRankGp rr = fit(model);

  const Eigen::MatrixXd Xte = split.test.columns(model.inputs);
  for (Eigen::Index i = 0; i < Xte.rows(); ++i)
    require(domain.contains(Xte.row(i).transpose(), false), ErrorKind::Data,
            "test row " + std::to_string(i) + " lies outside the domain");
  const Prediction p = predict_reduced(rr, Xte);
  const Eigen::VectorXd truth = target_or_nan(split.test, model.target);

  out.predictions = prediction_table(split.test_index, truth, p.mean, p.variance);
  out.nmse_percent = optional_nmse(truth, p.mean);
  out.lml = rr.log_marginal_likelihood();
  out.coverage = coverage_metric(Xtr, Xte);
  out.extra["optimizer"] = search.report();
  out.extra["basis_size"] = rr.basis().size();

  if (model.compare_full) {
    ModelSpec full = initial;
    auto fit_full = [&](const ModelSpec& m) {
      return fit_exact(train, effective_kernel(m.kernel, scale).to_spec(), MeanFunctionSpec::zero(), m.noise_variance);
    };
    const Search fs = optimize(cfg, full, [&](const ModelSpec& m) { return -fit_full(m).log_marginal_likelihood(); });
    full.kernel = effective_kernel(full.kernel, scale);
    const TrainedGp gp = fit_full(full);
    const Prediction pf = predict(gp, Xte);
    out.extra["full_gp"] = {{"nmse_percent", number_or_null(optional_nmse(truth, pf.mean))},
                            {"log_marginal_likelihood", gp.log_marginal_likelihood()},
                            {"kernel", kernel_json(full.kernel)},
                            {"noise_variance", full.noise_variance},
                            {"optimizer", fs.report()}};
  }
  out.fitted = model;
  return out;
}

double uniform_dt(const Eigen::VectorXd& time) {
  require(time.size() >= 2, ErrorKind::Data, "time column needs at least two rows");
  const double dt = (time[time.size() - 1] - time[0]) / static_cast<double>(time.size() - 1);
  require(std::isfinite(dt) && dt > 0.0, ErrorKind::Data, "time column must increase");
  for (Eigen::Index t = 1; t < time.size(); ++t)
    require(std::abs(time[t] - time[t - 1] - dt) <= 1e-6 * dt, ErrorKind::Data,
            "time column is not uniformly sampled at row " + std::to_string(t));
  return dt;
}

SequenceData sequence_of(const Table& t, const ModelSpec& m, bool need_target) {
  SequenceData s;
  s.u = t.columns(m.inputs);
  s.y = need_target ? t.column(m.target) : target_or_nan(t, m.target);
  const auto time = time_of(t);
  s.dt = time ? uniform_dt(*time) : 1.0;
  s.time = time;
  return s;
}

Outcome run_narx(const ExperimentConfig& cfg, const Split& split) {
  Outcome out;
  require(split.contiguous, ErrorKind::Config, "split: Narx needs contiguous training and test blocks");
  ModelSpec model = cfg.model;
  require(model.mean.form != MeanConfig::Form::Linear, ErrorKind::Config,
          "model.mean: Narx uses the zero or morison mean through narx_mode");
  SequenceData train = sequence_of(split.train, model, true);
  train.validate();

  NarxConfig ncfg{model.lags_u, model.lags_y, model.narx_mode, {model.mean.drag, model.mean.inertia}};
  if (model.narx_mode != NarxMode::BlackBox) {
    require(train.u.cols() >= 2, ErrorKind::Config, "model.inputs: Morison modes need (velocity, acceleration)");
    MeanConfig m = model.mean;
    m.form = MeanConfig::Form::Morison;
    build_mean(m, train.u, train.y);
    model.mean.drag = m.drag;
    model.mean.inertia = m.inertia;
    model.mean.fit = false;
    ncfg.morison = {m.drag, m.inertia};
  }
  const LagMatrix lag = build_lag_matrix(train, ncfg);
  const Eigen::VectorXd scale = column_std(lag.X);

  auto fit = [&](const ModelSpec& m) {
    return fit_narx(train, ncfg, effective_kernel(m.kernel, scale).to_spec(), m.noise_variance);
  };
  const Search search = optimize(cfg, model, [&](const ModelSpec& m) { return -fit(m).gp().log_marginal_likelihood(); });
  model.kernel = effective_kernel(model.kernel, scale);
  const NarxModel narx = fit(model);

  SequenceData test = sequence_of(split.test, model, true);
  test.validate();
  const Eigen::Index T = test.length();
  const Eigen::Index s0 = ncfg.first_index();
  require(T > s0, ErrorKind::Data, "test sequence shorter than the lag window");
  const Eigen::MatrixXd u_run = test.u.bottomRows(T - (s0 - ncfg.lags_u));
  const Eigen::VectorXd seed = test.y.segment(s0 - ncfg.lags_y, ncfg.lags_y);
  const Eigen::VectorXd free = simulate_free_run(narx, u_run, seed);

  // Predictive variance at the free-run regressors.
  SequenceData replay = test;
  replay.y.tail(T - s0) = free;
  const Prediction at_free = predict_osa(narx, replay);
  const Prediction osa = predict_osa(narx, test);
  const Eigen::VectorXd truth = test.y.tail(T - s0);

  std::vector<Eigen::Index> index(split.test_index.begin() + s0, split.test_index.end());
  out.predictions = prediction_table(index, truth, free, at_free.variance);
  out.nmse_percent = nmse(truth, free);
  out.lml = narx.gp().log_marginal_likelihood();
  out.coverage = coverage_metric(train.u, test.u);
  out.extra["osa_nmse_percent"] = nmse(truth, osa.mean);
  out.extra["optimizer"] = search.report();
  if (model.narx_mode != NarxMode::BlackBox)
    out.extra["morison"] = {{"drag", model.mean.drag}, {"inertia", model.mean.inertia}};
  out.fitted = model;
  return out;
}

StructureConfig structure_from_chain(const ChainSimSpec& c) {
  return {c.masses, c.dampings, c.stiffnesses, c.force_dof, c.observed};
}

Outcome run_latent_force(const ExperimentConfig& cfg, const Loaded& loaded) {
  Outcome out;
  out.saveable = false;
  ModelSpec model = cfg.model;
  require(model.structure.has_value(), ErrorKind::Config, "model.structure: required for LatentForce");
  const StructureConfig& sc = *model.structure;
  const StructuralModel structure = make_chain(sc.masses, sc.dampings, sc.stiffnesses, sc.force_dof, sc.observed);
  require(!sc.observed.empty(), ErrorKind::Config, "model.structure.observed: at least one channel is required");
  require(model.noise_variances.size() == sc.observed.size(), ErrorKind::Config,
          "model.noise_variances: need one variance per observed channel");

  const Table& t = loaded.table;
  require(t.has("time"), ErrorKind::Data, "LatentForce data needs a time column");
  const double dt = uniform_dt(t.column("time"));
  Eigen::MatrixXd Y(t.rows(), static_cast<Eigen::Index>(sc.observed.size()));
  for (std::size_t j = 0; j < sc.observed.size(); ++j)
    Y.col(static_cast<Eigen::Index>(j)) = t.column(channel_name(sc.observed[j]));
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    for (Eigen::Index j = 0; j < Y.cols(); ++j)
      require(!std::isinf(Y(i, j)), ErrorKind::Data, "observations contain infinite values");

  auto noise_of = [&](const ModelSpec& m) { return ObservationNoise{m.noise_variances, m.initial_state_var}; };
  const Search search = optimize(cfg, model, [&](const ModelSpec& m) {
    return -force_model_log_likelihood(structure, Y, dt, m.force_prior, noise_of(m));
  });
  const SmootherResult res = estimate_force(structure, Y, dt, model.force_prior, noise_of(model));
  const Eigen::VectorXd truth = target_or_nan(t, model.target.empty() ? "force" : model.target);

  out.predictions = prediction_table(range(0, t.rows()), truth, res.force_mean, res.force_variance);
  out.nmse_percent = optional_nmse(truth, res.force_mean);
  out.lml = res.log_likelihood;
  out.extra["optimizer"] = search.report();
  out.extra["force_prior"] = {{"nu", model.force_prior.nu},
                              {"sigma", model.force_prior.sigma},
                              {"lengthscale", model.force_prior.lengthscale}};
  out.fitted = model;
  return out;
}

// Fill generator-dependent defaults and check task-specific requirements.
ExperimentConfig resolve(ExperimentConfig cfg, const Loaded& train) {
  if (cfg.data.train.generator) {
    const GeneratorDefaults d = defaults_for(*cfg.data.train.generator);
    if (cfg.model.inputs.empty()) cfg.model.inputs = d.inputs;
    if (cfg.model.target.empty()) cfg.model.target = d.target;
    if (cfg.task == Task::LatentForce && cfg.data.train.generator->type == GeneratorSpec::Type::MdofChain) {
      if (!cfg.model.structure) cfg.model.structure = structure_from_chain(cfg.data.train.generator->chain);
      if (cfg.model.noise_variances.empty()) cfg.model.noise_variances = train.channel_noise;
    }
  }
  if (cfg.task == Task::LatentForce) {
    if (cfg.model.target.empty()) cfg.model.target = "force";
  } else {
    require(!cfg.model.inputs.empty(), ErrorKind::Config, "model.inputs: required for CSV data");
    require(!cfg.model.target.empty(), ErrorKind::Config, "model.target: required for CSV data");
    if (cfg.task != Task::Narx) {
      const auto d = static_cast<Eigen::Index>(cfg.model.inputs.size());
      try {
        effective_kernel(cfg.model.kernel, Eigen::VectorXd::Ones(d)).to_spec().check_dimension(cfg.model.inputs.size());
      } catch (const Error& e) {
        fail(ErrorKind::Config, std::string("model.kernel: ") + e.what());
      }
    }
  }
  check_bound_names(cfg);
  return cfg;
}

void require_columns(const Table& t, const std::vector<std::string>& names, const std::string& what) {
  for (const auto& n : names) require(t.has(n), ErrorKind::Data, what + " has no column '" + n + "'");
}

struct Run {
  ExperimentConfig resolved;
  Outcome outcome;
  double wall_ms = 0.0;
};

Run execute(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Loaded train_src = load_source(cfg.data.train);
  Run run;
  run.resolved = resolve(cfg, train_src);
  const ExperimentConfig& rc = run.resolved;

  if (rc.task == Task::LatentForce) {
    run.outcome = run_latent_force(rc, train_src);
  } else {
    Split split;
    if (rc.data.test) {
      const Loaded test_src = load_source(*rc.data.test);
      split.train = train_src.table;
      split.test = test_src.table;
      split.test_index = range(0, test_src.table.rows());
    } else {
      split = split_table(rc.split, train_src.table);
    }
    require_columns(split.train, rc.model.inputs, "training data");
    require_columns(split.train, {rc.model.target}, "training data");
    require_columns(split.test, rc.model.inputs, "test data");
    switch (rc.task) {
      case Task::ExactGp: run.outcome = run_exact(rc, split); break;
      case Task::ReducedRank: run.outcome = run_reduced(rc, split); break;
      case Task::Narx: run.outcome = run_narx(rc, split); break;
      case Task::LatentForce: break;
    }
    run.outcome.train_table = split.train;
  }
  run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

json metrics_of(const Run& run) {
  const Outcome& o = run.outcome;
  const Eigen::VectorXd truth = o.predictions.column("truth");
  const Eigen::VectorXd mean = o.predictions.column("mean");
  json sq = json::array();
  for (Eigen::Index i = 0; i < truth.size(); ++i) sq.push_back(number_or_null((truth[i] - mean[i]) * (truth[i] - mean[i])));
  json m{{"name", run.resolved.name},
         {"task", to_string(run.resolved.task)},
         {"nmse_percent", number_or_null(o.nmse_percent)},
         {"log_marginal_likelihood", number_or_null(o.lml)},
         {"coverage_percent", o.coverage ? json(*o.coverage) : json(nullptr)},
         {"wall_ms", run.wall_ms},
         {"variance_convention", "population variance of the test targets"},
         {"n_train", run.resolved.task == Task::LatentForce ? o.predictions.rows() : o.train_table.rows()},
         {"n_test", o.predictions.rows()},
         {"noise_variance", run.outcome.fitted.noise_variance},
         {"kernel", kernel_json(run.outcome.fitted.kernel)},
         {"squared_errors", sq}};
  if (run.resolved.task == Task::LatentForce) {
    m.erase("noise_variance");
    m.erase("kernel");
  }
  for (const auto& [k, v] : o.extra.items()) m[k] = v;
  return m;
}

// Config that reproduces the fitted model from its saved training table.
ExperimentConfig saved_model_config(const Run& run) {
  ExperimentConfig s = run.resolved;
  s.name = run.resolved.name + "_model";
  s.model = run.outcome.fitted;
  s.optimizer = {};
  s.data = {};
  s.data.train.csv = "train.csv";
  s.split = {};
  s.split.type = SplitSpec::Type::All;
  s.output_dir.reset();
  return s;
}

std::string resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::string>& override_dir,
                               const std::string& suffix = "") {
  if (override_dir) return *override_dir;
  if (cfg.output_dir) return *cfg.output_dir;
  return (fs::path(default_output_root()) / (cfg.name + suffix)).string();
}

RunResult write_outputs(Run run, const std::string& dir, bool save_model) {
  run.resolved.output_dir = dir;
  const json metrics = metrics_of(run);
  RunResult r;
  r.output_dir = dir;
  r.metrics_json = metrics.dump(2) + "\n";
  r.resolved_config_json = dump_config(run.resolved);
  r.nmse_percent = run.outcome.nmse_percent;
  r.log_marginal_likelihood = run.outcome.lml;
  r.coverage_percent = run.outcome.coverage;
  r.wall_ms = run.wall_ms;

  const std::string predictions = format_csv(run.outcome.predictions);
  std::string model_cfg, train_csv;
  if (save_model && run.outcome.saveable) {
    model_cfg = dump_config(saved_model_config(run));
    train_csv = format_csv(run.outcome.train_table);
  }
  const fs::path d(dir);
  write_file_atomic((d / "predictions.csv").string(), predictions);
  write_file_atomic((d / "config.resolved.json").string(), r.resolved_config_json);
  if (!model_cfg.empty()) {
    write_file_atomic((d / "model" / "train.csv").string(), train_csv);
    write_file_atomic((d / "model" / "model.json").string(), model_cfg);
  }
  write_file_atomic((d / "metrics.json").string(), r.metrics_json);
  return r;
}

}  // namespace

Table generate_table(const GeneratorSpec& spec) { return generate_data(spec).table; }

std::string default_output_root() {
  const char* env = std::getenv("PIGP_OUTPUT_ROOT");
  return env && *env ? std::string(env) : std::string("runs");
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::optional<std::string>& output_override) {
  Run run = execute(cfg);
  return write_outputs(std::move(run), resolve_output_dir(cfg, output_override), true);
}

std::string generate_to_dir(const GeneratorSpec& spec, const std::string& out_dir) {
  const Loaded data = generate_data(spec);
  json summary{{"output_dir", out_dir},
               {"rows", data.table.rows()},
               {"columns", data.table.names},
               {"train_end", data.table.train_end ? json(*data.table.train_end) : json(nullptr)}};
  if (!data.channel_noise.empty()) summary["noise_variances"] = data.channel_noise;
  const fs::path d(out_dir);
  write_file_atomic((d / "data.csv").string(), format_csv(data.table));
  write_file_atomic((d / "generator.json").string(), dump_generator(spec));
  return summary.dump(2) + "\n";
}

RunResult predict_saved(const std::string& model_dir, const std::string& data_csv,
                        const std::optional<std::string>& output_override) {
  ExperimentConfig cfg = load_config((fs::path(model_dir) / "model.json").string());
  require(cfg.task != Task::LatentForce, ErrorKind::Config, "LatentForce runs do not produce a reusable model");
  cfg.data.train = {};
  cfg.data.train.csv = (fs::path(model_dir) / "train.csv").string();
  cfg.data.test = DataSource{};
  cfg.data.test->csv = data_csv;
  cfg.optimizer.enabled = false;
  std::string name = cfg.name;
  if (name.size() > 6 && name.compare(name.size() - 6, 6, "_model") == 0) name.resize(name.size() - 6);
  cfg.name = name + "_predict";
  cfg.output_dir.reset();
  Run run = execute(cfg);
  return write_outputs(std::move(run), resolve_output_dir(cfg, output_override), false);
}

std::string evaluate_csv(const std::string& pred_csv, const std::string& truth_csv,
                         const std::optional<std::string>& column) {
  const auto t0 = std::chrono::steady_clock::now();
  const Table pred = read_csv(pred_csv);
  const Table truth_table = read_csv(truth_csv);
  const Eigen::VectorXd mean = pred.column("mean");
  std::string col;
  if (column) {
    col = *column;
  } else if (truth_table.has("truth")) {
    col = "truth";
  } else {
    require(!truth_table.names.empty(), ErrorKind::Data, truth_csv + ": no columns");
    col = truth_table.names.back();
  }
  const Eigen::VectorXd source = truth_table.column(col);

  Eigen::VectorXd truth(mean.size());
  if (pred.has("index") && !truth_table.has("index")) {
    const Eigen::VectorXd idx = pred.column("index");
    for (Eigen::Index i = 0; i < idx.size(); ++i) {
      const double r = idx[i];
      require(r >= 0.0 && r < static_cast<double>(source.size()) && r == std::floor(r), ErrorKind::Data,
              "prediction index " + std::to_string(r) + " outside the truth table");
      truth[i] = source[static_cast<Eigen::Index>(r)];
    }
  } else {
    require(source.size() == mean.size(), ErrorKind::Data,
            "prediction and truth row counts differ (" + std::to_string(mean.size()) + " vs " +
                std::to_string(source.size()) + ")");
    truth = source;
  }
  require(truth.allFinite() && mean.allFinite(), ErrorKind::Data, "non-finite values in predictions or truth");
  const double score = nmse(truth, mean);
  const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  json m{{"nmse_percent", score},
         {"log_marginal_likelihood", nullptr},
         {"coverage_percent", nullptr},
         {"wall_ms", wall},
         {"n", mean.size()},
         {"truth_column", col},
         {"variance_convention", "population variance of the test targets"}};
  return m.dump(2) + "\n";
}

}  // namespace pigp
