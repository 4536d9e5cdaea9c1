#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pigp/generators.hpp"
#include "pigp/kernel.hpp"
#include "pigp/narx.hpp"
#include "pigp/pso.hpp"
#include "pigp/reduced_rank.hpp"
#include "pigp/state_space.hpp"
#include "pigp/table.hpp"

namespace pigp {

enum class Task { ExactGp, Narx, ReducedRank, LatentForce };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

/// Forcing description resolved into a series at generation time.
struct ForcingSpec {
  enum class Type { WhiteNoise, BandLimited, Zero };
  Type type = Type::WhiteNoise;
  double sigma = 1.0;  // white noise intensity, or band-limited RMS
  double f_lo = 0.1;
  double f_hi = 1.0;
  int components = 16;
};

struct FieldGenSpec {
  FieldSpec field;
  int train_per_dim = 6;
  int test_per_dim = 20;
};

/// Synthetic data source. Every generator emits a table with a `time` or
/// coordinate column, its inputs and its target.
struct GeneratorSpec {
  enum class Type { Sdof, MdofChain, Trend, Morison, BoundedField };
  Type type = Type::Sdof;
  SdofSimSpec sdof;
  ForcingSpec forcing;  // sdof and mdof_chain
  ChainSimSpec chain;
  TrendSpec trend;
  MorisonTaskSpec morison;
  FieldGenSpec field;
  std::uint64_t seed = 1;
};

struct DataSource {
  std::optional<GeneratorSpec> generator;
  std::optional<std::string> csv;
};

struct DataSpec {
  DataSource train;
  std::optional<DataSource> test;  // when present the split is ignored
};

/// How rows of a single table divide into training and test sets.
/// natural: the generator's window (all rows train when it has none).
/// stride: rows with index % stride == offset train, the rest test.
/// fraction / index: a leading block trains, the remainder tests.
/// all: every row trains and tests.
struct SplitSpec {
  enum class Type { Natural, Stride, Fraction, Index, All };
  Type type = Type::Natural;
  int stride = 8;
  int offset = 0;
  double fraction = 0.5;
  Eigen::Index index = 0;
};

struct KernelConfig {
  KernelFamily family = KernelFamily::SquaredExponential;
  double sigma_f = 1.0;
  std::vector<double> lengthscales{1.0};
  double zeta = 0.05;
  double omega_n = 1.0;
  double sigma2 = 1.0;
  bool standardize = false;  // scale lengthscales by the training-input standard deviation

  KernelSpec to_spec() const;
};

struct MeanConfig {
  enum class Form { Zero, Linear, Morison };
  Form form = Form::Zero;
  bool fit = false;  // least-squares coefficients from the training data
  double theta0 = 0.0;
  std::vector<double> theta;
  double drag = 0.0;
  double inertia = 0.0;
};

struct StructureConfig {
  std::vector<double> masses;
  std::vector<double> dampings;
  std::vector<double> stiffnesses;
  int force_dof = 0;
  std::vector<ObservationChannel> observed;
};

struct ModelSpec {
  std::vector<std::string> inputs;  // empty: generator default
  std::string target;               // empty: generator default
  KernelConfig kernel;
  MeanConfig mean;
  double noise_variance = 0.01;
  int lags_u = 4;
  int lags_y = 4;
  NarxMode narx_mode = NarxMode::BlackBox;
  std::optional<DomainSpec> domain;
  bool compare_full = false;
  std::optional<StructureConfig> structure;
  MaternForcePrior force_prior;
  std::vector<double> noise_variances;  // per observed channel
  double initial_state_var = 1e-8;
};

struct OptimizerSpec {
  bool enabled = false;
  PsoConfig pso;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Task task = Task::ExactGp;
  DataSpec data;
  SplitSpec split;
  ModelSpec model;
  OptimizerSpec optimizer;
  std::optional<std::string> output_dir;
};

/// Strict parse: unknown keys, wrong types and invalid values are
/// ErrorKind::Config.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string dump_config(const ExperimentConfig& cfg);

GeneratorSpec parse_generator(const std::string& json_text);
std::string dump_generator(const GeneratorSpec& spec);

/// Deterministic table for a generator.
Table generate_table(const GeneratorSpec& spec);

/// Output root: $PIGP_OUTPUT_ROOT, else ./runs.
std::string default_output_root();

struct RunResult {
  std::string output_dir;
  std::string metrics_json;
  std::string resolved_config_json;
  double nmse_percent = 0.0;
  double log_marginal_likelihood = 0.0;
  std::optional<double> coverage_percent;
  double wall_ms = 0.0;
};

/// Resolve, fit, predict and score. Outputs (predictions.csv, metrics.json,
/// config.resolved.json, model/) are written only after every computation
/// has succeeded, each through write-then-rename.
RunResult run_experiment(const ExperimentConfig& cfg, const std::optional<std::string>& output_override = std::nullopt);

/// Write a generator's table as data.csv plus its spec under `out_dir`.
std::string generate_to_dir(const GeneratorSpec& spec, const std::string& out_dir);

/// Refit a saved ExactGp, ReducedRank or Narx model and predict rows of a CSV.
RunResult predict_saved(const std::string& model_dir, const std::string& data_csv,
                        const std::optional<std::string>& output_override = std::nullopt);

/// Score a predictions CSV (`mean` column) against a truth CSV (`truth`
/// column, else `column`, else its last column). Rows pair by order.
std::string evaluate_csv(const std::string& pred_csv, const std::string& truth_csv,
                         const std::optional<std::string>& column = std::nullopt);

}  // namespace pigp
