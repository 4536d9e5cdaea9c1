#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "pigp/error.hpp"
#include "pigp/experiment.hpp"
#include "pigp/metrics.hpp"

using namespace pigp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pigp_test_" + name);
  fs::remove_all(p);
  return p;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

std::string small_trend_config(const std::string& name) {
  return R"({
    "name": ")" + name + R"(",
    "task": "ExactGp",
    "data": {"train": {"generator": {"type": "trend", "seed": 3, "days": 10, "samples_per_day": 6}}},
    "model": {"kernel": {"family": "SE", "sigma_f": 2.0, "lengthscales": [5.0, 4.0]},
              "mean": {"form": "linear", "fit": true}, "noise_variance": 0.1},
    "optimizer": {"enabled": true, "particles": 5, "iterations": 3, "seed": 1,
                  "bounds": [{"name": "sigma_f", "lower": 0.1, "upper": 5, "log_scale": true}]}
  })";
}

json read_json(const fs::path& p) {
  std::ifstream f(p);
  return json::parse(f);
}

}  // namespace

TEST(Config, ShippedConfigsRoundTrip) {
  for (const auto& entry : fs::directory_iterator(PIGP_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    SCOPED_TRACE(entry.path().string());
    const ExperimentConfig a = load_config(entry.path().string());
    const std::string once = dump_config(a);
    const std::string twice = dump_config(parse_config(once));
    EXPECT_EQ(once, twice);
  }
}

TEST(Config, EveryFieldSurvivesRoundTrip) {
  ExperimentConfig c;
  c.name = "full";
  c.task = Task::ReducedRank;
  GeneratorSpec g;
  g.type = GeneratorSpec::Type::BoundedField;
  g.seed = 99;
  g.field.field.half_widths = {1.5, 0.5};
  g.field.field.boundary = Boundary::Neumann;
  g.field.train_per_dim = 5;
  c.data.train.generator = g;
  c.data.test = DataSource{};
  c.data.test->csv = "elsewhere.csv";
  c.split.type = SplitSpec::Type::Fraction;
  c.split.fraction = 0.3;
  c.model.inputs = {"x0", "x1"};
  c.model.target = "value";
  c.model.kernel.lengthscales = {0.25, 0.75};
  c.model.kernel.standardize = true;
  c.model.mean.form = MeanConfig::Form::Linear;
  c.model.mean.theta = {1.0, -2.0};
  c.model.mean.theta0 = 0.1;
  c.model.domain = DomainSpec{{1.5, 0.5}, {0.0, 0.1}, Boundary::Neumann, {8, 4}, 20};
  c.model.noise_variance = 0.123456789012345;
  c.optimizer.enabled = true;
  c.optimizer.pso.particles = 7;
  c.optimizer.pso.bounds = {{"sigma_f", 0.1, 2.0, true}, {"lengthscale_1", 0.01, 1.0, false}};
  c.output_dir = "somewhere";
  const std::string text = dump_config(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(dump_config(back), text);
  EXPECT_EQ(back.model.noise_variance, c.model.noise_variance);
  EXPECT_EQ(back.model.domain->center, c.model.domain->center);
  EXPECT_EQ(*back.model.domain->max_total, 20);
  EXPECT_EQ(back.data.train.generator->field.field.boundary, Boundary::Neumann);
  EXPECT_EQ(*back.output_dir, "somewhere");
}

TEST(Config, StrictParsing) {
  const std::string base = small_trend_config("strict");
  EXPECT_NO_THROW(parse_config(base));
  auto with = [&](const std::string& from, const std::string& to) {
    std::string s = base;
    const auto pos = s.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    s.replace(pos, from.size(), to);
    return s;
  };
  const std::vector<std::string> bad{
      "{ not json",
      "[]",
      with("\"task\": \"ExactGp\"", "\"task\": \"Exact\""),
      with("\"task\": \"ExactGp\",", ""),
      with("\"noise_variance\": 0.1", "\"noise_variance\": -1"),
      with("\"noise_variance\": 0.1", "\"noise_variance\": \"small\""),
      with("\"noise_variance\": 0.1", "\"noise_variance\": 0.1, \"nosie\": 1"),
      with("\"family\": \"SE\"", "\"family\": \"Cosine\""),
      with("\"lengthscales\": [5.0, 4.0]", "\"lengthscales\": [-5.0, 4.0]"),
      with("\"days\": 10", "\"days\": 10, \"csv\": \"x\""),
      with("\"generator\": {", "\"csv\": \"a.csv\", \"generator\": {"),
      with("\"upper\": 5", "\"upper\": 0.01"),
      with("\"particles\": 5", "\"particles\": 2.5"),
  };
  for (const auto& text : bad) {
    SCOPED_TRACE(text);
    EXPECT_EQ(kind_of([&] { parse_config(text); }), ErrorKind::Config);
  }
}

TEST(Table, CsvRoundTripAndErrors) {
  Table t;
  t.add("time", Eigen::Vector3d(0.0, 0.5, 1.0));
  t.add("y", Eigen::Vector3d(0.1, -1e-300, 1.0 / 3.0));
  const Table back = parse_csv(format_csv(t), "mem");
  EXPECT_EQ(back.names, t.names);
  EXPECT_EQ(back.values, t.values);
  const Table gaps = parse_csv("a,b\n1,\n nan , 2\n", "mem");
  EXPECT_TRUE(std::isnan(gaps.values(0, 1)));
  EXPECT_TRUE(std::isnan(gaps.values(1, 0)));
  EXPECT_EQ(kind_of([] { parse_csv("a,b\n1,2,3\n", "mem"); }), ErrorKind::Data);
  EXPECT_EQ(kind_of([] { parse_csv("a,b\n1,x\n", "mem"); }), ErrorKind::Data);
  EXPECT_EQ(kind_of([] { parse_csv("", "mem"); }), ErrorKind::Data);
  EXPECT_EQ(kind_of([] { read_csv("/nonexistent/file.csv"); }), ErrorKind::Data);
  EXPECT_EQ(kind_of([&] { t.column("z"); }), ErrorKind::Data);
}

TEST(Table, AtomicWriteLeavesNoTemporary) {
  const fs::path dir = scratch("atomic");
  write_file_atomic((dir / "a" / "f.txt").string(), "first");
  write_file_atomic((dir / "a" / "f.txt").string(), "second");
  EXPECT_EQ(read_file((dir / "a" / "f.txt").string()), "second");
  EXPECT_FALSE(fs::exists(dir / "a" / "f.txt.partial"));
  fs::remove_all(dir);
}

TEST(Generators, TablesAreDeterministic) {
  for (const char* type : {"sdof", "mdof_chain", "trend", "morison", "bounded_field"}) {
    SCOPED_TRACE(type);
    std::string spec = std::string(R"({"type": ")") + type + R"(", "seed": 5)";
    if (std::string(type) == "mdof_chain") spec += R"(, "observed": [{"quantity": "velocity", "dof": 1}], "steps": 300)";
    if (std::string(type) == "sdof") spec += R"(, "steps": 300)";
    spec += "}";
    const GeneratorSpec g = parse_generator(spec);
    const Table a = generate_table(g);
    const Table b = generate_table(g);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.names, b.names);
    EXPECT_EQ(dump_generator(parse_generator(dump_generator(g))), dump_generator(g));
  }
}

TEST(Experiment, DeterministicMetricsAndPredictions) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const ExperimentConfig cfg = parse_config(small_trend_config("det"));
  run_experiment(cfg, a.string());
  run_experiment(cfg, b.string());
  json ma = read_json(a / "metrics.json"), mb = read_json(b / "metrics.json");
  ma.erase("wall_ms");
  mb.erase("wall_ms");
  EXPECT_EQ(ma, mb);
  EXPECT_EQ(read_file((a / "predictions.csv").string()), read_file((b / "predictions.csv").string()));
  for (const char* key : {"nmse_percent", "log_marginal_likelihood", "coverage_percent", "wall_ms"})
    EXPECT_TRUE(read_json(a / "metrics.json").contains(key)) << key;
  EXPECT_GE(ma["nmse_percent"].get<double>(), 0.0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, OutputsAndResolvedConfig) {
  const fs::path dir = scratch("outputs");
  const RunResult r = run_experiment(parse_config(small_trend_config("outputs")), dir.string());
  for (const char* f : {"predictions.csv", "metrics.json", "config.resolved.json", "model/model.json", "model/train.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  const Table pred = read_csv((dir / "predictions.csv").string());
  EXPECT_EQ(pred.names, (std::vector<std::string>{"index", "truth", "mean", "variance"}));
  EXPECT_EQ(pred.rows(), 30);  // 60 samples, natural half split
  EXPECT_EQ(pred.values(0, 0), 30.0);
  EXPECT_NEAR(nmse(pred.column("truth"), pred.column("mean")), r.nmse_percent, 1e-9);
  const ExperimentConfig resolved = load_config((dir / "config.resolved.json").string());
  EXPECT_EQ(resolved.model.inputs, (std::vector<std::string>{"temperature", "hour"}));
  EXPECT_EQ(resolved.model.target, "deflection");
  EXPECT_EQ(*resolved.output_dir, dir.string());
  fs::remove_all(dir);
}

TEST(Experiment, OutputDirectoryFromEnvironment) {
  const fs::path root = scratch("env_root");
  setenv("PIGP_OUTPUT_ROOT", root.c_str(), 1);
  EXPECT_EQ(default_output_root(), root.string());
  const RunResult r = run_experiment(parse_config(small_trend_config("env_named")));
  EXPECT_EQ(fs::path(r.output_dir), root / "env_named");
  EXPECT_TRUE(fs::exists(root / "env_named" / "metrics.json"));
  unsetenv("PIGP_OUTPUT_ROOT");
  EXPECT_EQ(default_output_root(), "runs");
  fs::remove_all(root);
}

TEST(Experiment, PredictSavedModelReproducesFit) {
  const fs::path fit_dir = scratch("saved_fit"), data_dir = scratch("saved_data"), pred_dir = scratch("saved_pred");
  const ExperimentConfig cfg = parse_config(small_trend_config("saved"));
  run_experiment(cfg, fit_dir.string());
  generate_to_dir(*cfg.data.train.generator, data_dir.string());
  const RunResult r = predict_saved((fit_dir / "model").string(), (data_dir / "data.csv").string(), pred_dir.string());
  const Table fitted = read_csv((fit_dir / "predictions.csv").string());
  const Table again = read_csv((pred_dir / "predictions.csv").string());
  ASSERT_EQ(again.rows(), 60);
  for (Eigen::Index i = 0; i < fitted.rows(); ++i) {
    const auto row = static_cast<Eigen::Index>(fitted.values(i, 0));
    EXPECT_NEAR(again.column("mean")[row], fitted.column("mean")[i], 1e-8);
    EXPECT_NEAR(again.column("variance")[row], fitted.column("variance")[i], 1e-8);
  }
  EXPECT_TRUE(std::isfinite(r.nmse_percent));
  EXPECT_FALSE(fs::exists(pred_dir / "model"));

  const json ev = json::parse(evaluate_csv((fit_dir / "predictions.csv").string(), (data_dir / "data.csv").string(),
                                           std::string("deflection")));
  EXPECT_NEAR(ev["nmse_percent"].get<double>(), read_json(fit_dir / "metrics.json")["nmse_percent"].get<double>(), 1e-9);
  EXPECT_EQ(kind_of([&] { predict_saved((fit_dir / "missing").string(), (data_dir / "data.csv").string()); }),
            ErrorKind::Config);
  for (const auto& d : {fit_dir, data_dir, pred_dir}) fs::remove_all(d);
}

TEST(Experiment, CsvDataSource) {
  const fs::path dir = scratch("csv_source");
  Table t;
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(40, 0.0, 4.0);
  t.add("time", x);
  t.add("x", x);
  t.add("y", x.array().sin().matrix());
  write_file_atomic((dir / "in.csv").string(), format_csv(t));
  const std::string text = R"({"name": "csv", "task": "ExactGp",
    "data": {"train": {"csv": ")" + (dir / "in.csv").string() + R"("}},
    "split": {"type": "stride", "stride": 2},
    "model": {"inputs": ["x"], "target": "y", "kernel": {"family": "SE", "lengthscales": [1.0]},
              "noise_variance": 1e-6}})";
  const RunResult r = run_experiment(parse_config(text), (dir / "out").string());
  EXPECT_LT(r.nmse_percent, 0.01);

  std::string missing = text;
  missing.replace(missing.find("[\"x\"]"), 5, "[\"q\"]");
  EXPECT_EQ(kind_of([&] { run_experiment(parse_config(missing), (dir / "out2").string()); }), ErrorKind::Data);
  EXPECT_FALSE(fs::exists(dir / "out2"));
  std::string no_target = text;
  no_target.replace(no_target.find(", \"target\": \"y\""), 15, "");
  EXPECT_EQ(kind_of([&] { run_experiment(parse_config(no_target), (dir / "out3").string()); }), ErrorKind::Config);
  fs::remove_all(dir);
}

TEST(Experiment, NarxRejectsInterleavedSplit) {
  const std::string text = R"({"name": "narx", "task": "Narx",
    "data": {"train": {"generator": {"type": "morison", "steps": 60}}},
    "split": {"type": "stride", "stride": 2}})";
  EXPECT_EQ(kind_of([&] { run_experiment(parse_config(text), scratch("narx_bad").string()); }), ErrorKind::Config);
}

TEST(Experiment, NarxRunsFreeSimulation) {
  const fs::path dir = scratch("narx_run");
  const std::string text = R"({"name": "narx", "task": "Narx",
    "data": {"train": {"generator": {"type": "morison", "steps": 120, "seed": 1}},
             "test": {"generator": {"type": "morison", "steps": 60, "seed": 2}}},
    "model": {"kernel": {"family": "SE", "lengthscales": [1.0], "standardize": true},
              "mean": {"form": "morison", "fit": true}, "narx_mode": "ResidualMean", "noise_variance": 0.001}})";
  const RunResult r = run_experiment(parse_config(text), dir.string());
  const json m = read_json(dir / "metrics.json");
  EXPECT_TRUE(m.contains("osa_nmse_percent"));
  EXPECT_GT(m["morison"]["drag"].get<double>(), 0.8);
  EXPECT_LT(m["morison"]["drag"].get<double>(), 1.6);
  EXPECT_EQ(read_csv((dir / "predictions.csv").string()).rows(), 56);
  EXPECT_TRUE(r.coverage_percent.has_value());
  fs::remove_all(dir);
}

TEST(Experiment, LatentForceReportsForceRecovery) {
  const fs::path dir = scratch("lf");
  const std::string text = R"({"name": "lf", "task": "LatentForce",
    "data": {"train": {"generator": {"type": "mdof_chain", "seed": 3, "steps": 500,
      "observed": [{"quantity": "displacement", "dof": 0}, {"quantity": "displacement", "dof": 2}],
      "forcing": {"type": "band_limited", "sigma": 1.0, "f_lo": 0.1, "f_hi": 1.0, "components": 6}}}},
    "model": {"force_prior": {"nu": 1.5, "sigma": 2.0, "lengthscale": 0.5}}})";
  const RunResult r = run_experiment(parse_config(text), dir.string());
  const json m = read_json(dir / "metrics.json");
  EXPECT_TRUE(m["nmse_percent"].is_number());
  EXPECT_LT(r.nmse_percent, 10.0);
  EXPECT_TRUE(m["log_marginal_likelihood"].is_number());
  const ExperimentConfig resolved = load_config((dir / "config.resolved.json").string());
  ASSERT_TRUE(resolved.model.structure.has_value());
  EXPECT_EQ(resolved.model.noise_variances.size(), 2u);
  EXPECT_FALSE(fs::exists(dir / "model"));
  fs::remove_all(dir);
}

TEST(Experiment, ReducedRankNeedsDomainAndInteriorData) {
  std::string text = R"({"name": "rr", "task": "ReducedRank",
    "data": {"train": {"generator": {"type": "bounded_field", "train_per_dim": 3, "test_per_dim": 4}}}})";
  EXPECT_EQ(kind_of([&] { run_experiment(parse_config(text), scratch("rr").string()); }), ErrorKind::Config);
  text.insert(text.size() - 1, R"(, "model": {"domain": {"half_widths": [0.5, 0.5], "basis_counts": [4, 4]}})");
  EXPECT_EQ(kind_of([&] { run_experiment(parse_config(text), scratch("rr").string()); }), ErrorKind::Data);
}

TEST(Experiment, BoundedFieldFavoursReducedRankOnSparseGrids) {
  const ExperimentConfig base = load_config(std::string(PIGP_CONFIG_DIR) + "/reduced_rank_field.json");
  for (int grid : {3, 4}) {
    ExperimentConfig cfg = base;
    cfg.data.train.generator->field.train_per_dim = grid;
    const fs::path dir = scratch("field_" + std::to_string(grid));
    const RunResult r = run_experiment(cfg, dir.string());
    const json m = read_json(dir / "metrics.json");
    EXPECT_LE(r.nmse_percent, m["full_gp"]["nmse_percent"].get<double>()) << "grid " << grid;
    fs::remove_all(dir);
  }
}

TEST(Evaluate, PairsByIndexOrOrder) {
  const fs::path dir = scratch("eval");
  write_file_atomic((dir / "pred.csv").string(), "index,truth,mean,variance\n1,0,0,1\n3,2,0,1\n");
  write_file_atomic((dir / "truth.csv").string(), "time,y\n0,9\n1,0\n2,9\n3,2\n");
  EXPECT_NEAR(json::parse(evaluate_csv((dir / "pred.csv").string(), (dir / "truth.csv").string()))["nmse_percent"]
                  .get<double>(),
              200.0, 1e-12);
  write_file_atomic((dir / "short.csv").string(), "mean\n1\n2\n3\n");
  EXPECT_EQ(kind_of([&] { evaluate_csv((dir / "short.csv").string(), (dir / "truth.csv").string()); }), ErrorKind::Data);
  fs::remove_all(dir);
}
