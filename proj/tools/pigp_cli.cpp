#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "pigp/pigp.h"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitInternal = 1;

int exit_code(pigp_status s) {
  switch (s) {
    case PIGP_OK: return 0;
    case PIGP_E_INVALID_ARGUMENT:
    case PIGP_E_CONFIG: return kExitConfig;
    case PIGP_E_DATA:
    case PIGP_E_IO: return kExitData;
    case PIGP_E_NUMERICAL: return kExitNumerical;
    case PIGP_E_INTERNAL: break;
  }
  return kExitInternal;
}

const char* label(pigp_status s) {
  switch (s) {
    case PIGP_E_INVALID_ARGUMENT:
    case PIGP_E_CONFIG: return "config error";
    case PIGP_E_DATA: return "data error";
    case PIGP_E_IO: return "i/o error";
    case PIGP_E_NUMERICAL: return "numerical error";
    default: return "internal error";
  }
}

int finish(pigp_status s, char* report) {
  if (s != PIGP_OK) {
    std::string msg = pigp_last_error();
    for (char& c : msg)
      if (c == '\n' || c == '\r') c = ' ';
    std::fprintf(stderr, "pigp: %s: %s\n", label(s), msg.c_str());
    return exit_code(s);
  }
  std::fputs(report, stdout);
  pigp_string_free(report);
  return 0;
}

const char* or_null(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed Gaussian process experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pigp_version()));

  std::string spec_path, gen_out;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset described by a generator spec");
  gen->add_option("spec", spec_path, "Generator spec JSON")->required();
  gen->add_option("-o,--output", gen_out, "Output directory (default: $PIGP_OUTPUT_ROOT/generated)");

  std::string fit_config, fit_out;
  auto* fit = app.add_subcommand("fit", "Run an experiment config: fit, predict and score");
  fit->add_option("config", fit_config, "Experiment config JSON")->required();
  fit->add_option("-o,--output", fit_out, "Output directory");

  std::string model_dir, data_csv, pred_out;
  auto* pred = app.add_subcommand("predict", "Predict CSV rows with a saved model");
  pred->add_option("model_dir", model_dir, "Model directory written by fit")->required();
  pred->add_option("data", data_csv, "Input CSV")->required();
  pred->add_option("-o,--output", pred_out, "Output directory");

  std::string pred_csv, truth_csv, column;
  auto* ev = app.add_subcommand("eval", "Score predictions against truth (nMSE)");
  ev->add_option("predictions", pred_csv, "Predictions CSV with a mean column")->required();
  ev->add_option("truth", truth_csv, "Truth CSV")->required();
  ev->add_option("-c,--column", column, "Truth column (default: truth, else the last column)");

  std::string lf_config, lf_out;
  auto* lf = app.add_subcommand("latent-force", "Estimate an unmeasured input force from structural responses");
  lf->add_option("config", lf_config, "LatentForce experiment config JSON")->required();
  lf->add_option("-o,--output", lf_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::fprintf(stderr, "pigp: usage error: %s\n", msg.c_str());
    return kExitConfig;
  }

  char* report = nullptr;
  if (*gen) {
    if (gen_out.empty()) {
      const char* root = std::getenv("PIGP_OUTPUT_ROOT");
      gen_out = std::string(root && *root ? root : "runs") + "/generated";
    }
  }
  pigp_status s;
  if (*gen)
    s = pigp_generate(spec_path.c_str(), gen_out.c_str(), &report);
  else if (*fit)
    s = pigp_run_experiment(fit_config.c_str(), or_null(fit_out), &report);
  else if (*pred)
    s = pigp_predict(model_dir.c_str(), data_csv.c_str(), or_null(pred_out), &report);
  else if (*ev)
    s = pigp_eval(pred_csv.c_str(), truth_csv.c_str(), or_null(column), &report);
  else
    s = pigp_run_latent_force(lf_config.c_str(), or_null(lf_out), &report);
  return finish(s, report);
}
