#include "pigp/pigp.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "pigp/error.hpp"
#include "pigp/experiment.hpp"
#include "pigp/gp.hpp"
#include "pigp/metrics.hpp"
#include "pigp/narx.hpp"
#include "pigp/reduced_rank.hpp"

struct pigp_gp {
  pigp::TrainedGp model;
};

struct pigp_rrgp {
  pigp::ReducedRankGp model;
};

namespace {

thread_local std::string last_error;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

pigp_status status_of(pigp::ErrorKind k) {
  switch (k) {
    case pigp::ErrorKind::InvalidArgument: return PIGP_E_INVALID_ARGUMENT;
    case pigp::ErrorKind::Config: return PIGP_E_CONFIG;
    case pigp::ErrorKind::Data: return PIGP_E_DATA;
    case pigp::ErrorKind::Numerical: return PIGP_E_NUMERICAL;
    case pigp::ErrorKind::Io: return PIGP_E_IO;
  }
  return PIGP_E_INTERNAL;
}

template <class F>
pigp_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return PIGP_OK;
  } catch (const pigp::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PIGP_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PIGP_E_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  pigp::require(p != nullptr, pigp::ErrorKind::InvalidArgument, std::string(name) + " is NULL");
}

nlohmann::json parse(const char* text, const char* what) {
  need(text, what);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    pigp::fail(pigp::ErrorKind::InvalidArgument, std::string(what) + ": " + e.what());
  }
}

pigp::KernelSpec kernel_from(const char* text) {
  const auto j = parse(text, "kernel_json");
  try {
    pigp::KernelConfig k;
    k.family = pigp::kernel_family_from_string(j.at("family").get<std::string>());
    k.sigma_f = j.value("sigma_f", k.sigma_f);
    k.lengthscales = j.value("lengthscales", k.lengthscales);
    k.zeta = j.value("zeta", k.zeta);
    k.omega_n = j.value("omega_n", k.omega_n);
    k.sigma2 = j.value("sigma2", k.sigma2);
    const pigp::KernelSpec s = k.to_spec();
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    pigp::fail(pigp::ErrorKind::InvalidArgument, std::string("kernel_json: ") + e.what());
  } catch (const pigp::Error& e) {
    pigp::fail(pigp::ErrorKind::InvalidArgument, e.what());
  }
}

pigp::MeanFunctionSpec mean_from(const char* text, std::size_t dim) {
  if (!text) return pigp::MeanFunctionSpec::zero();
  const auto j = parse(text, "mean_json");
  try {
    const std::string form = j.at("form").get<std::string>();
    if (form == "zero") return pigp::MeanFunctionSpec::zero();
    pigp::require(form == "linear", pigp::ErrorKind::InvalidArgument, "mean_json: form must be zero or linear");
    const auto theta = j.at("theta").get<std::vector<double>>();
    pigp::require(theta.size() == dim, pigp::ErrorKind::InvalidArgument, "mean_json: theta length differs from dim");
    return pigp::MeanFunctionSpec::linear(j.value("theta0", 0.0), theta);
  } catch (const nlohmann::json::exception& e) {
    pigp::fail(pigp::ErrorKind::InvalidArgument, std::string("mean_json: ") + e.what());
  }
}

pigp::DomainSpec domain_from(const char* text) {
  const auto j = parse(text, "domain_json");
  try {
    pigp::DomainSpec d;
    d.half_widths = j.at("half_widths").get<std::vector<double>>();
    d.basis_counts = j.at("basis_counts").get<std::vector<int>>();
    d.center = j.value("center", std::vector<double>{});
    d.boundary = pigp::boundary_from_string(j.value("boundary", std::string("Dirichlet")));
    if (j.contains("max_total")) d.max_total = j.at("max_total").get<int>();
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    pigp::fail(pigp::ErrorKind::InvalidArgument, std::string("domain_json: ") + e.what());
  } catch (const pigp::Error& e) {
    pigp::fail(pigp::ErrorKind::InvalidArgument, e.what());
  }
}

pigp::Dataset dataset_from(const double* X, std::size_t n, std::size_t dim, const double* y) {
  need(X, "X");
  need(y, "y");
  pigp::require(n >= 1 && dim >= 1, pigp::ErrorKind::InvalidArgument, "need n >= 1 and dim >= 1");
  pigp::Dataset d;
  d.X = Eigen::Map<const RowMajor>(X, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  d.y = Eigen::Map<const Eigen::VectorXd>(y, static_cast<Eigen::Index>(n));
  return d;
}

void write_prediction(const pigp::Prediction& p, double* mean, double* variance) {
  Eigen::Map<Eigen::VectorXd>(mean, p.mean.size()) = p.mean;
  if (variance) Eigen::Map<Eigen::VectorXd>(variance, p.variance.size()) = p.variance;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::optional<std::string> opt(const char* s) { return s ? std::optional<std::string>(s) : std::nullopt; }

std::string run_report(const pigp::RunResult& r) {
  nlohmann::json j = nlohmann::json::parse(r.metrics_json);
  j["output_dir"] = r.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace

extern "C" {

const char* pigp_last_error(void) { return last_error.c_str(); }

const char* pigp_version(void) { return "0.1.0"; }

void pigp_string_free(char* s) { std::free(s); }

pigp_status pigp_kernel_eval(const char* kernel_json, const double* x, const double* x_prime, size_t dim, double* out) {
  return guarded([&] {
    need(x, "x");
    need(x_prime, "x_prime");
    need(out, "out");
    const pigp::KernelSpec k = kernel_from(kernel_json);
    const auto d = static_cast<Eigen::Index>(dim);
    *out = pigp::kernel_eval(k, Eigen::Map<const Eigen::VectorXd>(x, d), Eigen::Map<const Eigen::VectorXd>(x_prime, d));
  });
}

pigp_status pigp_spectral_density(const char* kernel_json, double omega, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = pigp::spectral_density(kernel_from(kernel_json), omega);
  });
}

pigp_status pigp_gp_fit(const double* X, size_t n, size_t dim, const double* y, const char* kernel_json,
                        const char* mean_json, double noise_variance, pigp_gp** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    const pigp::Dataset d = dataset_from(X, n, dim, y);
    *out = new pigp_gp{pigp::fit_exact(d, kernel_from(kernel_json), mean_from(mean_json, dim), noise_variance)};
  });
}

pigp_status pigp_gp_predict(const pigp_gp* gp, const double* X_star, size_t m, double* mean, double* variance) {
  return guarded([&] {
    need(gp, "gp");
    need(X_star, "X_star");
    need(mean, "mean");
    const auto dim = gp->model.inputs().cols();
    const Eigen::MatrixXd Xs = Eigen::Map<const RowMajor>(X_star, static_cast<Eigen::Index>(m), dim);
    write_prediction(pigp::predict(gp->model, Xs), mean, variance);
  });
}

pigp_status pigp_gp_log_marginal_likelihood(const pigp_gp* gp, double* out) {
  return guarded([&] {
    need(gp, "gp");
    need(out, "out");
    *out = gp->model.log_marginal_likelihood();
  });
}

void pigp_gp_free(pigp_gp* gp) { delete gp; }

pigp_status pigp_rrgp_fit(const double* X, size_t n, size_t dim, const double* y, const char* kernel_json,
                          const char* domain_json, double noise_variance, pigp_rrgp** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    const pigp::Dataset d = dataset_from(X, n, dim, y);
    *out = new pigp_rrgp{pigp::fit_reduced(d, domain_from(domain_json), kernel_from(kernel_json), noise_variance)};
  });
}

pigp_status pigp_rrgp_predict(const pigp_rrgp* gp, const double* X_star, size_t m, double* mean, double* variance) {
  return guarded([&] {
    need(gp, "gp");
    need(X_star, "X_star");
    need(mean, "mean");
    const auto dim = static_cast<Eigen::Index>(gp->model.basis().domain.dimension());
    const Eigen::MatrixXd Xs = Eigen::Map<const RowMajor>(X_star, static_cast<Eigen::Index>(m), dim);
    write_prediction(pigp::predict_reduced(gp->model, Xs), mean, variance);
  });
}

pigp_status pigp_rrgp_log_marginal_likelihood(const pigp_rrgp* gp, double* out) {
  return guarded([&] {
    need(gp, "gp");
    need(out, "out");
    *out = gp->model.log_marginal_likelihood();
  });
}

void pigp_rrgp_free(pigp_rrgp* gp) { delete gp; }

pigp_status pigp_nmse(const double* y, const double* f, size_t n, double* out) {
  return guarded([&] {
    need(y, "y");
    need(f, "f");
    need(out, "out");
    const auto k = static_cast<Eigen::Index>(n);
    *out = pigp::nmse(Eigen::Map<const Eigen::VectorXd>(y, k), Eigen::Map<const Eigen::VectorXd>(f, k));
  });
}

pigp_status pigp_coverage(const double* train, size_t n_train, const double* test, size_t n_test, size_t dim,
                          double* out) {
  return guarded([&] {
    need(train, "train");
    need(test, "test");
    need(out, "out");
    const auto d = static_cast<Eigen::Index>(dim);
    *out = pigp::coverage_metric(Eigen::Map<const RowMajor>(train, static_cast<Eigen::Index>(n_train), d),
                                 Eigen::Map<const RowMajor>(test, static_cast<Eigen::Index>(n_test), d));
  });
}

pigp_status pigp_run_experiment(const char* config_path, const char* output_dir, char** report_json) {
  return guarded([&] {
    need(config_path, "config_path");
    need(report_json, "report_json");
    *report_json = nullptr;
    const auto cfg = pigp::load_config(config_path);
    *report_json = copy_string(run_report(pigp::run_experiment(cfg, opt(output_dir))));
  });
}

pigp_status pigp_run_latent_force(const char* config_path, const char* output_dir, char** report_json) {
  return guarded([&] {
    need(config_path, "config_path");
    need(report_json, "report_json");
    *report_json = nullptr;
    const auto cfg = pigp::load_config(config_path);
    pigp::require(cfg.task == pigp::Task::LatentForce, pigp::ErrorKind::Config,
                  "task: expected LatentForce, found " + pigp::to_string(cfg.task));
    *report_json = copy_string(run_report(pigp::run_experiment(cfg, opt(output_dir))));
  });
}

pigp_status pigp_generate(const char* spec_path, const char* output_dir, char** report_json) {
  return guarded([&] {
    need(spec_path, "spec_path");
    need(output_dir, "output_dir");
    need(report_json, "report_json");
    *report_json = nullptr;
    std::string text;
    try {
      text = pigp::read_file(spec_path);
    } catch (const pigp::Error& e) {
      pigp::fail(pigp::ErrorKind::Config, e.what());
    }
    *report_json = copy_string(pigp::generate_to_dir(pigp::parse_generator(text), output_dir));
  });
}

pigp_status pigp_predict(const char* model_dir, const char* data_csv, const char* output_dir, char** report_json) {
  return guarded([&] {
    need(model_dir, "model_dir");
    need(data_csv, "data_csv");
    need(report_json, "report_json");
    *report_json = nullptr;
    *report_json = copy_string(run_report(pigp::predict_saved(model_dir, data_csv, opt(output_dir))));
  });
}

pigp_status pigp_eval(const char* pred_csv, const char* truth_csv, const char* column, char** report_json) {
  return guarded([&] {
    need(pred_csv, "pred_csv");
    need(truth_csv, "truth_csv");
    need(report_json, "report_json");
    *report_json = nullptr;
    *report_json = copy_string(pigp::evaluate_csv(pred_csv, truth_csv, opt(column)));
  });
}

}  // extern "C"
