#include <set>

#include <json.hpp>

#include "pigp/error.hpp"
#include "pigp/experiment.hpp"

namespace pigp {

using nlohmann::json;

namespace {

// Strict object reader: remembers which keys were read and rejects the rest.
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), ErrorKind::Config, where() + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  void opt(const char* key, T& out) {
    used_.insert(key);
    if (!has(key)) return;
    out = as<T>(j_.at(key), key);
  }

  template <class T>
  T req(const char* key) {
    used_.insert(key);
    require(has(key), ErrorKind::Config, where() + ": missing required key '" + key + "'");
    return as<T>(j_.at(key), key);
  }

  const json* sub(const char* key) {
    used_.insert(key);
    return has(key) ? &j_.at(key) : nullptr;
  }

  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items())
      require(used_.count(item.key()) > 0, ErrorKind::Config, where() + ": unknown key '" + item.key() + "'");
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  template <class T>
  T as(const json& v, const char* key) const {
    if constexpr (std::is_floating_point_v<T>) {
      require(v.is_number(), ErrorKind::Config, path(key) + ": expected a number");
    } else if constexpr (std::is_same_v<T, bool>) {
      require(v.is_boolean(), ErrorKind::Config, path(key) + ": expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      require(v.is_number_integer(), ErrorKind::Config, path(key) + ": expected an integer");
      if constexpr (std::is_unsigned_v<T>)
        require(v.is_number_unsigned() || v.get<long long>() >= 0, ErrorKind::Config,
                path(key) + ": expected a non-negative integer");
    } else if constexpr (std::is_same_v<T, std::string>) {
      require(v.is_string(), ErrorKind::Config, path(key) + ": expected a string");
    }
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(ErrorKind::Config, path(key) + ": wrong value type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Re-raise library validation failures as configuration errors.
template <class F>
void validated(const std::string& what, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) fail(ErrorKind::Config, what + ": " + e.what());
    throw;
  }
}

template <class E>
E pick(const std::string& path, const std::string& value, std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [n, e] : options) {
    if (value == n) return e;
    names += names.empty() ? n : std::string(", ") + n;
  }
  fail(ErrorKind::Config, path + ": unknown value '" + value + "' (expected one of " + names + ")");
}

template <class E>
std::string name_of(E value, std::initializer_list<std::pair<const char*, E>> options) {
  for (const auto& [n, e] : options)
    if (e == value) return n;
  return "?";
}

const std::initializer_list<std::pair<const char*, Task>> kTasks{{"ExactGp", Task::ExactGp},
                                                                  {"Narx", Task::Narx},
                                                                  {"ReducedRank", Task::ReducedRank},
                                                                  {"LatentForce", Task::LatentForce}};
const std::initializer_list<std::pair<const char*, GeneratorSpec::Type>> kGenerators{
    {"sdof", GeneratorSpec::Type::Sdof},
    {"mdof_chain", GeneratorSpec::Type::MdofChain},
    {"trend", GeneratorSpec::Type::Trend},
    {"morison", GeneratorSpec::Type::Morison},
    {"bounded_field", GeneratorSpec::Type::BoundedField}};
const std::initializer_list<std::pair<const char*, ForcingSpec::Type>> kForcing{
    {"white_noise", ForcingSpec::Type::WhiteNoise},
    {"band_limited", ForcingSpec::Type::BandLimited},
    {"zero", ForcingSpec::Type::Zero}};
const std::initializer_list<std::pair<const char*, SplitSpec::Type>> kSplits{{"natural", SplitSpec::Type::Natural},
                                                                             {"stride", SplitSpec::Type::Stride},
                                                                             {"fraction", SplitSpec::Type::Fraction},
                                                                             {"index", SplitSpec::Type::Index},
                                                                             {"all", SplitSpec::Type::All}};
const std::initializer_list<std::pair<const char*, MeanConfig::Form>> kMeans{{"zero", MeanConfig::Form::Zero},
                                                                             {"linear", MeanConfig::Form::Linear},
                                                                             {"morison", MeanConfig::Form::Morison}};

// ---- readers ----

ForcingSpec read_forcing(const json& j, const std::string& path) {
  Obj o(j, path);
  ForcingSpec f;
  f.type = pick(o.path("type"), o.req<std::string>("type"), kForcing);
  o.opt("sigma", f.sigma);
  o.opt("f_lo", f.f_lo);
  o.opt("f_hi", f.f_hi);
  o.opt("components", f.components);
  o.finish();
  require(std::isfinite(f.sigma) && f.sigma >= 0.0, ErrorKind::Config, path + ".sigma: must be >= 0");
  if (f.type == ForcingSpec::Type::BandLimited)
    require(f.f_lo > 0.0 && f.f_hi >= f.f_lo && f.components >= 1, ErrorKind::Config,
            path + ": band needs 0 < f_lo <= f_hi and components >= 1");
  return f;
}

std::vector<ObservationChannel> read_channels(const json& j, const std::string& path) {
  require(j.is_array(), ErrorKind::Config, path + ": expected an array");
  std::vector<ObservationChannel> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Obj o(j[i], path + "[" + std::to_string(i) + "]");
    ObservationChannel ch;
    ch.quantity = observable_from_string(o.req<std::string>("quantity"));
    ch.dof = o.req<int>("dof");
    o.finish();
    out.push_back(ch);
  }
  return out;
}

GeneratorSpec read_generator(const json& j, const std::string& path) {
  Obj o(j, path);
  GeneratorSpec g;
  g.type = pick(o.path("type"), o.req<std::string>("type"), kGenerators);
  o.opt("seed", g.seed);
  switch (g.type) {
    case GeneratorSpec::Type::Sdof: {
      auto& s = g.sdof;
      o.opt("m", s.m);
      o.opt("c", s.c);
      o.opt("k", s.k);
      o.opt("k3", s.k3);
      o.opt("dt", s.dt);
      o.opt("steps", s.steps);
      o.opt("y0", s.y0);
      o.opt("v0", s.v0);
      if (const json* f = o.sub("forcing")) g.forcing = read_forcing(*f, o.path("forcing"));
      require(s.m > 0.0 && s.dt > 0.0 && s.steps >= 2, ErrorKind::Config, path + ": need m > 0, dt > 0, steps >= 2");
      break;
    }
    case GeneratorSpec::Type::MdofChain: {
      auto& c = g.chain;
      o.opt("masses", c.masses);
      o.opt("dampings", c.dampings);
      o.opt("stiffnesses", c.stiffnesses);
      o.opt("force_dof", c.force_dof);
      if (const json* ch = o.sub("observed")) c.observed = read_channels(*ch, o.path("observed"));
      o.opt("dt", c.dt);
      o.opt("steps", c.steps);
      o.opt("noise_fraction", c.noise_fraction);
      o.opt("initial_displacement", c.initial_displacement);
      o.opt("initial_velocity", c.initial_velocity);
      if (const json* f = o.sub("forcing")) g.forcing = read_forcing(*f, o.path("forcing"));
      require(c.dt > 0.0 && c.steps >= 2 && c.noise_fraction >= 0.0, ErrorKind::Config,
              path + ": need dt > 0, steps >= 2, noise_fraction >= 0");
      require(!c.observed.empty(), ErrorKind::Config, path + ".observed: at least one channel is required");
      validated(path, [&] { make_chain(c.masses, c.dampings, c.stiffnesses, c.force_dof, c.observed).validate(); });
      break;
    }
    case GeneratorSpec::Type::Trend: {
      auto& t = g.trend;
      o.opt("days", t.days);
      o.opt("samples_per_day", t.samples_per_day);
      o.opt("temp_start", t.temp_start);
      o.opt("temp_end", t.temp_end);
      o.opt("daily_temp_amplitude", t.daily_temp_amplitude);
      o.opt("weather_sigma", t.weather_sigma);
      o.opt("theta0", t.theta0);
      o.opt("slope", t.slope);
      o.opt("periodic_amplitude", t.periodic_amplitude);
      o.opt("noise", t.noise);
      o.opt("train_fraction", t.train_fraction);
      require(t.days > 0.0 && t.samples_per_day >= 1 && t.train_fraction > 0.0 && t.train_fraction < 1.0 &&
                  t.noise >= 0.0,
              ErrorKind::Config, path + ": need days > 0, samples_per_day >= 1, 0 < train_fraction < 1, noise >= 0");
      break;
    }
    case GeneratorSpec::Type::Morison: {
      auto& m = g.morison;
      o.opt("steps", m.steps);
      o.opt("dt", m.dt);
      o.opt("drag", m.drag);
      o.opt("inertia", m.inertia);
      o.opt("discrepancy", m.discrepancy);
      o.opt("amplitude", m.amplitude);
      o.opt("components", m.components);
      o.opt("f_lo", m.f_lo);
      o.opt("f_hi", m.f_hi);
      o.opt("noise", m.noise);
      require(m.steps >= 2 && m.dt > 0.0 && m.components >= 1 && m.f_lo > 0.0 && m.f_hi >= m.f_lo && m.noise >= 0.0,
              ErrorKind::Config, path + ": invalid morison series parameters");
      break;
    }
    case GeneratorSpec::Type::BoundedField: {
      auto& f = g.field;
      o.opt("half_widths", f.field.half_widths);
      if (const json* b = o.sub("boundary")) {
        require(b->is_string(), ErrorKind::Config, o.path("boundary") + ": expected a string");
        f.field.boundary = boundary_from_string(b->get<std::string>());
      }
      o.opt("modes", f.field.modes);
      o.opt("sigma_f", f.field.sigma_f);
      o.opt("lengthscale", f.field.lengthscale);
      o.opt("noise", f.field.noise);
      o.opt("train_per_dim", f.train_per_dim);
      o.opt("test_per_dim", f.test_per_dim);
      require(!f.field.half_widths.empty() && f.field.modes >= 1 && f.field.sigma_f > 0.0 &&
                  f.field.lengthscale > 0.0 && f.field.noise >= 0.0 && f.train_per_dim >= 1 && f.test_per_dim >= 1,
              ErrorKind::Config, path + ": invalid bounded field parameters");
      for (double L : f.field.half_widths) require(L > 0.0, ErrorKind::Config, path + ".half_widths: must be positive");
      break;
    }
  }
  o.finish();
  return g;
}

DataSource read_source(const json& j, const std::string& path) {
  Obj o(j, path);
  DataSource s;
  if (const json* g = o.sub("generator")) s.generator = read_generator(*g, o.path("generator"));
  std::string csv;
  o.opt("csv", csv);
  if (!csv.empty()) s.csv = csv;
  o.finish();
  require(s.generator.has_value() != s.csv.has_value(), ErrorKind::Config,
          path + ": give exactly one of 'generator' or 'csv'");
  return s;
}

KernelConfig read_kernel(const json& j, const std::string& path) {
  Obj o(j, path);
  KernelConfig k;
  k.family = kernel_family_from_string(o.req<std::string>("family"));
  o.opt("sigma_f", k.sigma_f);
  o.opt("lengthscales", k.lengthscales);
  o.opt("zeta", k.zeta);
  o.opt("omega_n", k.omega_n);
  o.opt("sigma2", k.sigma2);
  o.opt("standardize", k.standardize);
  o.finish();
  validated(path, [&] { k.to_spec().validate(); });
  return k;
}

MeanConfig read_mean(const json& j, const std::string& path) {
  Obj o(j, path);
  MeanConfig m;
  m.form = pick(o.path("form"), o.req<std::string>("form"), kMeans);
  o.opt("fit", m.fit);
  o.opt("theta0", m.theta0);
  o.opt("theta", m.theta);
  o.opt("drag", m.drag);
  o.opt("inertia", m.inertia);
  o.finish();
  return m;
}

DomainSpec read_domain(const json& j, const std::string& path) {
  Obj o(j, path);
  DomainSpec d;
  d.half_widths = o.req<std::vector<double>>("half_widths");
  o.opt("center", d.center);
  if (const json* b = o.sub("boundary")) {
    require(b->is_string(), ErrorKind::Config, o.path("boundary") + ": expected a string");
    d.boundary = boundary_from_string(b->get<std::string>());
  }
  d.basis_counts = o.req<std::vector<int>>("basis_counts");
  int cap = 0;
  o.opt("max_total", cap);
  if (o.has("max_total")) d.max_total = cap;
  o.finish();
  validated(path, [&] { d.validate(); });
  return d;
}

StructureConfig read_structure(const json& j, const std::string& path) {
  Obj o(j, path);
  StructureConfig s;
  s.masses = o.req<std::vector<double>>("masses");
  s.dampings = o.req<std::vector<double>>("dampings");
  s.stiffnesses = o.req<std::vector<double>>("stiffnesses");
  o.opt("force_dof", s.force_dof);
  if (const json* ch = o.sub("observed")) s.observed = read_channels(*ch, o.path("observed"));
  o.finish();
  validated(path, [&] { make_chain(s.masses, s.dampings, s.stiffnesses, s.force_dof, s.observed).validate(); });
  return s;
}

ModelSpec read_model(const json& j, const std::string& path) {
  Obj o(j, path);
  ModelSpec m;
  o.opt("inputs", m.inputs);
  o.opt("target", m.target);
  if (const json* k = o.sub("kernel")) m.kernel = read_kernel(*k, o.path("kernel"));
  if (const json* mean = o.sub("mean")) m.mean = read_mean(*mean, o.path("mean"));
  o.opt("noise_variance", m.noise_variance);
  o.opt("lags_u", m.lags_u);
  o.opt("lags_y", m.lags_y);
  if (const json* mode = o.sub("narx_mode")) {
    require(mode->is_string(), ErrorKind::Config, o.path("narx_mode") + ": expected a string");
    m.narx_mode = narx_mode_from_string(mode->get<std::string>());
  }
  if (const json* d = o.sub("domain")) m.domain = read_domain(*d, o.path("domain"));
  o.opt("compare_full", m.compare_full);
  if (const json* s = o.sub("structure")) m.structure = read_structure(*s, o.path("structure"));
  if (const json* fp = o.sub("force_prior")) {
    Obj p(*fp, o.path("force_prior"));
    p.opt("nu", m.force_prior.nu);
    p.opt("sigma", m.force_prior.sigma);
    p.opt("lengthscale", m.force_prior.lengthscale);
    p.finish();
    require(m.force_prior.nu == 0.5 || m.force_prior.nu == 1.5, ErrorKind::Config,
            o.path("force_prior") + ".nu: must be 0.5 or 1.5");
    require(m.force_prior.sigma > 0.0 && m.force_prior.lengthscale > 0.0, ErrorKind::Config,
            o.path("force_prior") + ": sigma and lengthscale must be positive");
  }
  o.opt("noise_variances", m.noise_variances);
  o.opt("initial_state_var", m.initial_state_var);
  o.finish();
  require(std::isfinite(m.noise_variance) && m.noise_variance >= 0.0, ErrorKind::Config,
          path + ".noise_variance: must be >= 0");
  for (double v : m.noise_variances)
    require(std::isfinite(v) && v > 0.0, ErrorKind::Config, path + ".noise_variances: must be positive");
  require(m.initial_state_var >= 0.0, ErrorKind::Config, path + ".initial_state_var: must be >= 0");
  validated(path, [&] { NarxConfig{m.lags_u, m.lags_y, m.narx_mode, {}}.validate(); });
  return m;
}

PsoConfig read_pso(Obj& o, const std::string& path) {
  PsoConfig p;
  o.opt("particles", p.particles);
  o.opt("iterations", p.iterations);
  o.opt("inertia", p.inertia);
  o.opt("cognitive", p.cognitive);
  o.opt("social", p.social);
  o.opt("seed", p.seed);
  if (const json* b = o.sub("bounds")) {
    require(b->is_array(), ErrorKind::Config, o.path("bounds") + ": expected an array");
    for (std::size_t i = 0; i < b->size(); ++i) {
      Obj bo((*b)[i], o.path("bounds") + "[" + std::to_string(i) + "]");
      ParamBound pb;
      pb.name = bo.req<std::string>("name");
      pb.lower = bo.req<double>("lower");
      pb.upper = bo.req<double>("upper");
      bo.opt("log_scale", pb.log_scale);
      bo.finish();
      p.bounds.push_back(pb);
    }
  }
  (void)path;
  return p;
}

// ---- writers ----

json write_forcing(const ForcingSpec& f) {
  return {{"type", name_of(f.type, kForcing)},
          {"sigma", f.sigma},
          {"f_lo", f.f_lo},
          {"f_hi", f.f_hi},
          {"components", f.components}};
}

json write_channels(const std::vector<ObservationChannel>& chans) {
  json a = json::array();
  for (const auto& c : chans) a.push_back({{"quantity", to_string(c.quantity)}, {"dof", c.dof}});
  return a;
}

json write_generator(const GeneratorSpec& g) {
  json j{{"type", name_of(g.type, kGenerators)}, {"seed", g.seed}};
  switch (g.type) {
    case GeneratorSpec::Type::Sdof: {
      const auto& s = g.sdof;
      j.update({{"m", s.m}, {"c", s.c}, {"k", s.k}, {"k3", s.k3}, {"dt", s.dt}, {"steps", s.steps}, {"y0", s.y0},
                {"v0", s.v0}, {"forcing", write_forcing(g.forcing)}});
      break;
    }
    case GeneratorSpec::Type::MdofChain: {
      const auto& c = g.chain;
      j.update({{"masses", c.masses},
                {"dampings", c.dampings},
                {"stiffnesses", c.stiffnesses},
                {"force_dof", c.force_dof},
                {"observed", write_channels(c.observed)},
                {"dt", c.dt},
                {"steps", c.steps},
                {"noise_fraction", c.noise_fraction},
                {"initial_displacement", c.initial_displacement},
                {"initial_velocity", c.initial_velocity},
                {"forcing", write_forcing(g.forcing)}});
      break;
    }
    case GeneratorSpec::Type::Trend: {
      const auto& t = g.trend;
      j.update({{"days", t.days},
                {"samples_per_day", t.samples_per_day},
                {"temp_start", t.temp_start},
                {"temp_end", t.temp_end},
                {"daily_temp_amplitude", t.daily_temp_amplitude},
                {"weather_sigma", t.weather_sigma},
                {"theta0", t.theta0},
                {"slope", t.slope},
                {"periodic_amplitude", t.periodic_amplitude},
                {"noise", t.noise},
                {"train_fraction", t.train_fraction}});
      break;
    }
    case GeneratorSpec::Type::Morison: {
      const auto& m = g.morison;
      j.update({{"steps", m.steps},
                {"dt", m.dt},
                {"drag", m.drag},
                {"inertia", m.inertia},
                {"discrepancy", m.discrepancy},
                {"amplitude", m.amplitude},
                {"components", m.components},
                {"f_lo", m.f_lo},
                {"f_hi", m.f_hi},
                {"noise", m.noise}});
      break;
    }
    case GeneratorSpec::Type::BoundedField: {
      const auto& f = g.field;
      j.update({{"half_widths", f.field.half_widths},
                {"boundary", to_string(f.field.boundary)},
                {"modes", f.field.modes},
                {"sigma_f", f.field.sigma_f},
                {"lengthscale", f.field.lengthscale},
                {"noise", f.field.noise},
                {"train_per_dim", f.train_per_dim},
                {"test_per_dim", f.test_per_dim}});
      break;
    }
  }
  return j;
}

json write_source(const DataSource& s) {
  json j = json::object();
  if (s.generator) j["generator"] = write_generator(*s.generator);
  if (s.csv) j["csv"] = *s.csv;
  return j;
}

json write_model(const ModelSpec& m) {
  const auto& k = m.kernel;
  json j{{"inputs", m.inputs},
         {"target", m.target},
         {"kernel",
          {{"family", to_string(k.family)},
           {"sigma_f", k.sigma_f},
           {"lengthscales", k.lengthscales},
           {"zeta", k.zeta},
           {"omega_n", k.omega_n},
           {"sigma2", k.sigma2},
           {"standardize", k.standardize}}},
         {"mean",
          {{"form", name_of(m.mean.form, kMeans)},
           {"fit", m.mean.fit},
           {"theta0", m.mean.theta0},
           {"theta", m.mean.theta},
           {"drag", m.mean.drag},
           {"inertia", m.mean.inertia}}},
         {"noise_variance", m.noise_variance},
         {"lags_u", m.lags_u},
         {"lags_y", m.lags_y},
         {"narx_mode", to_string(m.narx_mode)},
         {"compare_full", m.compare_full},
         {"force_prior", {{"nu", m.force_prior.nu}, {"sigma", m.force_prior.sigma}, {"lengthscale", m.force_prior.lengthscale}}},
         {"noise_variances", m.noise_variances},
         {"initial_state_var", m.initial_state_var}};
  if (m.domain) {
    const auto& d = *m.domain;
    json dj{{"half_widths", d.half_widths},
            {"center", d.center},
            {"boundary", to_string(d.boundary)},
            {"basis_counts", d.basis_counts}};
    if (d.max_total) dj["max_total"] = *d.max_total;
    j["domain"] = dj;
  }
  if (m.structure) {
    const auto& s = *m.structure;
    j["structure"] = {{"masses", s.masses},
                      {"dampings", s.dampings},
                      {"stiffnesses", s.stiffnesses},
                      {"force_dof", s.force_dof},
                      {"observed", write_channels(s.observed)}};
  }
  return j;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string to_string(Task task) { return name_of(task, kTasks); }
Task task_from_string(const std::string& name) { return pick("task", name, kTasks); }

KernelSpec KernelConfig::to_spec() const {
  KernelSpec s;
  s.family = family;
  s.sigma_f = sigma_f;
  s.lengthscales = lengthscales;
  s.sdof = SdofKernelParams{zeta, omega_n, sigma2};
  return s;
}

ExperimentConfig parse_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  Obj o(j, "");
  ExperimentConfig c;
  o.opt("name", c.name);
  require(!c.name.empty() && c.name.find_first_of("/\\") == std::string::npos, ErrorKind::Config,
          "name: must be a non-empty plain file name");
  c.task = task_from_string(o.req<std::string>("task"));

  const json* data = o.sub("data");
  require(data != nullptr, ErrorKind::Config, "config: missing required key 'data'");
  {
    Obj d(*data, "data");
    const json* train = d.sub("train");
    require(train != nullptr, ErrorKind::Config, "data: missing required key 'train'");
    c.data.train = read_source(*train, "data.train");
    if (const json* test = d.sub("test")) c.data.test = read_source(*test, "data.test");
    d.finish();
  }

  if (const json* split = o.sub("split")) {
    Obj s(*split, "split");
    c.split.type = pick("split.type", s.req<std::string>("type"), kSplits);
    s.opt("stride", c.split.stride);
    s.opt("offset", c.split.offset);
    s.opt("fraction", c.split.fraction);
    s.opt("index", c.split.index);
    s.finish();
    require(c.split.stride >= 2 && c.split.offset >= 0 && c.split.offset < c.split.stride, ErrorKind::Config,
            "split: need stride >= 2 and 0 <= offset < stride");
    require(c.split.fraction > 0.0 && c.split.fraction < 1.0, ErrorKind::Config, "split.fraction: must lie in (0, 1)");
    require(c.split.index >= 0, ErrorKind::Config, "split.index: must be >= 0");
  }

  if (const json* model = o.sub("model")) c.model = read_model(*model, "model");

  if (const json* opt = o.sub("optimizer")) {
    Obj p(*opt, "optimizer");
    p.opt("enabled", c.optimizer.enabled);
    c.optimizer.pso = read_pso(p, "optimizer");
    p.finish();
    if (c.optimizer.enabled) validated("optimizer", [&] { c.optimizer.pso.validate(); });
  }

  std::string out;
  o.opt("output_dir", out);
  if (!out.empty()) c.output_dir = out;
  o.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return parse_config(text);
}

std::string dump_config(const ExperimentConfig& c) {
  json j{{"name", c.name},
         {"task", to_string(c.task)},
         {"data", {{"train", write_source(c.data.train)}}},
         {"split",
          {{"type", name_of(c.split.type, kSplits)},
           {"stride", c.split.stride},
           {"offset", c.split.offset},
           {"fraction", c.split.fraction},
           {"index", c.split.index}}},
         {"model", write_model(c.model)}};
  if (c.data.test) j["data"]["test"] = write_source(*c.data.test);
  json bounds = json::array();
  for (const auto& b : c.optimizer.pso.bounds)
    bounds.push_back({{"name", b.name}, {"lower", b.lower}, {"upper", b.upper}, {"log_scale", b.log_scale}});
  const auto& p = c.optimizer.pso;
  j["optimizer"] = {{"enabled", c.optimizer.enabled},
                    {"particles", p.particles},
                    {"iterations", p.iterations},
                    {"inertia", p.inertia},
                    {"cognitive", p.cognitive},
                    {"social", p.social},
                    {"seed", p.seed},
                    {"bounds", bounds}};
  if (c.output_dir) j["output_dir"] = *c.output_dir;
  return j.dump(2) + "\n";
}

GeneratorSpec parse_generator(const std::string& json_text) { return read_generator(parse_json(json_text), "generator"); }

std::string dump_generator(const GeneratorSpec& spec) { return write_generator(spec).dump(2) + "\n"; }

}  // namespace pigp
