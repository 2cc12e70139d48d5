#include "serw/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace serw::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

// Reads the members of one JSON object and remembers which were consumed, so
// anything left over can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const Json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(path_, "expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  template <class T>
  void read(const std::string& key, T& out) {
    if (const Json* v = find(key)) out = convert<T>(*v, path(key));
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) fail(path(it.key()), "unknown key");
  }

  template <class T>
  static T convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(where, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
      return v.get<std::uint64_t>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(where, "expected an integer");
      return v.get<T>();
    } else {
      if (!v.is_number()) fail(where, "expected a number");
      return v.get<T>();
    }
  }

 private:
  const Json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class T>
std::vector<T> read_array(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(where, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(ObjectReader::convert<T>(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// Either an explicit array or {"hi": .., "lo": .., "points": ..}.
std::vector<double> read_grid(const Json& v, const std::string& where) {
  if (v.is_array()) return read_array<double>(v, where);
  ObjectReader r(v, where);
  double hi = 0, lo = 0;
  int points = 0;
  r.read("hi", hi);
  r.read("lo", lo);
  r.read("points", points);
  r.finish();
  try {
    return log_grid(hi, lo, points);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

TailSpec parse_tail(const Json& v, const std::string& where) {
  ObjectReader r(v, where);
  std::string family_name = "point_mass";
  r.read("family", family_name);
  const auto family = parse_tail_family(family_name);
  if (!family) fail(r.path("family"), "unknown tail family '" + family_name + "'");
  try {
    TailSpec spec = TailSpec::point_mass();
    switch (*family) {
      case TailFamily::HalfCauchy: {
        double gamma = 1.0;
        r.read("gamma", gamma);
        spec = TailSpec::half_cauchy(gamma);
        break;
      }
      case TailFamily::Pareto: {
        double j = 0.5;
        r.read("j", j);
        spec = TailSpec::pareto(j);
        break;
      }
      case TailFamily::Exponential: {
        double rate = 1.0;
        r.read("rate", rate);
        spec = TailSpec::exponential(rate);
        break;
      }
      case TailFamily::LogSquared: spec = TailSpec::log_squared(); break;
      case TailFamily::PointMass: break;
    }
    r.finish();
    return spec;
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

ModelSpec parse_model(const Json& v, const std::string& where) {
  ObjectReader r(v, where);
  ModelSpec m;
  r.read("dimension", m.dimension);
  r.read("delta", m.delta);
  std::string kind = m.delta == 0.0 ? "none" : "deterministic";
  r.read("perturbation", kind);
  const auto p = parse_perturbation(kind);
  if (!p) fail(r.path("perturbation"), "unknown perturbation '" + kind + "'");
  m.perturbation = *p;
  if (const Json* t = r.find("tail")) m.tail = parse_tail(*t, r.path("tail"));
  if (const Json* s = r.find("scale_rule")) {
    ObjectReader sr(*s, r.path("scale_rule"));
    sr.read("exponent", m.scale_rule.exponent);
    sr.finish();
  }
  r.finish();
  return m;
}

void parse_series(ObjectReader& r, SeriesOptions& s) {
  r.read("tolerance", s.tolerance);
  r.read("max_terms", s.max_terms);
  r.read("divergence_probe_terms", s.divergence_probe_terms);
}

void parse_msd(const Json& v, const std::string& where, MsdConfig& m) {
  ObjectReader r(v, where);
  r.read("n_steps", m.n_steps);
  r.read("n_walkers", m.n_walkers);
  r.read("master_seed", m.master_seed);
  r.read("tau_bins", m.tau_bins);
  r.read("window", m.window);
  r.read("probe", m.probe);
  r.read("trace", m.trace);
  std::string kernel = "serw";
  r.read("kernel", kernel);
  if (kernel != "serw" && kernel != "simple_walk")
    fail(r.path("kernel"), "expected 'serw' or 'simple_walk'");
  m.simple_walk = kernel == "simple_walk";
  if (m.n_steps < 1) fail(r.path("n_steps"), "must be >= 1");

  m.checkpoints.clear();
  const Json* cp = r.find("checkpoints");
  if (cp && cp->is_array()) {
    m.checkpoints = read_array<std::int64_t>(*cp, r.path("checkpoints"));
  } else {
    std::string spacing = m.probe ? "log" : "pow2";
    int per_decade = 4;
    std::int64_t stride = 0;
    if (cp) {
      ObjectReader cr(*cp, r.path("checkpoints"));
      cr.read("spacing", spacing);
      cr.read("per_decade", per_decade);
      cr.read("stride", stride);
      cr.finish();
    }
    try {
      if (spacing == "pow2") m.checkpoints = power_of_two_checkpoints(m.n_steps);
      else if (spacing == "log") m.checkpoints = log_checkpoints(m.n_steps, per_decade);
      else if (spacing == "linear") m.checkpoints = linear_checkpoints(m.n_steps, stride);
      else fail(r.path("checkpoints.spacing"), "expected 'pow2', 'log' or 'linear'");
    } catch (const ConfigError& e) {
      fail(r.path("checkpoints"), e.what());
    }
  }
  r.finish();
}

void parse_fit(const Json& v, const std::string& where, FitConfig& f) {
  ObjectReader r(v, where);
  if (const Json* fam = r.find("families")) {
    f.families.clear();
    for (const auto& name : read_array<std::string>(*fam, r.path("families"))) {
      const auto family = parse_scaling_family(name);
      if (!family) fail(r.path("families"), "unknown scaling family '" + name + "'");
      f.families.push_back(*family);
    }
    if (f.families.empty()) fail(r.path("families"), "must not be empty");
  }
  if (const Json* nu0 = r.find("nu0")) {
    if (nu0->is_number()) {
      f.nu0_mode = Nu0Mode::Given;
      f.nu0 = nu0->get<double>();
    } else if (nu0->is_string() && *nu0 == "analytic") {
      f.nu0_mode = Nu0Mode::Analytic;
    } else if (nu0->is_string() && *nu0 == "fitted") {
      f.nu0_mode = Nu0Mode::Fitted;
    } else {
      fail(r.path("nu0"), "expected a number, 'analytic' or 'fitted'");
    }
  }
  if (const Json* in = r.find("input"))
    f.input = ObjectReader::convert<std::string>(*in, r.path("input"));
  r.finish();
}

void parse_rate_check(const Json& v, const std::string& where, RateCheckConfig& rc) {
  ObjectReader r(v, where);
  if (const Json* k = r.find("k")) rc.k = read_grid(*k, r.path("k"));
  if (const Json* d = r.find("dimensions")) rc.dimensions = read_array<int>(*d, r.path("dimensions"));
  if (const Json* g = r.find("gamma_points")) {
    const std::string gp = r.path("gamma_points");
    if (!g->is_array()) fail(gp, "expected an array of [s, x] pairs");
    rc.gamma_points.clear();
    for (std::size_t i = 0; i < g->size(); ++i) {
      const auto pair = read_array<double>((*g)[i], gp + "[" + std::to_string(i) + "]");
      if (pair.size() != 2) fail(gp + "[" + std::to_string(i) + "]", "expected [s, x]");
      rc.gamma_points.emplace_back(pair[0], pair[1]);
    }
  }
  r.finish();
}

void validate(const RunConfig& c) {
  try {
    c.model.validate();
  } catch (const std::invalid_argument& e) {
    fail("$.model", e.what());
  }
  if (c.tau.n_max < 1) fail("$.tau.n_max", "must be >= 1");
  for (const auto* s : {&c.tau.series, &c.sweep.series}) {
    if (!(s->tolerance > 0.0)) fail("$", "tolerance must be positive");
    if (s->max_terms < 1) fail("$", "max_terms must be >= 1");
  }
  EnsembleConfig e;
  e.model = c.model;
  e.n_steps = c.msd.n_steps;
  e.n_walkers = c.msd.n_walkers;
  e.checkpoints = c.msd.checkpoints;
  e.tau_bins = c.msd.tau_bins;
  try {
    e.validate();
  } catch (const ConfigError& err) {
    fail("$.msd", err.what());
  }
  if (!(c.msd.window > 0.0 && c.msd.window <= 1.0)) fail("$.msd.window", "must lie in (0, 1]");
  if (c.msd.trace && c.msd.n_walkers > 100) fail("$.msd.trace", "needs n_walkers <= 100");
  if (c.msd.probe && (c.model.dimension != 1 || c.model.perturbation != Perturbation::None))
    fail("$.msd.probe", "needs dimension 1 and delta 0");
  for (std::size_t i = 0; i < c.sweep.grid.size(); ++i) {
    if (!(c.sweep.grid[i] > 0.0 && c.sweep.grid[i] < 0.5))
      fail("$.sweep.delta_grid", "values must lie in (0, 0.5)");
    if (i > 0 && !(c.sweep.grid[i] < c.sweep.grid[i - 1]))
      fail("$.sweep.delta_grid", "must be strictly decreasing");
  }
  for (double k : c.rate_check.k)
    if (!(k > 0.0)) fail("$.rate_check.k", "values must be positive");
  for (int d : c.rate_check.dimensions)
    if (d < 1) fail("$.rate_check.dimensions", "values must be >= 1");
  for (const auto& [s, x] : c.rate_check.gamma_points)
    if (!(x > 0.0)) fail("$.rate_check.gamma_points", "x must be positive");
}

Json tail_json(const TailSpec& t) {
  Json j;
  j["family"] = std::string(to_string(t.family()));
  switch (t.family()) {
    case TailFamily::HalfCauchy: j["gamma"] = t.parameter(); break;
    case TailFamily::Pareto: j["j"] = t.parameter(); break;
    case TailFamily::Exponential: j["rate"] = t.parameter(); break;
    default: break;
  }
  return j;
}

Json series_json(const SeriesOptions& s) {
  return Json{{"tolerance", s.tolerance},
              {"max_terms", s.max_terms},
              {"divergence_probe_terms", s.divergence_probe_terms}};
}

}  // namespace

RunConfig parse_config(const Json& doc) {
  RunConfig c;
  ObjectReader r(doc, "$");
  if (const Json* m = r.find("model")) c.model = parse_model(*m, "$.model");
  if (const Json* t = r.find("tau")) {
    ObjectReader tr(*t, "$.tau");
    tr.read("n_max", c.tau.n_max);
    parse_series(tr, c.tau.series);
    tr.finish();
  }
  if (const Json* m = r.find("msd")) {
    parse_msd(*m, "$.msd", c.msd);
  } else {
    c.msd.checkpoints = power_of_two_checkpoints(c.msd.n_steps);
  }
  if (const Json* s = r.find("sweep")) {
    ObjectReader sr(*s, "$.sweep");
    if (const Json* g = sr.find("delta_grid")) c.sweep.grid = read_grid(*g, sr.path("delta_grid"));
    parse_series(sr, c.sweep.series);
    sr.finish();
  }
  if (const Json* f = r.find("fit")) parse_fit(*f, "$.fit", c.fit);
  if (const Json* rc = r.find("rate_check")) parse_rate_check(*rc, "$.rate_check", c.rate_check);
  if (const Json* o = r.find("output")) {
    ObjectReader orr(*o, "$.output");
    orr.read("dir", c.out_dir);
    orr.finish();
  }
  r.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

Json to_json(const RunConfig& c) {
  Json model{{"dimension", c.model.dimension},
             {"perturbation", std::string(to_string(c.model.perturbation))},
             {"delta", c.model.delta},
             {"tail", tail_json(c.model.tail)},
             {"scale_rule", Json{{"exponent", c.model.scale_rule.exponent}}}};

  Json tau = series_json(c.tau.series);
  tau["n_max"] = c.tau.n_max;

  Json msd{{"n_steps", c.msd.n_steps},
           {"n_walkers", c.msd.n_walkers},
           {"checkpoints", c.msd.checkpoints},
           {"master_seed", c.msd.master_seed},
           {"tau_bins", c.msd.tau_bins},
           {"window", c.msd.window},
           {"probe", c.msd.probe},
           {"kernel", c.msd.simple_walk ? "simple_walk" : "serw"},
           {"trace", c.msd.trace}};

  Json sweep = series_json(c.sweep.series);
  sweep["delta_grid"] = c.sweep.grid;

  Json fit;
  Json families = Json::array();
  for (auto f : c.fit.families) families.push_back(std::string(to_string(f)));
  fit["families"] = families;
  switch (c.fit.nu0_mode) {
    case Nu0Mode::Analytic: fit["nu0"] = "analytic"; break;
    case Nu0Mode::Fitted: fit["nu0"] = "fitted"; break;
    case Nu0Mode::Given: fit["nu0"] = c.fit.nu0; break;
  }
  if (c.fit.input) fit["input"] = *c.fit.input;

  Json gamma = Json::array();
  for (const auto& [s, x] : c.rate_check.gamma_points) gamma.push_back(Json::array({s, x}));
  Json rate{{"k", c.rate_check.k}, {"dimensions", c.rate_check.dimensions}, {"gamma_points", gamma}};

  return Json{{"model", model}, {"tau", tau},     {"msd", msd},
              {"sweep", sweep}, {"fit", fit},     {"rate_check", rate},
              {"output", Json{{"dir", c.out_dir}}}};
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.delta) {
    try {
      cfg.model = cfg.model.with_delta(*o.delta);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--delta: ") + e.what());
    }
  }
  if (o.seed) cfg.msd.master_seed = *o.seed;
  if (o.out) cfg.out_dir = *o.out;
  validate(cfg);
}

int threads_from_env() {
  const char* raw = std::getenv("SERW_THREADS");
  if (raw == nullptr || *raw == '\0')
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::istringstream in(raw);
  int n = 0;
  if (!(in >> n) || !in.eof() || n < 1)
    throw ConfigError(std::string("SERW_THREADS must be a positive integer, got '") + raw + "'");
  return n;
}

}  // namespace serw::cli
