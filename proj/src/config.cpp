#include "isovar/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "isovar/error.hpp"
#include "isovar/io.hpp"

namespace isovar::config {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"seed", "out"}},
      {"model", {"name", "a", "b", "c", "e", "t0", "numeric", "reference"}},
      {"integrator", {"method", "step", "t_end"}},
      {"reference", {"abstol", "reltol", "refine"}},
      {"observation", {"operator", "component", "start", "end", "interval", "gamma2"}},
      {"gibbs", {"burn_in", "samples", "thinning", "s_mode", "chains", "store_eta", "draws_format"}},
      {"summary", {"sigma_level", "predictive_level"}},
  };
  return keys;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return *v;
  }

  void real(const std::string& section, const std::string& key, double& out) const {
    if (auto v = raw(section, key)) out = to_real(section, key, *v);
  }

  void real(const std::string& section, const std::string& key, std::optional<double>& out) const {
    if (auto v = raw(section, key)) out = to_real(section, key, *v);
  }

  template <typename Int>
  void integer(const std::string& section, const std::string& key, Int& out) const {
    if (auto v = raw(section, key)) {
      Int parsed{};
      const auto res = std::from_chars(v->data(), v->data() + v->size(), parsed);
      if (res.ec != std::errc() || res.ptr != v->data() + v->size())
        throw ConfigError(section + "." + key, "expected a nonnegative integer, got '" + *v + "'");
      out = parsed;
    }
  }

  void text(const std::string& section, const std::string& key, std::string& out) const {
    if (auto v = raw(section, key)) out = *v;
  }

  void boolean(const std::string& section, const std::string& key, bool& out) const {
    if (auto v = raw(section, key)) {
      if (*v == "true")
        out = true;
      else if (*v == "false")
        out = false;
      else
        throw ConfigError(section + "." + key, "expected true or false, got '" + *v + "'");
    }
  }

  template <typename Enum>
  void choice(const std::string& section, const std::string& key, Enum& out,
              const std::map<std::string, Enum>& options) const {
    if (auto v = raw(section, key)) {
      const auto it = options.find(*v);
      if (it == options.end()) {
        std::string allowed;
        for (const auto& [name, value] : options) allowed += (allowed.empty() ? "" : ", ") + name;
        throw ConfigError(section + "." + key, "unknown value '" + *v + "' (expected one of: " + allowed + ")");
      }
      out = it->second;
    }
  }

 private:
  static double to_real(const std::string& section, const std::string& key, const std::string& v) {
    try {
      return io::parse_double(v);
    } catch (const io::ParseError&) {
      throw ConfigError(section + "." + key, "expected a number, got '" + v + "'");
    }
  }

  const pt::ptree& tree_;
};

const std::map<std::string, ModelKind> kModels{
    {"fn", ModelKind::fn}, {"kepler", ModelKind::kepler}, {"custom-csv", ModelKind::custom_csv}};
const std::map<std::string, IntegratorKind> kIntegrators{{"explicit_euler", IntegratorKind::explicit_euler},
                                                         {"symplectic_euler", IntegratorKind::symplectic_euler},
                                                         {"reference", IntegratorKind::reference}};
const std::map<std::string, OperatorKind> kOperators{{"component", OperatorKind::component},
                                                     {"velocity_magnitude", OperatorKind::velocity_magnitude}};
const std::map<std::string, gibbs::SUpdateMode> kSModes{{"posterior", gibbs::SUpdateMode::posterior},
                                                        {"prior", gibbs::SUpdateMode::prior}};
const std::map<std::string, DrawsFormat> kDrawsFormats{{"binary", DrawsFormat::binary}, {"csv", DrawsFormat::csv}};

template <typename Enum>
std::string name_of(const std::map<std::string, Enum>& options, Enum value) {
  for (const auto& [name, v] : options)
    if (v == value) return name;
  return "?";
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field, what);
}

}  // namespace

void RunConfig::validate() const {
  require(!out_dir.empty(), "run.out", "must not be empty");
  if (model == ModelKind::fn) require(fn.c != 0.0, "model.c", "must be nonzero");
  if (model == ModelKind::kepler) require(kepler.e >= 0.0 && kepler.e < 1.0, "model.e", "must lie in [0, 1)");
  if (model == ModelKind::custom_csv) {
    require(!numeric_file.empty(), "model.numeric", "required for custom-csv");
    require(!reference_file.empty(), "model.reference", "required for custom-csv");
  } else {
    require(step > 0.0 && std::isfinite(step), "integrator.step", "must be positive");
    require(t_end > t0, "integrator.t_end", "must be greater than model.t0");
    if (integrator == IntegratorKind::symplectic_euler)
      require(model == ModelKind::kepler, "integrator.method", "symplectic_euler needs a (q, p) split model");
    require(abstol > 0.0, "reference.abstol", "must be positive");
    require(reltol > 0.0, "reference.reltol", "must be positive");
    require(refine > 0, "reference.refine", "must be positive");
    require(obs_start >= t0, "observation.start", "must not precede model.t0");
    require(obs_end <= t_end + 1e-9 * std::max(1.0, t_end), "observation.end", "must not exceed integrator.t_end");
  }
  if (op == OperatorKind::component) {
    const std::size_t dim = model == ModelKind::fn ? 2 : model == ModelKind::kepler ? 4 : SIZE_MAX;
    require(component < dim, "observation.component", "out of range for the model dimension");
  }
  if (op == OperatorKind::velocity_magnitude && model == ModelKind::fn)
    require(false, "observation.operator", "velocity_magnitude needs a (q, p) state");
  require(obs_interval > 0.0, "observation.interval", "must be positive");
  require(obs_end >= obs_start, "observation.end", "must not precede observation.start");
  require(gamma2.has_value(), "observation.gamma2", "missing required field");
  require(*gamma2 >= 0.0 && std::isfinite(*gamma2), "observation.gamma2", "must be nonnegative");
  require(samples > 0, "gibbs.samples", "must be positive");
  require(thinning > 0, "gibbs.thinning", "must be positive");
  require(chains > 0, "gibbs.chains", "must be positive");
  require(sigma_level > 0.0 && sigma_level < 1.0, "summary.sigma_level", "must lie in (0, 1)");
  require(predictive_level > 0.0 && predictive_level < 1.0, "summary.predictive_level", "must lie in (0, 1)");
}

double RunConfig::noise_var() const {
  if (!gamma2) throw ConfigError("observation.gamma2", "missing required field");
  return *gamma2;
}

gibbs::GibbsConfig RunConfig::gibbs_config() const {
  if (!(noise_var() > 0.0)) throw ConfigError("observation.gamma2", "must be positive to fit the model");
  gibbs::GibbsConfig g;
  g.n_samples = samples;
  g.burn_in = burn_in;
  g.seed = derive_seed(seed, 2);
  g.gamma2 = noise_var();
  g.s_mode = s_mode;
  g.thinning = thinning;
  g.store_eta = store_eta;
  return g;
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  std::string normalized;
  normalized.reserve(text.size());
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') line[first] = ';';
    normalized += line;
    normalized += '\n';
  }
  pt::ptree tree;
  std::istringstream is{normalized};
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string(source) + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, child] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError(section, "unknown section");
    if (!child.data().empty()) throw ConfigError(section, "key outside any section");
    for (const auto& [key, value] : child)
      if (!it->second.contains(key)) throw ConfigError(section + "." + key, "unknown key");
  }

  const Reader r(tree);
  RunConfig c;
  r.integer("run", "seed", c.seed);
  r.text("run", "out", c.out_dir);

  r.choice("model", "name", c.model, kModels);
  r.real("model", "a", c.fn.a);
  r.real("model", "b", c.fn.b);
  r.real("model", "c", c.fn.c);
  r.real("model", "e", c.kepler.e);
  r.real("model", "t0", c.t0);
  r.text("model", "numeric", c.numeric_file);
  r.text("model", "reference", c.reference_file);

  r.choice("integrator", "method", c.integrator, kIntegrators);
  r.real("integrator", "step", c.step);
  r.real("integrator", "t_end", c.t_end);

  r.real("reference", "abstol", c.abstol);
  r.real("reference", "reltol", c.reltol);
  r.integer("reference", "refine", c.refine);

  r.choice("observation", "operator", c.op, kOperators);
  r.integer("observation", "component", c.component);
  r.real("observation", "start", c.obs_start);
  r.real("observation", "end", c.obs_end);
  r.real("observation", "interval", c.obs_interval);
  r.real("observation", "gamma2", c.gamma2);

  r.integer("gibbs", "burn_in", c.burn_in);
  r.integer("gibbs", "samples", c.samples);
  r.integer("gibbs", "thinning", c.thinning);
  r.choice("gibbs", "s_mode", c.s_mode, kSModes);
  r.integer("gibbs", "chains", c.chains);
  r.boolean("gibbs", "store_eta", c.store_eta);
  r.choice("gibbs", "draws_format", c.draws_format, kDrawsFormats);

  r.real("summary", "sigma_level", c.sigma_level);
  r.real("summary", "predictive_level", c.predictive_level);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string serialize_config(const RunConfig& c) {
  const auto num = [](double v) { return io::format_double(v); };
  std::ostringstream os;
  os << "[run]\n"
     << "seed = " << c.seed << "\n"
     << "out = " << c.out_dir << "\n\n";
  os << "[model]\n"
     << "name = " << name_of(kModels, c.model) << "\n"
     << "a = " << num(c.fn.a) << "\n"
     << "b = " << num(c.fn.b) << "\n"
     << "c = " << num(c.fn.c) << "\n"
     << "e = " << num(c.kepler.e) << "\n"
     << "t0 = " << num(c.t0) << "\n";
  if (!c.numeric_file.empty()) os << "numeric = " << c.numeric_file << "\n";
  if (!c.reference_file.empty()) os << "reference = " << c.reference_file << "\n";
  os << "\n[integrator]\n"
     << "method = " << name_of(kIntegrators, c.integrator) << "\n"
     << "step = " << num(c.step) << "\n"
     << "t_end = " << num(c.t_end) << "\n\n";
  os << "[reference]\n"
     << "abstol = " << num(c.abstol) << "\n"
     << "reltol = " << num(c.reltol) << "\n"
     << "refine = " << c.refine << "\n\n";
  os << "[observation]\n"
     << "operator = " << name_of(kOperators, c.op) << "\n"
     << "component = " << c.component << "\n"
     << "start = " << num(c.obs_start) << "\n"
     << "end = " << num(c.obs_end) << "\n"
     << "interval = " << num(c.obs_interval) << "\n";
  if (c.gamma2) os << "gamma2 = " << num(*c.gamma2) << "\n";
  os << "\n[gibbs]\n"
     << "burn_in = " << c.burn_in << "\n"
     << "samples = " << c.samples << "\n"
     << "thinning = " << c.thinning << "\n"
     << "s_mode = " << name_of(kSModes, c.s_mode) << "\n"
     << "chains = " << c.chains << "\n"
     << "store_eta = " << (c.store_eta ? "true" : "false") << "\n"
     << "draws_format = " << name_of(kDrawsFormats, c.draws_format) << "\n\n";
  os << "[summary]\n"
     << "sigma_level = " << num(c.sigma_level) << "\n"
     << "predictive_level = " << num(c.predictive_level) << "\n";
  return os.str();
}

void apply_environment(RunConfig& config) {
  if (const char* seed = std::getenv("ISOVAR_SEED"); seed != nullptr && *seed != '\0') {
    std::uint64_t v = 0;
    const std::string_view s(seed);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw ConfigError("ISOVAR_SEED", "expected a nonnegative integer");
    config.seed = v;
  }
  if (const char* out = std::getenv("ISOVAR_OUT"); out != nullptr && *out != '\0') config.out_dir = out;
}

}  // namespace isovar::config
