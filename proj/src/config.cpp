#include "cbo/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace cbo {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

struct KvMap {
  std::map<std::string, std::string> values;  // "section.key" -> raw value

  bool has(const std::string& key) const {
    auto it = values.find(key);
    return it != values.end() && !it->second.empty();
  }
  std::string get_str(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return (it == values.end() || it->second.empty()) ? fallback : it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end() || it->second.empty()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (...) {
      throw ConfigError(key + ": not a number ('" + it->second + "')");
    }
  }
  long get_long(const std::string& key, long fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    const long l = static_cast<long>(v);
    if (static_cast<double>(l) != v) throw ConfigError(key + ": not an integer");
    return l;
  }
  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end() || it->second.empty()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError(key + ": expected true/false");
  }
};

const char* const kKnownKeys[] = {
    "objective.name",        "objective.dim",
    "params.lambda",         "params.sigma",          "params.alpha",
    "params.dt",             "params.diffusion",
    "init.kind",             "init.mean",             "init.scale",
    "init.lo",               "init.hi",
    "run.n_particles",       "run.seed",              "run.max_steps",
    "run.epsilon_v",         "run.target_radius",     "run.ball_radius",
    "run.success_radius",    "run.repeat",            "run.threads",
    "schedule.enabled",      "schedule.alpha_initial","schedule.alpha_factor",
    "schedule.sigma0",       "schedule.n_e",          "schedule.n_n",
    "schedule.steps_per_epoch", "schedule.epochs",
    "schedule.var_threshold","schedule.shrink_fraction", "schedule.n_min",
    "output.dir",            "output.prefix",
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    bool known = false;
    for (const char* k : kKnownKeys) known |= (key == k);
    if (!known) throw ConfigError(key + ": unknown configuration key");
    kv.values[key] = trim(line.substr(eq + 1));
  }

  ExperimentConfig cfg;
  cfg.echo = text;

  if (!kv.has("objective.name")) throw ConfigError("objective.name: required field is missing");
  cfg.objective_name = kv.get_str("objective.name", "");
  cfg.dim = kv.get_long("objective.dim", 0);
  if (cfg.dim < 1) throw ConfigError("objective.dim: must be a positive integer");

  cfg.params.lambda = kv.get_double("params.lambda", 1.0);
  cfg.params.sigma = kv.get_double("params.sigma", 0.32);
  cfg.params.alpha = kv.get_double("params.alpha", 1e15);
  cfg.params.dt = kv.get_double("params.dt", 0.01);
  const std::string diff = kv.get_str("params.diffusion", "anisotropic");
  if (diff == "anisotropic")
    cfg.params.diffusion = Diffusion::Anisotropic;
  else if (diff == "isotropic")
    cfg.params.diffusion = Diffusion::Isotropic;
  else
    throw ConfigError("params.diffusion: expected isotropic or anisotropic");
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }

  const std::string kind = kv.get_str("init.kind", "gaussian");
  if (kind == "gaussian") {
    cfg.init = InitialLaw::gaussian(kv.get_double("init.mean", 0.0),
                                    kv.get_double("init.scale", 1.0));
    if (cfg.init.scale < 0.0) throw ConfigError("init.scale: must be >= 0");
  } else if (kind == "box") {
    cfg.init = InitialLaw::box(kv.get_double("init.lo", -1.0), kv.get_double("init.hi", 1.0));
    if (cfg.init.lo > cfg.init.hi) throw ConfigError("init.lo: box lo exceeds hi");
  } else {
    throw ConfigError("init.kind: expected gaussian or box");
  }

  cfg.n_particles = kv.get_long("run.n_particles", 1000);
  if (cfg.n_particles < 1) throw ConfigError("run.n_particles: must be >= 1");
  cfg.seed = static_cast<std::uint64_t>(kv.get_long("run.seed", 1));
  cfg.stop.max_steps = kv.get_long("run.max_steps", 1000);
  if (cfg.stop.max_steps < 0) throw ConfigError("run.max_steps: must be >= 0");
  if (kv.has("run.epsilon_v")) cfg.stop.epsilon_V = kv.get_double("run.epsilon_v", 0.0);
  if (kv.has("run.target_radius")) cfg.stop.target_radius = kv.get_double("run.target_radius", 0.0);
  cfg.ball_radius = kv.get_double("run.ball_radius", 0.5);
  if (!(cfg.ball_radius > 0.0)) throw ConfigError("run.ball_radius: must be > 0");
  cfg.success_radius = kv.get_double("run.success_radius", 0.25);
  cfg.repeat = static_cast<int>(kv.get_long("run.repeat", 1));
  if (cfg.repeat < 1) throw ConfigError("run.repeat: must be >= 1");
  cfg.threads = static_cast<int>(kv.get_long("run.threads", 0));

  cfg.schedule_enabled = kv.get_bool("schedule.enabled", false);
  cfg.schedule.alpha_initial = kv.get_double("schedule.alpha_initial", 50.0);
  cfg.schedule.alpha_factor = kv.get_double("schedule.alpha_factor", 2.0);
  cfg.schedule.sigma0 = kv.get_double("schedule.sigma0", cfg.params.sigma);
  cfg.schedule.n_E = static_cast<int>(kv.get_long("schedule.n_e", 60));
  cfg.schedule.n_N = static_cast<int>(kv.get_long("schedule.n_n", 100));
  cfg.schedule.steps_per_epoch = kv.get_long("schedule.steps_per_epoch", 100);
  cfg.epochs = static_cast<int>(kv.get_long("schedule.epochs", 0));
  cfg.schedule.reduction.var_threshold = kv.get_double("schedule.var_threshold", 0.0);
  cfg.schedule.reduction.shrink_fraction = kv.get_double("schedule.shrink_fraction", 0.0);
  cfg.schedule.reduction.n_min = kv.get_long("schedule.n_min", 2);
  if (cfg.schedule_enabled) {
    if (cfg.schedule.n_N < 1) throw ConfigError("schedule.n_n: must be >= 1");
    if (cfg.schedule.n_N > cfg.n_particles)
      throw ConfigError("schedule.n_n: exceeds run.n_particles");
    if (cfg.schedule.steps_per_epoch < 1)
      throw ConfigError("schedule.steps_per_epoch: must be >= 1");
    if (cfg.schedule.reduction.n_min < 2) throw ConfigError("schedule.n_min: must be >= 2");
    if (cfg.schedule.reduction.shrink_fraction < 0.0 ||
        cfg.schedule.reduction.shrink_fraction >= 1.0)
      throw ConfigError("schedule.shrink_fraction: must be in [0,1)");
  }

  cfg.out_dir = kv.get_str("output.dir", "out");
  cfg.prefix = kv.get_str("output.prefix", "run");
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str());
}

std::string result_record_json(const ResultRecord& rec) {
  nlohmann::ordered_json j;
  j["seed"] = rec.seed;
  j["fitted_rate"] = rec.fitted_rate;
  j["rate_fit_ok"] = rec.rate_fit_ok;
  j["final_V"] = rec.final_V;
  j["final_dist_inf"] = rec.final_dist_inf;
  j["success_radius"] = rec.success_radius;
  j["success"] = rec.success;
  j["wall_seconds"] = rec.wall_seconds;
  if (!rec.accuracy_series.empty()) j["accuracy_series"] = rec.accuracy_series;
  j["config_echo"] = rec.config_echo;
  return j.dump(2);
}

void write_result_record(const ResultRecord& rec, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_result_record: cannot open " + path);
  f << result_record_json(rec) << "\n";
}

}  // namespace cbo
