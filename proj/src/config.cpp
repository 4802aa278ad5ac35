#include "dwc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "dwc/errors.hpp"

namespace dwc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_int(const std::string& key, const std::string& v) {
  T out{};
  std::string s = v;
  s.erase(std::remove(s.begin(), s.end(), '_'), s.end());
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    // Accept integral values written in scientific notation, e.g. 1e6.
    try {
      std::size_t pos = 0;
      const double d = std::stod(s, &pos);
      if (pos == s.size() && d == static_cast<double>(static_cast<T>(d))) {
        return static_cast<T>(d);
      }
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

std::vector<bool> parse_bool_list(const std::string& key, const std::string& v) {
  std::vector<bool> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_bool(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": expected at least one flag");
  return out;
}

std::string fmt_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define DWC_INT_FIELD(key, member, type)                                                  \
  Field {                                                                                 \
    key, [](RunConfig& c, const std::string& v) { c.member = parse_int<type>(key, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                       \
  }
#define DWC_DOUBLE_FIELD(key, member)                                                    \
  Field {                                                                                \
    key, [](RunConfig& c, const std::string& v) { c.member = parse_double(key, v); },   \
        [](const RunConfig& c) { return fmt_double(c.member); }                          \
  }
#define DWC_STRING_FIELD(key, member)                                      \
  Field {                                                                  \
    key, [](RunConfig& c, const std::string& v) { c.member = v; },        \
        [](const RunConfig& c) { return c.member; }                        \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      DWC_STRING_FIELD("env", env),
      DWC_INT_FIELD("total_steps", total_steps, std::int64_t),
      DWC_INT_FIELD("seed", seed, std::uint64_t),
      DWC_STRING_FIELD("algorithm", algorithm),
      DWC_STRING_FIELD("model", model),
      DWC_INT_FIELD("layers", layers, int),
      DWC_INT_FIELD("width", width, int),
      DWC_INT_FIELD("arity", arity, int),
      DWC_INT_FIELD("bits", bits, int),
      Field{"trainable_interconnect",
            [](RunConfig& c, const std::string& v) {
              c.trainable_interconnect = parse_bool_list("trainable_interconnect", v);
            },
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.trainable_interconnect.size(); ++i) {
                if (i) s += ",";
                s += fmt_bool(c.trainable_interconnect[i]);
              }
              return s;
            }},
      DWC_DOUBLE_FIELD("alpha_p_init", alpha_p_init),
      DWC_DOUBLE_FIELD("beta_init", beta_init),
      Field{"squash", [](RunConfig& c, const std::string& v) { c.squash = parse_squash(v); },
            [](const RunConfig& c) { return to_string(c.squash); }},
      Field{"gradient",
            [](RunConfig& c, const std::string& v) {
              if (v == "expectation") {
                c.gradient = GradientMode::kExpectation;
              } else if (v == "efd") {
                c.gradient = GradientMode::kEfd;
              } else {
                throw ConfigError("gradient: expected 'expectation' or 'efd', got '" + v + "'");
              }
            },
            [](const RunConfig& c) {
              return std::string(c.gradient == GradientMode::kEfd ? "efd" : "expectation");
            }},
      DWC_INT_FIELD("mlp_hidden", mlp_hidden, int),
      DWC_INT_FIELD("buffer_size", sac.buffer_size, std::size_t),
      DWC_DOUBLE_FIELD("gamma", sac.gamma),
      DWC_DOUBLE_FIELD("tau", sac.tau),
      DWC_INT_FIELD("batch_size", sac.batch_size, std::size_t),
      DWC_INT_FIELD("learning_starts", sac.learning_starts, std::int64_t),
      DWC_DOUBLE_FIELD("policy_lr", sac.policy_lr),
      DWC_DOUBLE_FIELD("q_lr", sac.q_lr),
      DWC_INT_FIELD("policy_frequency", sac.policy_frequency, int),
      DWC_INT_FIELD("target_frequency", sac.target_frequency, int),
      Field{"autotune",
            [](RunConfig& c, const std::string& v) { c.sac.autotune = parse_bool("autotune", v); },
            [](const RunConfig& c) { return fmt_bool(c.sac.autotune); }},
      DWC_DOUBLE_FIELD("alpha", sac.alpha),
      DWC_INT_FIELD("critic_hidden", sac.critic_hidden, int),
      DWC_INT_FIELD("explore_hidden", sac.explore_hidden, int),
      DWC_INT_FIELD("eval_interval", eval_interval, std::int64_t),
      DWC_INT_FIELD("eval_episodes", eval_episodes, int),
      Field{"eval_mode",
            [](RunConfig& c, const std::string& v) {
              if (v == "hard") {
                c.eval_mode = PolicyMode::kHard;
              } else if (v == "relaxed") {
                c.eval_mode = PolicyMode::kRelaxed;
              } else {
                throw ConfigError("eval_mode: expected 'hard' or 'relaxed', got '" + v + "'");
              }
            },
            [](const RunConfig& c) {
              return std::string(c.eval_mode == PolicyMode::kHard ? "hard" : "relaxed");
            }},
      DWC_STRING_FIELD("output_dir", output_dir),
  };
  return table;
}

#undef DWC_INT_FIELD
#undef DWC_DOUBLE_FIELD
#undef DWC_STRING_FIELD

}  // namespace

void RunConfig::validate() const {
  if (env.empty()) throw ConfigError("missing required field 'env'");
  if (total_steps < 0) throw ConfigError("missing required field 'total_steps'");
  if (algorithm != "sac" && algorithm != "ppo") {
    throw ConfigError("algorithm: expected 'sac' or 'ppo', got '" + algorithm + "'");
  }
  if (model != "dwc" && model != "mlp") {
    throw ConfigError("model: expected 'dwc' or 'mlp', got '" + model + "'");
  }
  shape(1, 1).validate();
  if (mlp_hidden <= 0) throw ConfigError("mlp_hidden must be positive");
  if (sac.buffer_size == 0) throw ConfigError("buffer_size must be positive");
  if (!(sac.gamma >= 0.0 && sac.gamma <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
  if (!(sac.tau > 0.0 && sac.tau <= 1.0)) throw ConfigError("tau must be in (0, 1]");
  if (sac.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (sac.learning_starts < 0) throw ConfigError("learning_starts must be nonnegative");
  if (!(sac.policy_lr > 0.0)) throw ConfigError("policy_lr must be positive");
  if (!(sac.q_lr > 0.0)) throw ConfigError("q_lr must be positive");
  if (sac.policy_frequency <= 0) throw ConfigError("policy_frequency must be positive");
  if (sac.target_frequency <= 0) throw ConfigError("target_frequency must be positive");
  if (!(sac.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (sac.critic_hidden <= 0) throw ConfigError("critic_hidden must be positive");
  if (sac.explore_hidden <= 0) throw ConfigError("explore_hidden must be positive");
  if (eval_interval <= 0) throw ConfigError("eval_interval must be positive");
  if (eval_episodes <= 0) throw ConfigError("eval_episodes must be positive");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

PolicyShape RunConfig::shape(int obs_dim, int act_dim) const {
  PolicyShape s;
  s.obs_dim = obs_dim;
  s.act_dim = act_dim;
  s.layers = layers;
  s.width = width;
  s.arity = arity;
  s.bits = bits;
  s.trainable_interconnect = trainable_interconnect;
  s.alpha_p_init = alpha_p_init;
  s.beta_init = beta_init;
  s.squash = squash;
  s.gradient = gradient;
  return s;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names = {"pendulum-sac", "bridge-sac", "full-sac", "full-ppo"};
  for (int w : {128, 256, 512, 1024, 2048, 4096}) names.push_back("width-" + std::to_string(w));
  for (int k = 2; k <= 6; ++k) names.push_back("arity-" + std::to_string(k));
  for (int b : {5, 31, 63, 127, 255}) names.push_back("bits-" + std::to_string(b));
  for (int l = 1; l <= 3; ++l) names.push_back("layers-" + std::to_string(l));
  return names;
}

void apply_preset(RunConfig& c, const std::string& name) {
  auto suffix = [&](const std::string& prefix) -> std::string {
    return name.rfind(prefix, 0) == 0 ? name.substr(prefix.size()) : std::string();
  };
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw ConfigError("preset: unknown preset '" + name + "'");
  }
  c.preset = name;
  if (name == "pendulum-sac") {
    c.env = "pendulum";
    c.total_steps = 30'000;
    c.layers = 2;
    c.width = 128;
    c.arity = 6;
    c.bits = 31;
    c.alpha_p_init = -1.0;
  } else if (name == "bridge-sac") {
    c.total_steps = 1'000'000;
  } else if (name == "full-sac") {
    c.total_steps = 1'000'000;
    c.layers = 2;
    c.width = 1024;
    c.arity = 6;
    c.bits = 63;
  } else if (name == "full-ppo") {
    c.algorithm = "ppo";
    c.total_steps = 1'000'000;
    c.width = 256;
    c.alpha_p_init = -3.18;
  } else if (auto w = suffix("width-"); !w.empty()) {
    c.width = std::stoi(w);
  } else if (auto k = suffix("arity-"); !k.empty()) {
    c.arity = std::stoi(k);
  } else if (auto b = suffix("bits-"); !b.empty()) {
    c.bits = std::stoi(b);
  } else if (auto l = suffix("layers-"); !l.empty()) {
    c.layers = std::stoi(l);
  }
}

void set_field(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "preset") {
    apply_preset(config, value);
    return;
  }
  for (const auto& f : fields()) {
    if (key == f.name) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string preset;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (key == "preset") {
      preset = value;
    } else {
      entries.emplace_back(std::move(key), std::move(value));
    }
  }
  RunConfig config;
  if (!preset.empty()) apply_preset(config, preset);
  for (const auto& [k, v] : entries) set_field(config, k, v);
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::vector<std::pair<std::string, std::string>> config_fields(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("preset", config.preset);
  for (const auto& f : fields()) out.emplace_back(f.name, f.get(config));
  return out;
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_fields(config)) {
    if (k == "preset") continue;  // already resolved into the other fields
    out += k + " = " + v + "\n";
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& config) {
  // Where the run is written does not change what it computes.
  std::string canonical;
  for (const auto& [k, v] : config_fields(config)) {
    if (k != "preset" && k != "output_dir") canonical += k + "=" + v + "\n";
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  return buf;
}

}  // namespace dwc
