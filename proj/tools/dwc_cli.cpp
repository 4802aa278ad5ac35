// dwc: train, evaluate, compile and inspect weightless controllers.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or configuration error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "dwc/binio.hpp"
#include "dwc/circuit.hpp"
#include "dwc/config.hpp"
#include "dwc/diag.hpp"
#include "dwc/errors.hpp"
#include "dwc/model_io.hpp"
#include "dwc/resources.hpp"
#include "dwc/rtl.hpp"
#include "dwc/train.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

fs::path output_path(const std::string& p) {
  const fs::path path(p);
  const char* root = std::getenv("DWC_OUTPUT_ROOT");
  if (path.is_absolute() || root == nullptr || *root == '\0') return path;
  return fs::path(root) / path;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  dwc::write_file(path.string(), bytes);
}

struct Loaded {
  dwc::DwcPolicy policy;
  std::string hash;
};

Loaded load_model(const std::string& path) {
  const auto bytes = dwc::read_file(path);
  Loaded out{dwc::deserialize_policy(bytes), {}};
  const auto text = dwc::model_config_text(bytes);
  if (!text.empty()) {
    out.hash = dwc::config_hash(dwc::parse_config(text));
  } else {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << dwc::fnv1a64(std::string(bytes.begin(), bytes.end()));
    out.hash = os.str();
  }
  return out;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::int64_t seed = -1;
  std::string out;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  auto config = dwc::load_config(a.config);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw dwc::ConfigError("override '" + kv + "' is not key=value");
    dwc::set_field(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.seed >= 0) config.seed = static_cast<std::uint64_t>(a.seed);
  if (!a.out.empty()) config.output_dir = a.out;
  config.validate();

  const auto hash = dwc::config_hash(config);
  const fs::path dir = output_path(config.output_dir) / hash;
  fs::create_directories(dir);

  dwc::LogFn log;
  if (!a.quiet) log = [](const std::string& line) { std::cerr << line << "\n"; };
  const auto result = dwc::train(config, log);

  write_text(dir / "config.txt", dwc::to_text(config));
  write_text(dir / "record.json", dwc::record_to_json(result.record));
  if (config.model == "dwc") {
    dwc::save_policy(result.policy(), (dir / "model.dwc").string(), dwc::to_text(config));
    std::cout << "model: " << (dir / "model.dwc").string() << "\n";
  }
  std::cout << "record: " << (dir / "record.json").string() << "\n";
  if (result.record.final_eval) {
    std::cout << "final_eval: " << result.record.final_eval->mean << " +- "
              << result.record.final_eval->std << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::string env = "pendulum";
  double noise = 0.0;
  int episodes = 10;
  std::uint64_t seed = 0;
  bool relaxed = false;
};

int cmd_eval(const EvalArgs& a) {
  auto loaded = load_model(a.model);
  loaded.policy.mode = a.relaxed ? dwc::PolicyMode::kRelaxed : dwc::PolicyMode::kHard;
  auto env = dwc::make_env(a.env);
  const auto ev = dwc::evaluate(loaded.policy, *env, {a.episodes, a.noise, a.seed});
  std::cout << "episode,sigma,return\n";
  std::cout.precision(10);
  for (std::size_t i = 0; i < ev.returns.size(); ++i) {
    std::cout << i << "," << a.noise << "," << ev.returns[i] << "\n";
  }
  std::cerr << "mean " << ev.mean << " std " << ev.std << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- compile

struct CompileArgs {
  std::string model;
  int stages = 0;
  std::string rtl;
  std::string circuit;
  int adc_bits = 16;
  int out_frac = dwc::kDefaultOutFrac;
};

int cmd_compile(const CompileArgs& a) {
  const auto loaded = load_model(a.model);
  if (a.stages < 0 || a.stages > dwc::kMaxPipelineStages) {
    throw dwc::ConfigError("--stages must be 0, 1 or 2");
  }
  if (!loaded.policy.stats.frozen()) {
    throw dwc::StateError(
        "model statistics are not frozen; finish training (dwc train writes frozen models) "
        "before compiling");
  }
  const auto adc = dwc::default_adc(loaded.policy.stats, a.adc_bits);
  const auto circuit = dwc::binarize(loaded.policy, adc, a.out_frac);
  const auto report = dwc::resource_report(circuit, a.stages);
  if (!a.circuit.empty()) dwc::save_circuit(circuit, output_path(a.circuit).string());
  if (!a.rtl.empty()) write_text(output_path(a.rtl), dwc::emit_rtl(circuit, a.stages));
  std::cout << dwc::to_text(report);
  return kExitOk;
}

// ---------------------------------------------------------------- parity

struct ParityArgs {
  std::string model;
  std::string circuit;
  std::int64_t vectors = 100'000;
  std::uint64_t seed = 0;
};

int cmd_parity(const ParityArgs& a) {
  const auto loaded = load_model(a.model);
  const auto circuit = dwc::load_circuit(a.circuit);
  dwc::AdcSpec adc;
  adc.bits = circuit.adc_bits;
  adc.scale = circuit.adc_scale;

  std::int64_t checked = 0;
  std::int64_t mismatches = 0;
  auto check = [&](const std::vector<std::int64_t>& raw) {
    ++checked;
    if (dwc::circuit_eval(circuit, raw) !=
        dwc::reference_action_words(loaded.policy, adc, raw, circuit.out_frac)) {
      if (mismatches++ < 5) {
        std::cerr << "mismatch at";
        for (auto r : raw) std::cerr << " " << r;
        std::cerr << "\n";
      }
    }
  };
  if (circuit.obs_dim == 1) {
    for (std::int64_t r = circuit.min_word(); r <= circuit.max_word(); ++r) check({r});
  }
  std::mt19937_64 rng(a.seed);
  std::uniform_int_distribution<std::int64_t> word(circuit.min_word(), circuit.max_word());
  std::vector<std::int64_t> raw(static_cast<std::size_t>(circuit.obs_dim));
  for (std::int64_t n = 0; n < a.vectors; ++n) {
    for (auto& r : raw) r = word(rng);
    check(raw);
  }
  std::cout << "checked " << checked << " mismatches " << mismatches << "\n";
  return mismatches == 0 ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- diag

struct DiagArgs {
  std::string model;
  std::string what = "connections";
  std::string env = "pendulum";
  int episodes = 10;
  std::uint64_t seed = 0;
  std::vector<double> sigmas;
  std::string out = ".";
};

int cmd_diag(const DiagArgs& a) {
  auto loaded = load_model(a.model);
  loaded.policy.mode = dwc::PolicyMode::kHard;
  const fs::path dir = output_path(a.out);
  fs::path file;
  if (a.what == "connections") {
    const auto h = dwc::input_connection_histogram(loaded.policy);
    file = dir / dwc::diag_filename("connections", loaded.hash);
    write_text(file, dwc::connections_csv(h));
    std::cerr << "dimensions without connections: " << h.zero_dims << "\n";
  } else if (a.what == "bits") {
    file = dir / dwc::diag_filename("bits", loaded.hash);
    write_text(file, dwc::bits_csv(dwc::bit_index_histogram(loaded.policy)));
  } else if (a.what == "noise") {
    const auto sigmas = a.sigmas.empty() ? dwc::default_noise_sigmas() : a.sigmas;
    auto env = dwc::make_env(a.env);
    const auto rows = dwc::noise_sweep(loaded.policy, *env, sigmas, a.episodes, a.seed);
    file = dir / dwc::diag_filename("noise", loaded.hash);
    write_text(file, dwc::noise_csv(rows));
  } else {
    throw dwc::ConfigError("--what must be connections, bits or noise");
  }
  std::cout << file.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable weightless controllers"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a policy from a config file");
  t->add_option("config", train.config, "Config file (key = value lines)")->required();
  t->add_option("--set", train.overrides, "Override a config field, key=value");
  t->add_option("--seed", train.seed, "Override the seed");
  t->add_option("--out", train.out, "Override the output directory");
  t->add_flag("--quiet", train.quiet, "No progress lines");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a model; CSV on stdout");
  e->add_option("model", eval.model, "Model file")->required();
  e->add_option("--env", eval.env, "Environment selector");
  e->add_option("--noise", eval.noise, "Observation noise std (normalized units)");
  e->add_option("--episodes", eval.episodes, "Episodes");
  e->add_option("--seed", eval.seed, "Seed");
  e->add_flag("--relaxed", eval.relaxed, "Relaxed instead of discrete evaluation");
  e->add_flag("--hard", "Discrete evaluation (default)");

  CompileArgs comp;
  auto* c = app.add_subcommand("compile", "Freeze a model into a circuit");
  c->add_option("model", comp.model, "Model file")->required();
  c->add_option("--stages", comp.stages, "Pipeline stages, 0..2");
  c->add_option("--rtl", comp.rtl, "Write Verilog here");
  c->add_option("--circuit", comp.circuit, "Write the circuit file here");
  c->add_option("--adc-bits", comp.adc_bits, "ADC word width");
  c->add_option("--out-frac", comp.out_frac, "Fractional bits of action words");

  ParityArgs par;
  auto* p = app.add_subcommand("parity", "Check a circuit against its model");
  p->add_option("model", par.model, "Model file")->required();
  p->add_option("circuit", par.circuit, "Circuit file")->required();
  p->add_option("--vectors", par.vectors, "Random input vectors");
  p->add_option("--seed", par.seed, "Seed");

  DiagArgs diag;
  auto* d = app.add_subcommand("diag", "Connectivity and noise diagnostics as CSV");
  d->add_option("model", diag.model, "Model file")->required();
  d->add_option("--what", diag.what, "connections, bits or noise");
  d->add_option("--env", diag.env, "Environment for the noise sweep");
  d->add_option("--episodes", diag.episodes, "Episodes per noise level");
  d->add_option("--seed", diag.seed, "Seed");
  d->add_option("--sigma", diag.sigmas, "Noise levels (default 0.1 .. 0.5)");
  d->add_option("--out", diag.out, "Output directory");

  auto* presets = app.add_subcommand("presets", "List shipped config presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (t->parsed()) return cmd_train(train);
    if (e->parsed()) return cmd_eval(eval);
    if (c->parsed()) return cmd_compile(comp);
    if (p->parsed()) return cmd_parity(par);
    if (d->parsed()) return cmd_diag(diag);
    if (presets->parsed()) {
      for (const auto& name : dwc::preset_names()) std::cout << name << "\n";
      return kExitOk;
    }
  } catch (const dwc::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
