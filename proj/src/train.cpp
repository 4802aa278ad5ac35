#include "dwc/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <json.hpp>

#include "dwc/errors.hpp"
#include "dwc/replay.hpp"
#include "dwc/sac.hpp"

namespace dwc {

namespace {

double stddev(std::span<const double> v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return v.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

EvalResult evaluate(const UnitPolicy& act, const RunningStats& stats, Env& env,
                    const EvalOptions& options) {
  if (options.episodes <= 0) throw ConfigError("episodes must be positive");
  if (!(options.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be nonnegative");
  const EnvSpec spec = env.spec();
  std::mt19937_64 noise_rng(options.seed);
  std::normal_distribution<double> normal(0.0, options.noise_sigma > 0 ? options.noise_sigma : 1);
  EvalResult result;
  for (int ep = 0; ep < options.episodes; ++ep) {
    auto obs = env.reset(options.seed + static_cast<std::uint64_t>(ep));
    double ret = 0.0;
    for (;;) {
      auto x = normalize_clip(obs, stats);
      if (options.noise_sigma > 0.0) {
        for (auto& v : x) v = std::clamp(v + normal(noise_rng), -kClipBound, kClipBound);
      }
      const auto unit = act(x);
      const auto step = env.step(scale_action(unit, spec));
      ret += step.reward;
      obs = step.obs;
      if (step.done || step.truncated) break;
    }
    result.returns.push_back(ret);
  }
  double sum = 0.0;
  for (double r : result.returns) sum += r;
  result.mean = sum / static_cast<double>(result.returns.size());
  result.std = stddev(result.returns, result.mean);
  return result;
}

EvalResult evaluate(const DwcPolicy& policy, Env& env, const EvalOptions& options) {
  return evaluate([&](std::span<const double> x) { return policy_action_normalized(policy, x); },
                  policy.stats, env, options);
}

EvalResult evaluate(const MeanModel& model, Env& env, const EvalOptions& options) {
  return evaluate(
      [&](std::span<const double> x) {
        auto l = model.eval_logits(x);
        for (auto& v : l) v = std::tanh(v);
        return l;
      },
      model.stats(), env, options);
}

std::string record_to_json(const RunRecord& record, bool include_wall_clock) {
  nlohmann::ordered_json j;
  j["format_version"] = record.format_version;
  nlohmann::ordered_json cfg;
  for (const auto& [k, v] : config_fields(record.config)) cfg[k] = v;
  j["config"] = cfg;
  j["config_hash"] = record.config_hash;
  auto curve = nlohmann::ordered_json::array();
  for (const auto& p : record.curve) {
    curve.push_back({{"step", p.step}, {"mean", p.mean}, {"std", p.std}});
  }
  j["curve"] = curve;
  if (record.final_eval) {
    j["final_eval"] = {{"mean", record.final_eval->mean},
                       {"std", record.final_eval->std},
                       {"returns", record.final_eval->returns}};
  } else {
    j["final_eval"] = nullptr;
  }
  j["episodes"] = record.episodes;
  j["final_alpha"] = record.final_alpha;
  if (include_wall_clock) j["wall_clock_seconds"] = record.wall_clock_seconds;
  return j.dump(2) + "\n";
}

RunRecord record_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunRecord r;
    r.format_version = j.at("format_version").get<int>();
    if (r.format_version != kRecordVersion) {
      throw FormatError("unsupported run record version " + std::to_string(r.format_version));
    }
    for (const auto& [k, v] : j.at("config").items()) {
      if (k == "preset") {
        r.config.preset = v.get<std::string>();
      } else {
        set_field(r.config, k, v.get<std::string>());
      }
    }
    r.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& p : j.at("curve")) {
      r.curve.push_back({p.at("step").get<std::int64_t>(), p.at("mean").get<double>(),
                         p.at("std").get<double>()});
    }
    if (!j.at("final_eval").is_null()) {
      const auto& f = j.at("final_eval");
      r.final_eval = EvalResult{f.at("mean").get<double>(), f.at("std").get<double>(),
                                f.at("returns").get<std::vector<double>>()};
    }
    r.episodes = j.at("episodes").get<std::int64_t>();
    r.final_alpha = j.at("final_alpha").get<double>();
    if (j.contains("wall_clock_seconds")) r.wall_clock_seconds = j["wall_clock_seconds"];
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed run record: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed run record: ") + e.what());
  }
}

const DwcPolicy& TrainResult::policy() const {
  const auto* dwc = dynamic_cast<const DwcActor*>(actor.get());
  if (!dwc) throw StateError("run did not train a weightless policy");
  return dwc->policy();
}

std::uint64_t eval_seed(const RunConfig& config) { return config.seed * 7919 + 1'000'003; }

TrainResult train(const RunConfig& config, const LogFn& log) {
  config.validate();
  auto env = make_env(config.env);
  auto eval_env = make_env(config.env);
  return train(config, *env, eval_env.get(), log);
}

TrainResult train(const RunConfig& config, Env& env, Env* eval_env, const LogFn& log) {
  config.validate();
  if (config.algorithm != "sac") {
    throw ConfigError("algorithm '" + config.algorithm + "' is reserved and not implemented");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const EnvSpec spec = env.spec();

  std::unique_ptr<MeanModel> actor;
  if (config.model == "dwc") {
    actor = std::make_unique<DwcActor>(init_policy(config.shape(spec.obs_dim, spec.act_dim),
                                                   config.seed),
                                       config.eval_mode);
  } else {
    std::mt19937_64 init_rng(config.seed);
    actor = std::make_unique<MlpActor>(spec.obs_dim, spec.act_dim, config.mlp_hidden, init_rng);
  }

  RunRecord record;
  record.config = config;
  record.config_hash = config_hash(config);

  SacAgent agent(std::move(actor), spec, config.sac, config.seed + 1);
  ReplayBuffer buffer(std::min<std::size_t>(config.sac.buffer_size,
                                            static_cast<std::size_t>(std::max<std::int64_t>(
                                                config.total_steps, 1))),
                      spec.obs_dim, spec.act_dim);
  std::mt19937_64 rng(config.seed + 2);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const EvalOptions eval_opts{config.eval_episodes, 0.0, eval_seed(config)};
  const std::uint64_t episode_seed_base = config.seed * 1'000'003 + 17;

  auto& stats = agent.actor().stats();
  std::vector<double> obs;
  if (config.total_steps > 0) obs = env.reset(episode_seed_base);
  double episode_return = 0.0;
  std::vector<double> recent;

  for (std::int64_t step = 0; step < config.total_steps; ++step) {
    stats.update(obs);
    std::vector<double> unit(static_cast<std::size_t>(spec.act_dim));
    if (step < config.sac.learning_starts || !stats.usable()) {
      for (auto& u : unit) u = uniform(rng);
    } else {
      unit = agent.explore(normalize_clip(obs, stats), rng);
    }
    const auto action = scale_action(unit, spec);
    const auto res = env.step(action);
    buffer.add(obs, action, res.reward, res.obs, res.done);
    episode_return += res.reward;
    if (res.done || res.truncated) {
      ++record.episodes;
      recent.push_back(episode_return);
      episode_return = 0.0;
      obs = env.reset(episode_seed_base + static_cast<std::uint64_t>(record.episodes));
    } else {
      obs = res.obs;
    }

    if (step >= config.sac.learning_starts) agent.update(buffer, step);

    if ((step + 1) % config.eval_interval == 0) {
      if (stats.usable()) {
        const auto ev = evaluate(agent.actor(), eval_env ? *eval_env : env, eval_opts);
        record.curve.push_back({step + 1, ev.mean, ev.std});
        if (log) {
          double train_mean = 0.0;
          for (double r : recent) train_mean += r;
          if (!recent.empty()) train_mean /= static_cast<double>(recent.size());
          log("step " + std::to_string(step + 1) + " eval " + std::to_string(ev.mean) + " +- " +
              std::to_string(ev.std) + " train " + std::to_string(train_mean) + " alpha " +
              std::to_string(agent.alpha()));
        }
        recent.clear();
        if (!eval_env) {
          obs = env.reset(episode_seed_base + static_cast<std::uint64_t>(++record.episodes));
          episode_return = 0.0;
        }
      }
    }
  }

  stats.freeze();
  if (stats.usable()) {
    record.final_eval = evaluate(agent.actor(), eval_env ? *eval_env : env, eval_opts);
  }
  record.final_alpha = agent.alpha();
  record.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {agent.release_actor(), std::move(record)};
}

}  // namespace dwc
