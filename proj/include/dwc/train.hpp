#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dwc/actor.hpp"
#include "dwc/config.hpp"
#include "dwc/env.hpp"
#include "dwc/policy.hpp"

namespace dwc {

struct EvalResult {
  double mean = 0.0;
  double std = 0.0;  // population std over episodes
  std::vector<double> returns;
};

struct EvalOptions {
  int episodes = 10;
  double noise_sigma = 0.0;  // std of Gaussian noise on normalized observations
  std::uint64_t seed = 0;    // episode i resets with seed + i; noise draws from seed
};

/// Deterministic action in [-1, 1] for one normalized observation.
using UnitPolicy = std::function<std::vector<double>(std::span<const double> normalized)>;

/// Runs `episodes` episodes without exploration. Each observation is
/// normalized with `stats`, perturbed by the configured noise, re-clipped to
/// [-10, 10] and handed to `act`.
EvalResult evaluate(const UnitPolicy& act, const RunningStats& stats, Env& env,
                    const EvalOptions& options);
EvalResult evaluate(const DwcPolicy& policy, Env& env, const EvalOptions& options);
EvalResult evaluate(const MeanModel& model, Env& env, const EvalOptions& options);

struct CurvePoint {
  std::int64_t step = 0;
  double mean = 0.0;
  double std = 0.0;
};

inline constexpr int kRecordVersion = 1;

struct RunRecord {
  int format_version = kRecordVersion;
  RunConfig config;
  std::string config_hash;
  std::vector<CurvePoint> curve;
  std::optional<EvalResult> final_eval;
  std::int64_t episodes = 0;
  double final_alpha = 0.0;
  double wall_clock_seconds = 0.0;
};

/// JSON text of the record. `include_wall_clock` = false gives a view that is
/// a pure function of the config.
std::string record_to_json(const RunRecord& record, bool include_wall_clock = true);
RunRecord record_from_json(const std::string& text);

struct TrainResult {
  std::unique_ptr<MeanModel> actor;
  RunRecord record;

  /// The trained weightless policy; throws StateError for the MLP baseline.
  const DwcPolicy& policy() const;
};

using LogFn = std::function<void(const std::string&)>;

/// Builds training and evaluation environments from config.env and trains.
TrainResult train(const RunConfig& config, const LogFn& log = {});
/// Trains against caller-supplied environments. Without `eval_env`,
/// evaluation shares `env` and restarts the training episode afterwards.
/// Statistics are frozen on return. NaN or infinite values abort with
/// NumericError.
TrainResult train(const RunConfig& config, Env& env, Env* eval_env = nullptr,
                  const LogFn& log = {});

/// Seed used for the evaluation episodes of a run.
std::uint64_t eval_seed(const RunConfig& config);

}  // namespace dwc
