#include "dwc/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dwc/encoding.hpp"
#include "dwc/errors.hpp"

namespace dwc {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2 pi)
constexpr double kSquashEps = 1e-6;

Matrix concat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

void append(std::vector<ParamRef>& dst, std::vector<ParamRef> src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

}  // namespace

SacAgent::SacAgent(std::unique_ptr<MeanModel> actor, const EnvSpec& spec, SacConfig config,
                   std::uint64_t seed)
    : actor_(std::move(actor)),
      spec_(spec),
      config_(config),
      rng_(seed),
      actor_opt_({.lr = config.policy_lr}),
      q_opt_({.lr = config.q_lr}),
      alpha_opt_({.lr = config.q_lr}) {
  if (!actor_) throw ConfigError("SacAgent: null actor");
  if (actor_->obs_dim() != spec.obs_dim || actor_->act_dim() != spec.act_dim) {
    throw ShapeError("SacAgent: actor shape does not match the environment");
  }
  if (config_.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (config_.policy_frequency <= 0 || config_.target_frequency <= 0) {
    throw ConfigError("policy_frequency and target_frequency must be positive");
  }
  const int od = spec.obs_dim;
  const int ad = spec.act_dim;
  const int ch = config_.critic_hidden;
  const int eh = config_.explore_hidden;
  explorer_ = Mlp({od, eh, eh, ad}, rng_);
  q1_ = Mlp({od + ad, ch, ch, 1}, rng_);
  q2_ = Mlp({od + ad, ch, ch, 1}, rng_);
  q1_target_ = q1_;
  q2_target_ = q2_;
  log_alpha_ = std::log(config_.alpha);
  target_entropy_ = -static_cast<double>(ad);
  scale_.resize(static_cast<std::size_t>(ad));
  for (std::size_t d = 0; d < scale_.size(); ++d) {
    scale_[d] = 0.5 * (spec.act_high[d] - spec.act_low[d]);
  }
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

std::vector<double> SacAgent::explore(std::span<const double> normalized,
                                      std::mt19937_64& rng) {
  return explore(normalized, rng, 1.0);
}

std::vector<double> SacAgent::explore(std::span<const double> normalized, std::mt19937_64& rng,
                                      double noise_scale) {
  const auto ad = static_cast<std::size_t>(spec_.act_dim);
  const auto mean = actor_->forward_batch(normalized, 1);
  const Matrix obs = Eigen::Map<const Matrix>(normalized.data(), 1,
                                              static_cast<Eigen::Index>(normalized.size()));
  const Matrix raw = explorer_.predict(obs);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> action(ad);
  const double span = config_.log_std_max - config_.log_std_min;
  for (std::size_t d = 0; d < ad; ++d) {
    const double log_std =
        config_.log_std_min + 0.5 * span * (std::tanh(raw(0, static_cast<Eigen::Index>(d))) + 1.0);
    action[d] = std::tanh(mean[d] + noise_scale * std::exp(log_std) * normal(rng));
  }
  return action;
}

Matrix SacAgent::unit_action(std::span<const double> env_action) const {
  Matrix out(1, static_cast<Eigen::Index>(env_action.size()));
  for (std::size_t d = 0; d < env_action.size(); ++d) {
    const double mid = 0.5 * (spec_.act_high[d] + spec_.act_low[d]);
    out(0, static_cast<Eigen::Index>(d)) = (env_action[d] - mid) / scale_[d];
  }
  return out;
}

SacAgent::Batch SacAgent::gather(const ReplayBuffer& buffer) {
  const auto idx = buffer.sample_indices(config_.batch_size, rng_);
  const auto n = static_cast<Eigen::Index>(idx.size());
  const auto od = static_cast<Eigen::Index>(spec_.obs_dim);
  const auto ad = static_cast<Eigen::Index>(spec_.act_dim);
  const auto& stats = actor_->stats();
  Batch b{Matrix(n, od), Matrix(n, ad), Vector(n), Matrix(n, od), Vector(n)};
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto i = idx[static_cast<std::size_t>(r)];
    const auto o = normalize_clip(buffer.obs(i), stats);
    const auto o2 = normalize_clip(buffer.next_obs(i), stats);
    for (Eigen::Index c = 0; c < od; ++c) {
      b.obs(r, c) = o[static_cast<std::size_t>(c)];
      b.next_obs(r, c) = o2[static_cast<std::size_t>(c)];
    }
    b.action.row(r) = unit_action(buffer.action(i));
    b.reward(r) = buffer.reward(i);
    b.done(r) = buffer.done(i) ? 1.0 : 0.0;
  }
  return b;
}

SacAgent::Sample SacAgent::sample_policy(const Matrix& obs, bool record) {
  const auto n = obs.rows();
  const auto ad = static_cast<Eigen::Index>(spec_.act_dim);
  const std::span<const double> flat(obs.data(), static_cast<std::size_t>(obs.size()));
  const auto mean = record ? actor_->forward_train(flat, static_cast<std::size_t>(n))
                           : actor_->forward_batch(flat, static_cast<std::size_t>(n));
  Sample s;
  s.raw_std = record ? explorer_.forward(obs) : explorer_.predict(obs);
  s.mean = Eigen::Map<const Matrix>(mean.data(), n, ad);
  s.log_std.resize(n, ad);
  s.noise.resize(n, ad);
  s.action.resize(n, ad);
  s.log_prob = Vector::Zero(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double span = config_.log_std_max - config_.log_std_min;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index d = 0; d < ad; ++d) {
      const double ls = config_.log_std_min + 0.5 * span * (std::tanh(s.raw_std(r, d)) + 1.0);
      const double eps = normal(rng_);
      const double y = std::tanh(s.mean(r, d) + std::exp(ls) * eps);
      s.log_std(r, d) = ls;
      s.noise(r, d) = eps;
      s.action(r, d) = y;
      s.log_prob(r) += -0.5 * eps * eps - ls - 0.5 * kLogTwoPi -
                       std::log(scale_[static_cast<std::size_t>(d)] * (1.0 - y * y) + kSquashEps);
    }
  }
  return s;
}

void SacAgent::critic_step(const Batch& batch) {
  const auto n = static_cast<double>(batch.obs.rows());
  const Sample next = sample_policy(batch.next_obs, false);
  const Matrix next_in = concat(batch.next_obs, next.action);
  const Matrix t1 = q1_target_.predict(next_in);
  const Matrix t2 = q2_target_.predict(next_in);
  const double a = alpha();
  Vector target(batch.obs.rows());
  for (Eigen::Index r = 0; r < target.size(); ++r) {
    const double v = std::min(t1(r, 0), t2(r, 0)) - a * next.log_prob(r);
    target(r) = batch.reward(r) + (1.0 - batch.done(r)) * config_.gamma * v;
  }

  const Matrix in = concat(batch.obs, batch.action);
  q1_.zero_grad();
  q2_.zero_grad();
  const Matrix q1 = q1_.forward(in);
  const Matrix q2 = q2_.forward(in);
  const Matrix e1 = q1.col(0) - target;
  const Matrix e2 = q2.col(0) - target;
  last_q_loss_ = e1.squaredNorm() / n + e2.squaredNorm() / n;
  q1_.backward(2.0 / n * e1);
  q2_.backward(2.0 / n * e2);
  std::vector<ParamRef> params = q1_.params();
  append(params, q2_.params());
  q_opt_.step(params);
}

void SacAgent::actor_step(const Batch& batch, SacReport& report) {
  const auto rows = batch.obs.rows();
  const auto ad = static_cast<Eigen::Index>(spec_.act_dim);
  const auto n = static_cast<double>(rows);
  actor_->zero_grad();
  explorer_.zero_grad();
  Sample s = sample_policy(batch.obs, true);

  const Matrix in = concat(batch.obs, s.action);
  const Matrix q1 = q1_.forward(in);
  const Matrix q2 = q2_.forward(in);
  Matrix d1 = Matrix::Zero(rows, 1);
  Matrix d2 = Matrix::Zero(rows, 1);
  double loss = 0.0;
  const double a = alpha();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const bool first = q1(r, 0) <= q2(r, 0);
    loss += a * s.log_prob(r) - (first ? q1(r, 0) : q2(r, 0));
    (first ? d1 : d2)(r, 0) = -1.0 / n;
  }
  loss /= n;
  // Gradient of -min Q with respect to the critic input; critics stay fixed.
  const Matrix g1 = q1_.backward(d1, false);
  const Matrix g2 = q2_.backward(d2, false);
  const Matrix dq_da = (g1 + g2).rightCols(ad);

  const double span = config_.log_std_max - config_.log_std_min;
  Matrix dmean(rows, ad);
  Matrix draw(rows, ad);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index d = 0; d < ad; ++d) {
      const double y = s.action(r, d);
      const double sc = scale_[static_cast<std::size_t>(d)];
      const double dlogp_dy = 2.0 * sc * y / (sc * (1.0 - y * y) + kSquashEps);
      const double dy = a / n * dlogp_dy + dq_da(r, d);
      const double dx = dy * (1.0 - y * y);
      const double sigma = std::exp(s.log_std(r, d));
      const double dls = dx * sigma * s.noise(r, d) - a / n;
      const double th = std::tanh(s.raw_std(r, d));
      dmean(r, d) = dx;
      draw(r, d) = dls * 0.5 * span * (1.0 - th * th);
    }
  }
  actor_->backward(std::span<const double>(dmean.data(), static_cast<std::size_t>(dmean.size())));
  explorer_.backward(draw);

  std::vector<ParamRef> params = actor_->params();
  append(params, explorer_.params());
  actor_opt_.step(params);
  actor_->after_update();

  const double mean_logp = s.log_prob.mean();
  if (config_.autotune) {
    log_alpha_grad_ = -alpha() * (mean_logp + target_entropy_);
    const ParamRef p{std::span<double>(&log_alpha_, 1),
                     std::span<const double>(&log_alpha_grad_, 1)};
    alpha_opt_.step(std::span<const ParamRef>(&p, 1));
  }
  report.actor_updated = true;
  report.actor_loss = loss;
  report.entropy = -mean_logp;
}

SacReport SacAgent::update(const ReplayBuffer& buffer, std::int64_t global_step) {
  SacReport report;
  const auto ready = static_cast<std::size_t>(std::max<std::int64_t>(config_.learning_starts, 1));
  if (buffer.size() < ready || buffer.size() == 0) return report;
  if (!actor_->stats().usable()) throw StateError("SacAgent: observation statistics not usable");

  const Batch batch = gather(buffer);
  if (!freeze_critics_) critic_step(batch);
  report.q_loss = last_q_loss_;

  if (global_step % config_.policy_frequency == 0) {
    for (int i = 0; i < config_.policy_frequency; ++i) {
      actor_step(batch, report);
    }
  }
  if (!freeze_critics_ && global_step % config_.target_frequency == 0) update_targets();

  report.updated = true;
  report.alpha = alpha();
  if (!actor_->finite() || !explorer_.all_finite() || !q1_.all_finite() || !q2_.all_finite() ||
      !std::isfinite(log_alpha_) || !std::isfinite(report.q_loss)) {
    throw NumericError("non-finite value during SAC update at step " +
                       std::to_string(global_step));
  }
  return report;
}

void SacAgent::update_targets() {
  q1_target_.polyak_from(q1_, config_.tau);
  q2_target_.polyak_from(q2_, config_.tau);
}

}  // namespace dwc
