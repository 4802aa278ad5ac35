#include "dwc/replay.hpp"

#include <algorithm>
#include <cmath>

#include "dwc/errors.hpp"

namespace dwc {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
  // Storage grows with use; a 1e6 capacity should not allocate up front.
}

void ReplayBuffer::add(std::span<const double> obs, std::span<const double> action,
                       double reward, std::span<const double> next_obs, bool done) {
  const auto od = static_cast<std::size_t>(obs_dim_);
  const auto ad = static_cast<std::size_t>(act_dim_);
  if (obs.size() != od || next_obs.size() != od || action.size() != ad) {
    throw ShapeError("replay: transition has wrong dimensions");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(obs.begin(), obs.end(), finite) ||
      !std::all_of(action.begin(), action.end(), finite) || !std::isfinite(reward) ||
      !std::all_of(next_obs.begin(), next_obs.end(), finite)) {
    throw DomainError("replay: non-finite transition");
  }
  if (size_ < capacity_ && cursor_ == size_) {
    obs_.insert(obs_.end(), obs.begin(), obs.end());
    actions_.insert(actions_.end(), action.begin(), action.end());
    rewards_.push_back(reward);
    next_obs_.insert(next_obs_.end(), next_obs.begin(), next_obs.end());
    dones_.push_back(done ? 1 : 0);
    ++size_;
  } else {
    std::copy(obs.begin(), obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(cursor_ * od));
    std::copy(action.begin(), action.end(),
              actions_.begin() + static_cast<std::ptrdiff_t>(cursor_ * ad));
    rewards_[cursor_] = reward;
    std::copy(next_obs.begin(), next_obs.end(),
              next_obs_.begin() + static_cast<std::ptrdiff_t>(cursor_ * od));
    dones_[cursor_] = done ? 1 : 0;
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, std::mt19937_64& rng) const {
  if (size_ == 0) throw StateError("replay: cannot sample from an empty buffer");
  std::uniform_int_distribution<std::size_t> dist(0, size_ - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = dist(rng);
  return idx;
}

std::span<const double> ReplayBuffer::obs(std::size_t i) const {
  return std::span(obs_).subspan(i * static_cast<std::size_t>(obs_dim_),
                                 static_cast<std::size_t>(obs_dim_));
}

std::span<const double> ReplayBuffer::action(std::size_t i) const {
  return std::span(actions_).subspan(i * static_cast<std::size_t>(act_dim_),
                                     static_cast<std::size_t>(act_dim_));
}

std::span<const double> ReplayBuffer::next_obs(std::size_t i) const {
  return std::span(next_obs_).subspan(i * static_cast<std::size_t>(obs_dim_),
                                      static_cast<std::size_t>(obs_dim_));
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ShapeError("replay: index out of range");
  const auto o = obs(i);
  const auto a = action(i);
  const auto n = next_obs(i);
  return {{o.begin(), o.end()}, {a.begin(), a.end()}, rewards_[i], {n.begin(), n.end()},
          dones_[i] != 0};
}

}  // namespace dwc
