#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dwc {

struct Transition {
  std::vector<double> obs;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_obs;
  bool done = false;
};

/// Fixed-capacity ring of transitions with uniform sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int obs_dim, int act_dim);

  /// Throws DomainError on non-finite entries, ShapeError on wrong lengths.
  void add(std::span<const double> obs, std::span<const double> action, double reward,
           std::span<const double> next_obs, bool done);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }

  /// Uniform indices over the filled region.
  std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64& rng) const;

  Transition at(std::size_t index) const;
  std::span<const double> obs(std::size_t i) const;
  std::span<const double> action(std::size_t i) const;
  std::span<const double> next_obs(std::size_t i) const;
  double reward(std::size_t i) const { return rewards_[i]; }
  bool done(std::size_t i) const { return dones_[i] != 0; }

 private:
  std::size_t capacity_;
  int obs_dim_;
  int act_dim_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  std::vector<double> obs_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_obs_;
  std::vector<std::uint8_t> dones_;
};

}  // namespace dwc
