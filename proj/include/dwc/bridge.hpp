#pragma once

#include <memory>
#include <string>

#include "dwc/env.hpp"

namespace dwc {

/// Bidirectional newline-delimited text channel.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(const std::string& line) = 0;
  /// Blocks for one line (without the trailing newline). Throws ProtocolError
  /// if the peer closes the stream first.
  virtual std::string recv_line() = 0;
};

/// Channel over a pair of file descriptors (one socket, or two pipes).
/// Owns the descriptors and, when given, a child process to reap.
class FdChannel final : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, int child_pid = -1);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void send_line(const std::string& line) override;
  std::string recv_line() override;

 private:
  int read_fd_;
  int write_fd_;
  int child_pid_;
  std::string pending_;
};

/// Connects to "tcp://host:port".
std::unique_ptr<LineChannel> connect_tcp(const std::string& endpoint);
/// Spawns "stdio:<command>" through /bin/sh and talks over its stdin/stdout.
std::unique_ptr<LineChannel> spawn_stdio(const std::string& endpoint);

/// Client side of the environment bridge protocol:
///   -> {"cmd":"spec"}            <- {"obs_dim":n,"act_dim":m,"act_low":[..],"act_high":[..]}
///   -> {"cmd":"reset","seed":s}  <- {"obs":[..]}
///   -> {"cmd":"step","action":[..]} <- {"obs":[..],"reward":r,"done":b}
/// An optional boolean "truncated" marks time-limit ends. A reply carrying
/// "error", or one that does not parse, raises ProtocolError.
class BridgeEnv final : public Env {
 public:
  explicit BridgeEnv(const std::string& endpoint);
  explicit BridgeEnv(std::unique_ptr<LineChannel> channel);

  EnvSpec spec() override;
  std::vector<double> reset(std::uint64_t seed) override;
  StepResult step(std::span<const double> action) override;

 private:
  void fetch_spec();

  std::unique_ptr<LineChannel> channel_;
  EnvSpec spec_;
};

}  // namespace dwc
