#include "dwc/bridge.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <json.hpp>

#include "dwc/errors.hpp"

namespace dwc {

using json = nlohmann::json;

FdChannel::FdChannel(int read_fd, int write_fd, int child_pid)
    : read_fd_(read_fd), write_fd_(write_fd), child_pid_(child_pid) {}

FdChannel::~FdChannel() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
  if (child_pid_ > 0) {
    int status = 0;
    ::waitpid(child_pid_, &status, 0);
  }
}

void FdChannel::send_line(const std::string& line) {
  std::string buf = line + "\n";
  std::size_t sent = 0;
  while (sent < buf.size()) {
    const ssize_t n = ::write(write_fd_, buf.data() + sent, buf.size() - sent);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("bridge: write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

std::string FdChannel::recv_line() {
  for (;;) {
    const auto nl = pending_.find('\n');
    if (nl != std::string::npos) {
      std::string line = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    char chunk[4096];
    const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("bridge: read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw ProtocolError("bridge: connection closed by peer");
    pending_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::unique_ptr<LineChannel> connect_tcp(const std::string& endpoint) {
  const std::string rest = endpoint.substr(std::string("tcp://").size());
  const auto colon = rest.rfind(':');
  if (colon == std::string::npos) throw ConfigError("bridge endpoint needs host:port");
  const std::string host = rest.substr(0, colon);
  const std::string port = rest.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw ProtocolError("bridge: cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ProtocolError("bridge: cannot connect to " + endpoint);
  return std::make_unique<FdChannel>(fd, fd);
}

std::unique_ptr<LineChannel> spawn_stdio(const std::string& endpoint) {
  const std::string command = endpoint.substr(std::string("stdio:").size());
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
    throw ProtocolError("bridge: pipe() failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw ProtocolError("bridge: fork() failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  // A dead child must surface as a protocol error, not SIGPIPE.
  ::signal(SIGPIPE, SIG_IGN);
  return std::make_unique<FdChannel>(from_child[0], to_child[1], pid);
}

namespace {

json parse_reply(const std::string& line) {
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("bridge: malformed reply: ") + e.what());
  }
  if (!reply.is_object()) throw ProtocolError("bridge: reply is not a JSON object");
  if (reply.contains("error")) {
    throw ProtocolError("bridge: peer reported error: " + reply["error"].dump());
  }
  return reply;
}

std::vector<double> read_vector(const json& reply, const char* key, std::size_t expected) {
  if (!reply.contains(key) || !reply[key].is_array()) {
    throw ProtocolError(std::string("bridge: reply lacks array '") + key + "'");
  }
  std::vector<double> out;
  for (const auto& v : reply[key]) {
    if (!v.is_number()) throw ProtocolError(std::string("bridge: non-numeric entry in '") + key + "'");
    out.push_back(v.get<double>());
    if (!std::isfinite(out.back())) throw ProtocolError("bridge: non-finite value");
  }
  if (expected != 0 && out.size() != expected) {
    throw ProtocolError(std::string("bridge: '") + key + "' has " +
                        std::to_string(out.size()) + " entries, expected " +
                        std::to_string(expected));
  }
  return out;
}

}  // namespace

BridgeEnv::BridgeEnv(const std::string& endpoint)
    : BridgeEnv(endpoint.starts_with("tcp://") ? connect_tcp(endpoint) : spawn_stdio(endpoint)) {}

BridgeEnv::BridgeEnv(std::unique_ptr<LineChannel> channel) : channel_(std::move(channel)) {
  fetch_spec();
}

void BridgeEnv::fetch_spec() {
  channel_->send_line(json{{"cmd", "spec"}}.dump());
  const json reply = parse_reply(channel_->recv_line());
  if (!reply.contains("obs_dim") || !reply["obs_dim"].is_number_integer() ||
      !reply.contains("act_dim") || !reply["act_dim"].is_number_integer()) {
    throw ProtocolError("bridge: spec reply lacks obs_dim/act_dim");
  }
  spec_.obs_dim = reply["obs_dim"].get<int>();
  spec_.act_dim = reply["act_dim"].get<int>();
  if (spec_.obs_dim <= 0 || spec_.act_dim <= 0) throw ProtocolError("bridge: bad dimensions");
  const auto n = static_cast<std::size_t>(spec_.act_dim);
  spec_.act_low = read_vector(reply, "act_low", n);
  spec_.act_high = read_vector(reply, "act_high", n);
  for (std::size_t d = 0; d < n; ++d) {
    if (!(spec_.act_low[d] < spec_.act_high[d])) throw ProtocolError("bridge: empty action range");
  }
}

EnvSpec BridgeEnv::spec() { return spec_; }

std::vector<double> BridgeEnv::reset(std::uint64_t seed) {
  channel_->send_line(json{{"cmd", "reset"}, {"seed", seed}}.dump());
  const json reply = parse_reply(channel_->recv_line());
  return read_vector(reply, "obs", static_cast<std::size_t>(spec_.obs_dim));
}

StepResult BridgeEnv::step(std::span<const double> action) {
  if (action.size() != static_cast<std::size_t>(spec_.act_dim)) {
    throw ShapeError("bridge: action has wrong dimension");
  }
  channel_->send_line(
      json{{"cmd", "step"}, {"action", std::vector<double>(action.begin(), action.end())}}.dump());
  const json reply = parse_reply(channel_->recv_line());
  StepResult out;
  out.obs = read_vector(reply, "obs", static_cast<std::size_t>(spec_.obs_dim));
  if (!reply.contains("reward") || !reply["reward"].is_number()) {
    throw ProtocolError("bridge: step reply lacks numeric 'reward'");
  }
  if (!reply.contains("done") || !reply["done"].is_boolean()) {
    throw ProtocolError("bridge: step reply lacks boolean 'done'");
  }
  out.reward = reply["reward"].get<double>();
  out.done = reply["done"].get<bool>();
  if (reply.contains("truncated")) {
    if (!reply["truncated"].is_boolean()) throw ProtocolError("bridge: 'truncated' must be boolean");
    out.truncated = reply["truncated"].get<bool>();
  }
  return out;
}

}  // namespace dwc
