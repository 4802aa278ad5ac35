#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <deque>
#include <json.hpp>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "dwc/bridge.hpp"
#include "dwc/env.hpp"
#include "dwc/errors.hpp"

using namespace dwc;
using nlohmann::json;

namespace {

// Replays canned replies and records what the client sent.
class ScriptedChannel final : public LineChannel {
 public:
  ScriptedChannel(std::deque<std::string> replies, std::vector<std::string>* sent)
      : replies_(std::move(replies)), sent_(sent) {}
  void send_line(const std::string& line) override { sent_->push_back(line); }
  std::string recv_line() override {
    if (replies_.empty()) throw ProtocolError("script exhausted");
    auto r = replies_.front();
    replies_.pop_front();
    return r;
  }

 private:
  std::deque<std::string> replies_;
  std::vector<std::string>* sent_;
};

const std::string kSpec =
    R"({"obs_dim":2,"act_dim":1,"act_low":[-1.0],"act_high":[1.0]})";

std::unique_ptr<LineChannel> scripted(std::deque<std::string> replies,
                                      std::vector<std::string>* sent) {
  return std::make_unique<ScriptedChannel>(std::move(replies), sent);
}

// Serves a local pendulum over one descriptor until the peer closes.
void serve_pendulum(int fd) {
  PendulumEnv env;
  FdChannel ch(fd, fd);
  try {
    for (;;) {
      const json req = json::parse(ch.recv_line());
      json reply;
      const auto cmd = req["cmd"].get<std::string>();
      if (cmd == "spec") {
        const auto s = env.spec();
        reply = {{"obs_dim", s.obs_dim}, {"act_dim", s.act_dim},
                 {"act_low", s.act_low}, {"act_high", s.act_high}};
      } else if (cmd == "reset") {
        reply = {{"obs", env.reset(req["seed"].get<std::uint64_t>())}};
      } else {
        const auto a = req["action"].get<std::vector<double>>();
        const auto r = env.step(a);
        reply = {{"obs", r.obs}, {"reward", r.reward}, {"done", r.done},
                 {"truncated", r.truncated}};
      }
      ch.send_line(reply.dump());
    }
  } catch (const ProtocolError&) {
    // client hung up
  }
}

void check_matches_local(Env& remote) {
  PendulumEnv local;
  const auto spec = remote.spec();
  CHECK(spec.obs_dim == 3);
  CHECK(spec.act_low[0] == -2.0);
  CHECK(remote.reset(11) == local.reset(11));
  for (int t = 0; t < kPendulumHorizon; ++t) {
    const std::vector<double> a{std::cos(0.1 * t)};
    const auto r = remote.step(a);
    const auto l = local.step(a);
    REQUIRE(r.obs == l.obs);  // JSON doubles round-trip exactly
    CHECK(r.reward == l.reward);
    CHECK(r.truncated == l.truncated);
  }
}

}  // namespace

TEST_CASE("socketpair bridge reproduces the local environment") {
  int sv[2];
  REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, sv) == 0);
  std::thread server(serve_pendulum, sv[1]);
  {
    BridgeEnv env(std::make_unique<FdChannel>(sv[0], sv[0]));
    check_matches_local(env);
  }
  server.join();
}

TEST_CASE("tcp bridge") {
  const int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(lfd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  REQUIRE(::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
  REQUIRE(::listen(lfd, 1) == 0);
  socklen_t len = sizeof(addr);
  ::getsockname(lfd, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);
  std::thread server([lfd] {
    const int c = ::accept(lfd, nullptr, nullptr);
    ::close(lfd);
    if (c >= 0) serve_pendulum(c);
  });
  {
    auto env = make_env("tcp://127.0.0.1:" + std::to_string(port));
    check_matches_local(*env);
  }
  server.join();
}

TEST_CASE("stdio bridge talks to a child process") {
  // The child answers spec, then one reset, then reports an error.
  const std::string script =
      "stdio:read l; echo '" + kSpec +
      "'; read l; echo '{\"obs\":[0.5,-0.5]}'; read l; echo '{\"error\":\"boom\"}'";
  BridgeEnv env(script);
  CHECK(env.spec().obs_dim == 2);
  CHECK(env.reset(1) == std::vector<double>{0.5, -0.5});
  const std::vector<double> a{0.0};
  CHECK_THROWS_AS(env.step(a), ProtocolError);
}

TEST_CASE("stdio child that exits early raises ProtocolError") {
  CHECK_THROWS_AS(BridgeEnv("stdio:true"), ProtocolError);
}

TEST_CASE("wire format of requests") {
  std::vector<std::string> sent;
  BridgeEnv env(scripted({kSpec, R"({"obs":[1,2]})",
                          R"({"obs":[3,4],"reward":-1.5,"done":true})"},
                         &sent));
  env.reset(42);
  const std::vector<double> a{0.25};
  const auto r = env.step(a);
  CHECK(r.reward == -1.5);
  CHECK(r.done);
  CHECK_FALSE(r.truncated);
  REQUIRE(sent.size() == 3);
  CHECK(json::parse(sent[0]) == json{{"cmd", "spec"}});
  CHECK(json::parse(sent[1]) == json{{"cmd", "reset"}, {"seed", 42}});
  CHECK(json::parse(sent[2]) == json{{"cmd", "step"}, {"action", {0.25}}});
  CHECK_THROWS_AS(env.step(std::vector<double>{0.0, 1.0}), ShapeError);
}

TEST_CASE("malformed replies raise ProtocolError") {
  std::vector<std::string> sent;
  CHECK_THROWS_AS(BridgeEnv(scripted({"not json"}, &sent)), ProtocolError);
  CHECK_THROWS_AS(BridgeEnv(scripted({"[1,2]"}, &sent)), ProtocolError);
  CHECK_THROWS_AS(BridgeEnv(scripted({R"({"obs_dim":2})"}, &sent)), ProtocolError);
  CHECK_THROWS_AS(
      BridgeEnv(scripted({R"({"obs_dim":2,"act_dim":1,"act_low":[1],"act_high":[1]})"}, &sent)),
      ProtocolError);

  const std::vector<std::string> bad_steps = {
      R"({"obs":[1],"reward":0,"done":false})",
      R"({"obs":[1,"x"],"reward":0,"done":false})",
      R"({"obs":[1,2],"done":false})",
      R"({"obs":[1,2],"reward":0,"done":0})",
      R"({"obs":[1,2],"reward":0,"done":false,"truncated":"yes"})",
      R"({"error":"env crashed"})",
  };
  for (const auto& line : bad_steps) {
    BridgeEnv env(scripted({kSpec, line}, &sent));
    CHECK_THROWS_AS(env.step(std::vector<double>{0.0}), ProtocolError);
  }
}

TEST_CASE("endpoint validation") {
  CHECK_THROWS_AS(connect_tcp("tcp://localhost"), ConfigError);
}
