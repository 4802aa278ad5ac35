#include <doctest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dwc/binio.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run dwc_cli(const std::string& args) {
  const std::string cmd = std::string(DWC_CLI_PATH) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) r.out += buf;
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "dwc_cli_test";
  fs::create_directories(dir);
  ::setenv("DWC_OUTPUT_ROOT", dir.string().c_str(), 1);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kTiny =
    "env = pendulum\n"
    "total_steps = 300\n"
    "layers = 2\n"
    "width = 16\n"
    "arity = 4\n"
    "bits = 7\n"
    "learning_starts = 100\n"
    "batch_size = 16\n"
    "critic_hidden = 16\n"
    "explore_hidden = 8\n"
    "eval_interval = 300\n"
    "eval_episodes = 1\n"
    "output_dir = runs\n";

std::string model_path(const std::string& out) {
  const auto at = out.find("model: ");
  REQUIRE(at != std::string::npos);
  const auto end = out.find('\n', at);
  return out.substr(at + 7, end - at - 7);
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  const auto dir = scratch();
  CHECK(dwc_cli("").code == 2);
  CHECK(dwc_cli("frobnicate").code == 2);
  CHECK(dwc_cli("--help").code == 0);
  write(dir / "no_steps.cfg", "env = pendulum\n");
  const auto r = dwc_cli("train " + (dir / "no_steps.cfg").string());
  CHECK(r.code == 2);
  CHECK(r.out.find("total_steps") != std::string::npos);
  write(dir / "bad_key.cfg", "env = pendulum\ntotal_steps = 1\nwidht = 3\n");
  CHECK(dwc_cli("train " + (dir / "bad_key.cfg").string()).code == 2);
}

TEST_CASE("presets are listed") {
  const auto r = dwc_cli("presets");
  CHECK(r.code == 0);
  CHECK(r.out.find("pendulum-sac") != std::string::npos);
}

TEST_CASE("train, compile, parity, eval and diag") {
  const auto dir = scratch();
  write(dir / "tiny.cfg", kTiny);
  const auto t = dwc_cli("train " + (dir / "tiny.cfg").string() + " --quiet");
  REQUIRE(t.code == 0);
  const auto model = model_path(t.out);
  REQUIRE(fs::exists(model));
  CHECK(fs::path(model).parent_path().parent_path() == dir / "runs");
  CHECK(fs::exists(fs::path(model).parent_path() / "record.json"));
  CHECK(fs::exists(fs::path(model).parent_path() / "config.txt"));

  // Same config, byte-identical model.
  const auto first = dwc::read_file(model);
  REQUIRE(dwc_cli("train " + (dir / "tiny.cfg").string() + " --quiet").code == 0);
  CHECK(dwc::read_file(model) == first);

  const auto circuit = (dir / "tiny.dwcc").string();
  const auto rtl = (dir / "tiny.v").string();
  const auto c = dwc_cli("compile " + model + " --stages 2 --circuit " + circuit + " --rtl " + rtl);
  REQUIRE(c.code == 0);
  CHECK(c.out.find("lut_count: ") != std::string::npos);
  CHECK(fs::exists(circuit));
  CHECK(fs::exists(rtl));
  CHECK(dwc_cli("compile " + model + " --stages 3").code == 2);

  const auto p = dwc_cli("parity " + model + " " + circuit + " --vectors 2000");
  CHECK(p.code == 0);

  const auto e = dwc_cli("eval " + model + " --episodes 2 --noise 0.1");
  CHECK(e.code == 0);
  CHECK(e.out.find("episode,sigma,return\n0,0.1,") != std::string::npos);

  fs::remove_all(dir / "diag");
  const auto d = dwc_cli("diag " + model + " --what bits --out " + (dir / "diag").string());
  CHECK(d.code == 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "diag")) {
    CHECK(entry.path().filename().string().rfind("bits_", 0) == 0);
    ++files;
  }
  CHECK(files == 1);
  CHECK(dwc_cli("diag " + model + " --what colours").code == 2);
}

TEST_CASE("runtime failures exit with 1") {
  const auto dir = scratch();
  write(dir / "junk.dwc", "not a model");
  CHECK(dwc_cli("compile " + (dir / "junk.dwc").string()).code == 1);
  CHECK(dwc_cli("eval " + (dir / "missing.dwc").string()).code == 1);
}
