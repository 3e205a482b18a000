#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "expembed/cli.hpp"
#include "expembed/error.hpp"

using namespace expembed;
namespace fs = std::filesystem;

namespace {

const char* kMu3 = R"({"measure": {"atoms": [{"x": -1, "p": 0.25}, {"x": 0, "p": 0.5}, {"x": 1, "p": 0.25}]},
 "paths": 20000, "seed": 7})";

std::string tool() {
  const char* t = std::getenv("EXPEMBED_TOOL");
  REQUIRE(t != nullptr);
  return t;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("expembed_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int exit_code(const std::string& cmd) {
  const int st = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST_CASE("same seed gives byte-identical artifacts") {
  const fs::path dir = scratch("determinism");
  write(dir / "cfg.json", kMu3);
  for (const char* run : {"a", "b"})
    REQUIRE(exit_code(tool() + " simulate-chain --config " + (dir / "cfg.json").string() + " --out-dir " +
                      (dir / run).string()) == 0);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    if (e.path().extension() != ".csv") continue;
    CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
    ++compared;
  }
  CHECK(compared > 0);
  CHECK(slurp(dir / "a" / "manifest.json") == slurp(dir / "b" / "manifest.json"));
}

TEST_CASE("csv artifacts carry seed and config hash") {
  const fs::path dir = scratch("header");
  write(dir / "cfg.json", kMu3);
  REQUIRE(exit_code(tool() + " chain-law --config " + (dir / "cfg.json").string() + " --out-dir " +
                    (dir / "o").string()) == 0);
  for (const auto& e : fs::directory_iterator(dir / "o")) {
    if (e.path().extension() != ".csv") continue;
    const std::string text = slurp(e.path());
    CHECK(text.rfind("# seed=7\n# config_hash=", 0) == 0);
  }
}

TEST_CASE("malformed json exits with 2") {
  const fs::path dir = scratch("malformed");
  write(dir / "cfg.json", "{\"paths\": 10,");
  CHECK(exit_code(tool() + " verify-all --config " + (dir / "cfg.json").string() + " --out-dir " +
                  (dir / "o").string()) == 2);
  write(dir / "bad_key.json", "{\"pathz\": 10}");
  CHECK(exit_code(tool() + " verify-all --config " + (dir / "bad_key.json").string()) == 2);
  CHECK(exit_code(tool() + " no-such-command") == 2);
}

TEST_CASE("invalid measure exits with 2") {
  const fs::path dir = scratch("invalid");
  write(dir / "cfg.json", R"({"measure": {"atoms": [{"x": -1, "p": 0.5}, {"x": 2, "p": 0.4}]}})");
  CHECK(exit_code(tool() + " speed --config " + (dir / "cfg.json").string() + " --out-dir " +
                  (dir / "o").string()) == 2);
}

TEST_CASE("verify-all on the three-atom measure passes") {
  const fs::path dir = scratch("verify");
  write(dir / "cfg.json", kMu3);
  REQUIRE(exit_code(tool() + " verify-all --config " + (dir / "cfg.json").string() + " --out-dir " +
                    (dir / "o").string()) == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
  CHECK(m.at("pass").get<bool>());
  CHECK(m.at("seed").get<std::uint64_t>() == 7);
  bool saw_tv = false, saw_resolvent = false, saw_poisson = false;
  for (const auto& c : m.at("checks")) {
    const std::string name = c.at("name");
    CHECK(c.at("pass").get<bool>());
    if (name == "chain_oracle_tv") {
      saw_tv = true;
      CHECK(c.at("value").get<double>() < 1e-8);
    }
    if (name == "resolvent_identity") saw_resolvent = true;
    if (name == "poisson_position_ks") saw_poisson = true;
  }
  CHECK(saw_tv);
  CHECK(saw_resolvent);
  CHECK(saw_poisson);
}

TEST_CASE("a failing threshold exits with 1") {
  const fs::path dir = scratch("fail");
  write(dir / "cfg.json", kMu3);
  CHECK(exit_code(tool() + " embed-poisson --config " + (dir / "cfg.json").string() + " --tol ks=1e-9 --out-dir " +
                  (dir / "o").string()) == 1);
  const auto m = nlohmann::json::parse(slurp(dir / "o" / "manifest.json"));
  CHECK_FALSE(m.at("pass").get<bool>());
}

TEST_CASE("output directory from the environment") {
  const fs::path dir = scratch("env");
  write(dir / "cfg.json", kMu3);
  const std::string cmd =
      "EXPEMBED_OUT_DIR=" + (dir / "envout").string() + " " + tool() + " potential --config " + (dir / "cfg.json").string();
  REQUIRE(exit_code(cmd) == 0);
  CHECK(fs::exists(dir / "envout" / "manifest.json"));
}

TEST_CASE("load_config: flags override the file") {
  const fs::path dir = scratch("overrides");
  write(dir / "cfg.json", R"({"measure": {"atoms": [{"x": 0, "p": 1}]}, "paths": 500, "seed": 3, "dt": 0.01, "tolerances": {"ks": 0.05}, "out_dir": "x"})");
  cli::Overrides ov;
  ov.paths = 900;
  ov.thresholds["ks"] = 0.02;
  const auto cfg = cli::load_config(cli::Command::SimulateSde, (dir / "cfg.json").string(), ov);
  CHECK(cfg.paths == 900);
  CHECK(cfg.seed == 3);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.thresholds.at("ks") == 0.02);
  CHECK(cfg.thresholds.at("tv") == 1e-8);
  CHECK(cfg.out_dir == "x");
}

TEST_CASE("load_config rejects bad values") {
  const fs::path dir = scratch("reject");
  write(dir / "m.json", R"({"atoms": [{"x": 0, "p": 1}]})");
  auto code_of = [&](const std::string& text) {
    write(dir / "cfg.json", text);
    cli::Overrides ov;
    ov.measure_path = (dir / "m.json").string();
    try {
      cli::load_config(cli::Command::VerifyAll, (dir / "cfg.json").string(), ov);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("[1, 2]") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"paths": -4})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"dt": 0})") == ErrorCode::ConfigError);
  CHECK(code_of(R"({"tolerances": {"nope": 1}})") == ErrorCode::ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  cli::RunConfig a;
  cli::RunConfig b = a;
  CHECK(cli::config_hash(a) == cli::config_hash(b));
  b.out_dir = "elsewhere";
  CHECK(cli::config_hash(a) == cli::config_hash(b));
  b.seed += 1;
  CHECK(cli::config_hash(a) != cli::config_hash(b));
  // FNV-1a 64-bit reference values
  CHECK(cli::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(cli::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("measure json forms") {
  const auto raw = cli::parse_measure_json(
      nlohmann::ordered_json::parse(R"({"atoms": [{"x": 0, "p": 0.5}], "segments": [{"l": -1, "r": 1, "density": 0.25}]})"));
  const Measure mu = Measure::validate(raw);
  CHECK(mu.mean() == doctest::Approx(0.0));
  const auto lap = Measure::validate(cli::parse_measure_json(nlohmann::ordered_json::parse(
      R"({"discretize": {"law": "laplace", "loc": 0, "scale": 1, "lo": -30, "hi": 30, "cells": 600}})")));
  CHECK(std::abs(lap.mean()) < 1e-9);
}
