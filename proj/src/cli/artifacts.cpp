#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "expembed/cli.hpp"
#include "expembed/error.hpp"

namespace expembed::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  out << text;
}

}  // namespace

Artifacts::Artifacts(const RunConfig& cfg, std::filesystem::path dir)
    : cfg_(cfg), dir_(std::move(dir)), hash_(config_hash(cfg)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::ConfigError, "cannot create " + dir_.string() + ": " + ec.message());
}

void Artifacts::write_csv(const std::string& file, const std::string& body) {
  std::string text = "# seed=" + std::to_string(cfg_.seed) + "\n# config_hash=" + hex(hash_) + "\n" + body;
  write_file(dir_ / file, text);
  files_.push_back(file);
}

void Artifacts::add_check(std::string name, double value, double threshold, bool pass) {
  checks_.push_back({std::move(name), value, threshold, pass});
}

void Artifacts::check_below(std::string name, double value, double threshold) {
  add_check(std::move(name), value, threshold, value < threshold);
}

void Artifacts::set_summary(const std::string& key, nlohmann::ordered_json value) { summary_[key] = std::move(value); }

bool Artifacts::all_pass() const {
  for (const auto& c : checks_)
    if (!c.pass) return false;
  return true;
}

void Artifacts::write_manifest() {
  nlohmann::ordered_json m;
  m["tool"] = "expembed";
  m["version"] = kVersion;
  m["config"] = config_echo(cfg_);
  m["seed"] = cfg_.seed;
  m["config_hash"] = hex(hash_);
  m["artifacts"] = files_;
  m["summary"] = summary_;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : checks_)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
  m["checks"] = checks;
  m["pass"] = all_pass();
  write_file(dir_ / "manifest.json", m.dump(2) + "\n");
}

}  // namespace expembed::cli
