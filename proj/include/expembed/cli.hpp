#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "expembed/measure.hpp"

namespace expembed::cli {

enum class Command {
  Potential,
  Speed,
  ChainLaw,
  SimulateChain,
  SimulateSde,
  SimulateTimechange,
  EmbedPoisson,
  ResolventCheck,
  VerifyAll,
  Price,
};

const char* to_string(Command c);
std::optional<Command> parse_command(const std::string& s);
std::vector<std::string> command_names();

// Check thresholds. Keys: tv, ks, z, resolvent, resolvent_atomized, price.
using Thresholds = std::map<std::string, double>;
Thresholds default_thresholds();

struct RunConfig {
  Command command = Command::VerifyAll;
  std::string measure_path;
  std::string options_path;  // price only
  nlohmann::ordered_json measure_json;  // inline measure, if given
  std::size_t paths = 100000;
  double h = 0.0;   // 0 picks the default grid step
  double dt = 1e-4;
  std::uint64_t seed = 20240601;
  double rate = 1.0;
  std::size_t bins = 50;
  std::size_t grid_points = 201;
  std::size_t atomize_cells = 256;
  std::string out_dir;
  Thresholds thresholds = default_thresholds();
  bool serial = false;
};

// Values explicitly given on the command line; each overrides the file.
struct Overrides {
  std::optional<std::string> measure_path, options_path, out_dir;
  std::optional<std::size_t> paths, bins, grid_points, atomize_cells;
  std::optional<double> h, dt, rate;
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> thresholds;
  bool serial = false;
};

// Reads the optional JSON config, applies overrides and validates. The output
// directory falls back to $EXPEMBED_OUT_DIR, then "out". Throws
// Error{ConfigError} on any problem.
RunConfig load_config(Command command, const std::optional<std::string>& config_path, const Overrides& overrides);

// {"name", "atoms": [{"x", "p"}], "segments": [{"l", "r", "density"}]} or
// {"discretize": {"law": "laplace"|"normal"|"uniform", "lo", "hi", "cells",
//  "scale"/"sd", "loc"}}.
RawMeasure parse_measure_json(const nlohmann::ordered_json& j);
RawMeasure load_measure(const RunConfig& cfg);

// Canonical echo of the config (out_dir excluded) and its FNV-1a hash.
nlohmann::ordered_json config_echo(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);
std::uint64_t fnv1a(const std::string& bytes);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Collects artifacts and checks for one run; writes the manifest last.
class Artifacts {
 public:
  Artifacts(const RunConfig& cfg, std::filesystem::path dir);

  // Writes `# seed=` and `# config_hash=` lines followed by body.
  void write_csv(const std::string& file, const std::string& body);

  void add_check(std::string name, double value, double threshold, bool pass);
  // pass iff value < threshold
  void check_below(std::string name, double value, double threshold);
  void set_summary(const std::string& key, nlohmann::ordered_json value);

  bool all_pass() const;
  const std::vector<Check>& checks() const { return checks_; }
  void write_manifest();

 private:
  const RunConfig& cfg_;
  std::filesystem::path dir_;
  std::uint64_t hash_;
  std::vector<std::string> files_;
  std::vector<Check> checks_;
  nlohmann::ordered_json summary_ = nlohmann::ordered_json::object();
};

// Runs one command. Returns 0 if every check passes, 1 otherwise; throws
// Error{ConfigError} (and measure validation errors) for bad input.
int run(const RunConfig& cfg);

// Full entry point: parses argv, prints diagnostics to stderr, maps errors to
// exit codes (2 for configuration problems).
int main_entry(int argc, char** argv);

}  // namespace expembed::cli
