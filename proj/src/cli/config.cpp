#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "expembed/cli.hpp"
#include "expembed/error.hpp"

namespace expembed::cli {

using json = nlohmann::ordered_json;

namespace {

constexpr std::pair<Command, const char*> kCommands[] = {
    {Command::Potential, "potential"},
    {Command::Speed, "speed"},
    {Command::ChainLaw, "chain-law"},
    {Command::SimulateChain, "simulate-chain"},
    {Command::SimulateSde, "simulate-sde"},
    {Command::SimulateTimechange, "simulate-timechange"},
    {Command::EmbedPoisson, "embed-poisson"},
    {Command::ResolventCheck, "resolvent-check"},
    {Command::VerifyAll, "verify-all"},
    {Command::Price, "price"},
};

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    config_error(path + ": " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  if constexpr (std::is_unsigned_v<T>) {
    if (!j.at(key).is_number_unsigned()) config_error(std::string("field '") + key + "' must be a non-negative integer");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("field '") + key + "': " + e.what());
  }
}

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) config_error(std::string("missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

const char* to_string(Command c) {
  for (const auto& [cmd, name] : kCommands)
    if (cmd == c) return name;
  return "?";
}

std::optional<Command> parse_command(const std::string& s) {
  for (const auto& [cmd, name] : kCommands)
    if (s == name) return cmd;
  return std::nullopt;
}

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& [cmd, name] : kCommands) out.emplace_back(name);
  return out;
}

Thresholds default_thresholds() {
  return {{"tv", 1e-8}, {"ks", 0.01}, {"z", 3.0}, {"resolvent", 1e-10}, {"resolvent_atomized", 1e-3}, {"price", 1e-10}};
}

RawMeasure parse_measure_json(const json& j) {
  if (!j.is_object()) config_error("measure must be a JSON object");
  if (j.contains("discretize")) {
    const json& d = j.at("discretize");
    const std::string law = get<std::string>(d, "law", "");
    const double lo = number(d, "lo"), hi = number(d, "hi");
    const auto cells = get<std::size_t>(d, "cells", 1000);
    const double loc = get<double>(d, "loc", 0.0);
    std::function<double(double)> cdf, sf;
    if (law == "laplace") {
      const double b = get<double>(d, "scale", 1.0);
      cdf = [=](double x) {
        const double z = (x - loc) / b;
        return z < 0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
      };
      sf = [=](double x) {
        const double z = (x - loc) / b;
        return z > 0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z);
      };
    } else if (law == "normal") {
      const double sd = get<double>(d, "sd", 1.0);
      cdf = [=](double x) { return 0.5 * std::erfc(-(x - loc) / (sd * std::sqrt(2.0))); };
      sf = [=](double x) { return 0.5 * std::erfc((x - loc) / (sd * std::sqrt(2.0))); };
    } else if (law == "uniform") {
      cdf = [=](double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); };
    } else {
      config_error("unknown law '" + law + "'");
    }
    if (!(hi > lo) || cells == 0) config_error("discretize needs lo < hi and cells > 0");
    return discretize_density(cdf, lo, hi, cells, get<std::string>(j, "name", law), sf);
  }
  RawMeasure raw;
  raw.name = get<std::string>(j, "name", "");
  if (j.contains("atoms")) {
    if (!j.at("atoms").is_array()) config_error("'atoms' must be an array");
    for (const auto& a : j.at("atoms")) raw.atoms.push_back({number(a, "x"), number(a, "p")});
  }
  if (j.contains("segments")) {
    if (!j.at("segments").is_array()) config_error("'segments' must be an array");
    for (const auto& s : j.at("segments")) raw.segments.push_back({number(s, "l"), number(s, "r"), number(s, "density")});
  }
  return raw;
}

RawMeasure load_measure(const RunConfig& cfg) {
  if (!cfg.measure_json.is_null()) return parse_measure_json(cfg.measure_json);
  if (cfg.measure_path.empty()) config_error("no measure given");
  return parse_measure_json(read_json_file(cfg.measure_path));
}

RunConfig load_config(Command command, const std::optional<std::string>& config_path, const Overrides& o) {
  RunConfig cfg;
  cfg.command = command;
  if (config_path) {
    const json j = read_json_file(*config_path);
    if (!j.is_object()) config_error("config must be a JSON object");
    static const char* const known[] = {"measure", "measure_path", "options_path", "paths", "h", "dt", "seed", "rate",
                                        "bins", "grid_points", "atomize_cells", "out_dir", "tolerances"};
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (const char* k : known) ok = ok || key == k;
      if (!ok) config_error("unknown config field '" + key + "'");
    }
    if (j.contains("measure")) cfg.measure_json = j.at("measure");
    cfg.measure_path = get<std::string>(j, "measure_path", cfg.measure_path);
    cfg.options_path = get<std::string>(j, "options_path", cfg.options_path);
    cfg.paths = get<std::size_t>(j, "paths", cfg.paths);
    cfg.h = get<double>(j, "h", cfg.h);
    cfg.dt = get<double>(j, "dt", cfg.dt);
    cfg.seed = get<std::uint64_t>(j, "seed", cfg.seed);
    cfg.rate = get<double>(j, "rate", cfg.rate);
    cfg.bins = get<std::size_t>(j, "bins", cfg.bins);
    cfg.grid_points = get<std::size_t>(j, "grid_points", cfg.grid_points);
    cfg.atomize_cells = get<std::size_t>(j, "atomize_cells", cfg.atomize_cells);
    cfg.out_dir = get<std::string>(j, "out_dir", cfg.out_dir);
    if (j.contains("tolerances")) {
      if (!j.at("tolerances").is_object()) config_error("'tolerances' must be an object");
      for (const auto& [key, value] : j.at("tolerances").items()) {
        if (!cfg.thresholds.count(key)) config_error("unknown tolerance '" + key + "'");
        if (!value.is_number()) config_error("tolerance '" + key + "' must be a number");
        cfg.thresholds[key] = value.get<double>();
      }
    }
  }
  if (o.measure_path) {
    cfg.measure_path = *o.measure_path;
    cfg.measure_json = nullptr;
  }
  if (o.options_path) cfg.options_path = *o.options_path;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.paths) cfg.paths = *o.paths;
  if (o.bins) cfg.bins = *o.bins;
  if (o.grid_points) cfg.grid_points = *o.grid_points;
  if (o.atomize_cells) cfg.atomize_cells = *o.atomize_cells;
  if (o.h) cfg.h = *o.h;
  if (o.dt) cfg.dt = *o.dt;
  if (o.rate) cfg.rate = *o.rate;
  if (o.seed) cfg.seed = *o.seed;
  for (const auto& [key, value] : o.thresholds) {
    if (!cfg.thresholds.count(key)) config_error("unknown tolerance '" + key + "'");
    cfg.thresholds[key] = value;
  }
  cfg.serial = o.serial;

  if (cfg.out_dir.empty()) {
    const char* env = std::getenv("EXPEMBED_OUT_DIR");
    cfg.out_dir = env && *env ? env : "out";
  }
  if (cfg.paths < 1) config_error("paths must be >= 1");
  if (!(cfg.h >= 0.0) || !std::isfinite(cfg.h)) config_error("h must be positive (or 0 for the default)");
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) config_error("dt must be positive");
  if (!(cfg.rate > 0.0) || !std::isfinite(cfg.rate)) config_error("rate must be positive");
  if (cfg.bins < 1 || cfg.grid_points < 2 || cfg.atomize_cells < 1) config_error("bins, grid_points, atomize_cells too small");
  if (command == Command::Price && cfg.options_path.empty()) config_error("price needs an options file");
  if (command != Command::Price && cfg.measure_json.is_null() && cfg.measure_path.empty())
    config_error("no measure given");
  return cfg;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json config_echo(const RunConfig& cfg) {
  json j;
  j["command"] = to_string(cfg.command);
  if (!cfg.measure_json.is_null()) j["measure"] = cfg.measure_json;
  j["measure_path"] = cfg.measure_path;
  j["options_path"] = cfg.options_path;
  j["paths"] = cfg.paths;
  j["h"] = cfg.h;
  j["dt"] = cfg.dt;
  j["seed"] = cfg.seed;
  j["rate"] = cfg.rate;
  j["bins"] = cfg.bins;
  j["grid_points"] = cfg.grid_points;
  j["atomize_cells"] = cfg.atomize_cells;
  json t = json::object();
  for (const auto& [k, v] : cfg.thresholds) t[k] = v;
  j["tolerances"] = t;
  return j;
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(config_echo(cfg).dump()); }

}  // namespace expembed::cli
