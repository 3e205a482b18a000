#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "expembed/chain.hpp"
#include "expembed/cli.hpp"
#include "expembed/error.hpp"
#include "expembed/finance.hpp"
#include "expembed/pathsim.hpp"
#include "expembed/resolvent.hpp"
#include "expembed/speed.hpp"
#include "expembed/stats.hpp"

namespace expembed::cli {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double exp1_cdf(double t) { return t <= 0.0 ? 0.0 : -std::expm1(-t); }

struct Model {
  Measure mu;
  std::shared_ptr<const PotentialProfile> profile;
  SpeedMeasure sm;
};

Model build_model(const RunConfig& cfg) {
  Measure mu = Measure::validate(load_measure(cfg));
  auto profile = std::make_shared<const PotentialProfile>(mu);
  SpeedMeasure sm = build_speed_measure(profile);
  return {std::move(mu), std::move(profile), std::move(sm)};
}

Execution execution(const RunConfig& cfg) { return cfg.serial ? Execution::Serial : Execution::Parallel; }

double grid_step(const RunConfig& cfg, const SpeedMeasure& sm) { return cfg.h > 0.0 ? cfg.h : default_grid_step(sm); }

// Nearest atom of an atomic target; grid positions sit within h/2 of it.
std::vector<double> snap_to_atoms(const std::vector<double>& samples, const Measure& mu) {
  std::vector<double> xs;
  for (const auto& a : mu.atoms()) xs.push_back(a.x);
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto it = std::lower_bound(xs.begin(), xs.end(), samples[i]);
    if (it == xs.end() || (it != xs.begin() && samples[i] - *(it - 1) < *it - samples[i])) --it;
    out[i] = *it;
  }
  return out;
}

// Largest |freq - p| / sqrt(p (1 - p) / n) over the atoms of mu; samples
// must already sit on atoms.
double max_atom_z(const std::vector<double>& samples, const Measure& mu) {
  const double n = static_cast<double>(samples.size());
  const Measure emp = EmpiricalLaw(samples).to_measure();
  double z = 0.0;
  for (const auto& a : mu.atoms()) {
    const double se = std::sqrt(a.p * (1.0 - a.p) / n);
    const double d = std::abs(emp.atom_mass(a.x) - a.p);
    z = std::max(z, se > 0.0 ? d / se : (d > 0.0 ? INFINITY : 0.0));
  }
  return z;
}

std::string samples_csv(const char* header, const std::vector<double>& xs) {
  std::string s = std::string("path_id,") + header + "\n";
  for (std::size_t i = 0; i < xs.size(); ++i) s += std::to_string(i) + "," + fmt(xs[i]) + "\n";
  return s;
}

std::string histogram(const std::vector<double>& xs, const Measure& mu, std::size_t bins) {
  std::ostringstream os;
  write_histogram_csv(os, xs, mu, bins);
  return os.str();
}

// Law check shared by the simulation commands: per-atom z-scores for an
// atomic target, KS otherwise.
void check_law(Artifacts& art, const std::string& name, const std::vector<double>& xs, const Model& m,
               const RunConfig& cfg) {
  if (m.mu.is_atomic()) {
    const double z = max_atom_z(snap_to_atoms(xs, m.mu), m.mu);
    art.check_below(name + "_max_atom_z", z, cfg.thresholds.at("z"));
  } else {
    art.check_below(name + "_ks", ks_distance(EmpiricalLaw(xs), m.mu), cfg.thresholds.at("ks"));
  }
}

json boundary_json(const BoundaryReport& r) {
  json j;
  j["class"] = to_string(r.kind);
  j["sigma_m"] = r.sigma_finite ? json(r.sigma_m) : json("inf");
  return j;
}

void cmd_potential(const RunConfig& cfg, Artifacts& art) {
  const Model m = build_model(cfg);
  const double lo = m.mu.lower().value, hi = m.mu.upper().value;
  const double pad = 0.1 * (hi - lo);
  std::string body = "x,u,U\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.grid_points; ++i) {
    const double x = lo - pad + (hi - lo + 2.0 * pad) * static_cast<double>(i) / static_cast<double>(cfg.grid_points - 1);
    const double u = m.profile->potential(x);
    worst = std::max(worst, std::abs(u - potential_direct(m.mu, x)));
    body += fmt(x) + "," + fmt(u) + "," + fmt(m.profile->excess_potential(x)) + "\n";
  }
  art.write_csv("potential.csv", body);
  art.set_summary("mean", m.mu.mean());
  art.set_summary("max_table_vs_direct", worst);
}

void cmd_speed(const RunConfig& cfg, Artifacts& art) {
  const Model m = build_model(cfg);
  std::ostringstream os;
  write_speed_csv(os, m.sm);
  art.write_csv("speed.csv", os.str());
  art.set_summary("left", boundary_json(classify_boundary(m.sm, *m.profile, Side::Left)));
  art.set_summary("right", boundary_json(classify_boundary(m.sm, *m.profile, Side::Right)));
}

// Chain whose law at Exp(rate) is mu: the speed measure divided by the rate.
BirthDeathChain rate_chain(const Model& m, double rate) {
  return build_chain(scale_for_rate(m.sm, 1.0 / rate), m.mu);
}

double chain_oracle(const RunConfig& cfg, Artifacts& art, const Model& m, bool empirical) {
  const BirthDeathChain chain = rate_chain(m, cfg.rate);
  const std::size_t start = chain.index_of(m.sm.origin());
  const auto exact = exact_law_masses(chain, start, cfg.rate);
  const double tv = tv_atomic(exact_law(chain, start, cfg.rate), m.mu);
  art.check_below("chain_oracle_tv", tv, cfg.thresholds.at("tv"));
  std::vector<double> freq(chain.size(), 0.0);
  if (empirical) {
    const auto idx = simulate_chain_batch(chain, start, cfg.paths, cfg.seed, execution(cfg), cfg.rate);
    for (auto i : idx) freq[i] += 1.0 / static_cast<double>(cfg.paths);
    double z = 0.0;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const double se = std::sqrt(exact[i] * (1.0 - exact[i]) / static_cast<double>(cfg.paths));
      if (se > 0.0) z = std::max(z, std::abs(freq[i] - exact[i]) / se);
    }
    art.check_below("chain_empirical_max_z", z, cfg.thresholds.at("z"));
  }
  std::ostringstream os;
  write_chain_law_csv(os, chain, exact, freq);
  art.write_csv("chain_law.csv", os.str());
  return tv;
}

void cmd_chain_law(const RunConfig& cfg, Artifacts& art) { chain_oracle(cfg, art, build_model(cfg), true); }

void cmd_simulate_chain(const RunConfig& cfg, Artifacts& art) {
  const Model m = build_model(cfg);
  const BirthDeathChain chain = rate_chain(m, cfg.rate);
  const auto idx = simulate_chain_batch(chain, chain.index_of(m.sm.origin()), cfg.paths, cfg.seed, execution(cfg),
                                        cfg.rate);
  std::vector<double> xs(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) xs[i] = chain.states()[idx[i]];
  art.write_csv("chain_samples.csv", samples_csv("state", xs));
  art.write_csv("chain_histogram.csv", histogram(xs, m.mu, cfg.bins));
  check_law(art, "chain", xs, m, cfg);
}

void cmd_simulate_sde(const RunConfig& cfg, Artifacts& art) {
  const Model m = build_model(cfg);
  if (cfg.rate != 1.0) throw Error(ErrorCode::ConfigError, "simulate-sde runs at rate 1");
  const SigmaField field(*m.profile);
  const auto xs = simulate_sde_batch(field, cfg.dt, cfg.paths, cfg.seed, execution(cfg));
  art.write_csv("sde_samples.csv", samples_csv("position", xs));
  art.write_csv("sde_histogram.csv", histogram(xs, m.mu, cfg.bins));
  art.check_below("sde_ks", ks_distance(EmpiricalLaw(xs), m.mu), cfg.thresholds.at("ks"));
}

void cmd_simulate_timechange(const RunConfig& cfg, Artifacts& art) {
  const Model m = build_model(cfg);
  const SpeedMeasure sm = scale_for_rate(m.sm, 1.0 / cfg.rate);
  const GridSpeed grid = discretize_speed(sm, grid_step(cfg, sm));
  const auto xs = gap_diffusion_batch(grid, cfg.paths, cfg.seed, execution(cfg), cfg.rate);
  art.set_summary("h", grid.h);
  art.write_csv("timechange_samples.csv", samples_csv("position", xs));
  art.write_csv("timechange_histogram.csv", histogram(xs, m.mu, cfg.bins));
  check_law(art, "timechange", xs, m, cfg);
}

void poisson_checks(const RunConfig& cfg, Artifacts& art, const Model& m) {
  const GridSpeed grid = discretize_speed(m.sm, grid_step(cfg, m.sm));
  const auto stops = poisson_stop_batch(grid, cfg.paths, cfg.seed, execution(cfg));
  std::ostringstream os;
  write_stop_csv(os, stops);
  art.write_csv("stops.csv", os.str());
  std::vector<double> pos, phi;
  for (const auto& s : stops) {
    pos.push_back(s.position);
    phi.push_back(s.phi);
  }
  art.write_csv("stops_histogram.csv", histogram(pos, m.mu, cfg.bins));
  art.set_summary("h", grid.h);
  if (m.mu.is_atomic()) pos = snap_to_atoms(pos, m.mu);
  art.check_below("poisson_position_ks", ks_distance(EmpiricalLaw(pos), m.mu), cfg.thresholds.at("ks"));
  art.check_below("poisson_phi_ks", ks_distance(EmpiricalLaw(phi), exp1_cdf), cfg.thresholds.at("ks"));
  const double corr = correlation(phi, pos);
  art.check_below("poisson_corr_z", std::abs(corr) * std::sqrt(static_cast<double>(cfg.paths)), cfg.thresholds.at("z"));
}

void cmd_embed_poisson(const RunConfig& cfg, Artifacts& art) { poisson_checks(cfg, art, build_model(cfg)); }

void resolvent_checks(const RunConfig& cfg, Artifacts& art, const Model& m) {
  const bool atomic = !m.sm.has_segments();
  const SpeedMeasure sm = atomic ? m.sm : atomize(m.sm, cfg.atomize_cells);
  std::vector<double> grid;
  const double lo = m.sm.lower(), hi = m.sm.upper();
  for (std::size_t i = 1; i + 1 < cfg.grid_points + 2; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.grid_points + 1));
  const IdentityReport rep = check_main_identity(*m.profile, sm, grid);
  std::ostringstream os;
  write_identity_csv(os, rep);
  art.write_csv("resolvent.csv", os.str());
  const double tol = cfg.thresholds.at(atomic ? "resolvent" : "resolvent_atomized");
  art.check_below(atomic ? "resolvent_identity" : "resolvent_identity_atomized", rep.max_abs_error, tol);
  if (rep.derivative_jump) {
    art.set_summary("green_derivative_jump", *rep.derivative_jump);
    art.check_below("green_derivative_jump_error", std::abs(*rep.derivative_jump - 1.0), tol);
  }
}

void cmd_resolvent(const RunConfig& cfg, Artifacts& art) { resolvent_checks(cfg, art, build_model(cfg)); }

void cmd_verify_all(const RunConfig& cfg, Artifacts& art) {
  const Model m = build_model(cfg);
  if (m.mu.is_atomic()) chain_oracle(cfg, art, m, false);
  poisson_checks(cfg, art, m);
  resolvent_checks(cfg, art, m);
}

void cmd_price(const RunConfig& cfg, Artifacts& art) {
  std::ifstream in(cfg.options_path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + cfg.options_path);
  const OptionChain chain = read_option_csv(in);
  const Measure mu = implied_measure(chain);
  std::vector<double> repriced;
  double worst = 0.0;
  for (const auto& q : chain.quotes) {
    repriced.push_back(price_at_maturity(mu, q.strike));
    worst = std::max(worst, std::abs(repriced.back() - q.price));
  }
  std::ostringstream os;
  write_price_csv(os, chain, repriced);
  art.write_csv("price.csv", os.str());
  json atoms = json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"x", a.x}, {"p", a.p}});
  art.set_summary("implied_atoms", atoms);
  art.check_below("price_round_trip", worst, cfg.thresholds.at("price"));

  const auto terminal = simulate_terminal_prices(mu, GammaClock{chain.t_star}, cfg.paths, cfg.seed, execution(cfg));
  std::string mc = "strike,exact,mc_mean,mc_std_error\n";
  double z = 0.0;
  for (std::size_t i = 0; i < chain.quotes.size(); ++i) {
    std::vector<double> payoff(terminal.size());
    for (std::size_t k = 0; k < terminal.size(); ++k) payoff[k] = std::max(terminal[k] - chain.quotes[i].strike, 0.0);
    const MeanEstimate e = estimate_mean(payoff);
    const double d = std::abs(e.mean - repriced[i]);
    if (e.std_error > 0.0) z = std::max(z, d / e.std_error);
    else if (d > 1e-12) z = INFINITY;
    mc += fmt(chain.quotes[i].strike) + "," + fmt(repriced[i]) + "," + fmt(e.mean) + "," + fmt(e.std_error) + "\n";
  }
  art.write_csv("price_mc.csv", mc);
  art.check_below("price_mc_max_z", z, cfg.thresholds.at("z"));
}

bool is_input_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::NonUnitMass:
    case ErrorCode::NonFiniteMean:
    case ErrorCode::EmptyMeasure:
    case ErrorCode::InvalidMeasure:
    case ErrorCode::DegenerateMeasure:
    case ErrorCode::NotAtomic:
    case ErrorCode::ArbitrageViolation:
    case ErrorCode::InvalidRate:
    case ErrorCode::GridTooCoarse:
    case ErrorCode::NonAtomicInterior:
    case ErrorCode::NoDensityAt:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

}  // namespace

int run(const RunConfig& cfg) {
  Artifacts art(cfg, cfg.out_dir);
  switch (cfg.command) {
    case Command::Potential: cmd_potential(cfg, art); break;
    case Command::Speed: cmd_speed(cfg, art); break;
    case Command::ChainLaw: cmd_chain_law(cfg, art); break;
    case Command::SimulateChain: cmd_simulate_chain(cfg, art); break;
    case Command::SimulateSde: cmd_simulate_sde(cfg, art); break;
    case Command::SimulateTimechange: cmd_simulate_timechange(cfg, art); break;
    case Command::EmbedPoisson: cmd_embed_poisson(cfg, art); break;
    case Command::ResolventCheck: cmd_resolvent(cfg, art); break;
    case Command::VerifyAll: cmd_verify_all(cfg, art); break;
    case Command::Price: cmd_price(cfg, art); break;
  }
  art.write_manifest();
  for (const auto& c : art.checks())
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << fmt(c.value) << " threshold=" << fmt(c.threshold)
              << "\n";
  return art.all_pass() ? 0 : 1;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Exponential-time Skorokhod embeddings: build, simulate and verify"};
  std::string command;
  std::optional<std::string> config_path;
  Overrides o;
  std::vector<std::string> tol;
  app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--measure", o.measure_path, "Measure JSON file");
  app.add_option("--options", o.options_path, "Option quotes CSV (price)");
  app.add_option("--paths", o.paths, "Monte Carlo paths");
  app.add_option("--grid-step", o.h, "Random-walk grid step");
  app.add_option("--dt", o.dt, "Euler time step");
  app.add_option("--seed", o.seed, "Root seed");
  app.add_option("--rate", o.rate, "Rate of the exponential time");
  app.add_option("--bins", o.bins, "Histogram bins");
  app.add_option("--grid-points", o.grid_points, "Evaluation grid size");
  app.add_option("--atomize-cells", o.atomize_cells, "Cells when atomizing a density");
  app.add_option("--out-dir", o.out_dir, "Artifact directory (default $EXPEMBED_OUT_DIR or ./out)");
  app.add_option("--tol", tol, "Threshold override key=value");
  app.add_flag("--serial", o.serial, "Run path batches serially");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    for (const auto& kv : tol) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "--tol expects key=value");
      try {
        o.thresholds[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::ConfigError, "bad --tol value: " + kv);
      }
    }
    const RunConfig cfg = load_config(*parse_command(command), config_path, o);
    return run(cfg);
  } catch (const Error& e) {
    std::cerr << "expembed: " << to_string(e.code()) << ": " << e.what() << "\n";
    return is_input_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "expembed: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace expembed::cli
