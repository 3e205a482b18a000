#include "expembed/finance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>

#include "expembed/chain.hpp"
#include "expembed/error.hpp"
#include "expembed/pathsim.hpp"
#include "expembed/speed.hpp"

namespace expembed {

namespace {

[[noreturn]] void violation(const char* what, double strike) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s at strike %.17g", what, strike);
  throw Error(ErrorCode::ArbitrageViolation, buf);
}

}  // namespace

Measure implied_measure(const OptionChain& chain, double tol) {
  const auto& q = chain.quotes;
  const std::size_t n = q.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "need at least three strikes");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(q[i].strike) || !std::isfinite(q[i].price))
      throw Error(ErrorCode::InvalidArgument, "non-finite quote");
    if (i > 0 && !(q[i].strike > q[i - 1].strike)) violation("strikes not increasing", q[i].strike);
    if (q[i].price < std::max(chain.forward - q[i].strike, 0.0) - tol) violation("price below intrinsic", q[i].strike);
  }
  std::vector<double> slope(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    slope[i] = (q[i + 1].price - q[i].price) / (q[i + 1].strike - q[i].strike);
    if (slope[i] > tol) violation("price increasing", q[i + 1].strike);
    if (slope[i] < -1.0 - tol) violation("price slope below -1", q[i + 1].strike);
  }
  std::vector<Atom> atoms;
  double mass = 0.0, moment = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double p = slope[i] - slope[i - 1];
    if (p < -tol) violation("convexity", q[i].strike);
    p = std::max(p, 0.0);
    if (p > 0.0) atoms.push_back({q[i].strike, p});
    mass += p;
    moment += p * q[i].strike;
  }

  std::vector<double> gaps(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) gaps[i] = q[i + 1].strike - q[i].strike;
  std::sort(gaps.begin(), gaps.end());
  const double g = gaps.size() % 2 ? gaps[gaps.size() / 2]
                                   : 0.5 * (gaps[gaps.size() / 2 - 1] + gaps[gaps.size() / 2]);
  const double lo = q.front().strike - g, hi = q.back().strike + g;
  const double rest = 1.0 - mass;
  if (rest < -tol) violation("interior mass exceeds one", q[n - 2].strike);
  // m_lo + m_hi = rest, m_lo lo + m_hi hi = forward - moment
  double m_hi = (chain.forward - moment - rest * lo) / (hi - lo);
  double m_lo = rest - m_hi;
  if (m_hi < -tol) violation("negative upper tail mass", q.back().strike);
  if (m_lo < -tol) violation("negative lower tail mass", q.front().strike);
  m_hi = std::max(m_hi, 0.0);
  m_lo = std::max(m_lo, 0.0);
  if (m_lo > tol) atoms.push_back({lo, m_lo});
  if (m_hi > tol) atoms.push_back({hi, m_hi});
  return Measure::atomic(std::move(atoms));
}

double price_at_maturity(const Measure& mu, double strike) { return mu.upper_excess(strike); }

double put_at_maturity(const Measure& mu, double strike) { return mu.lower_excess(strike); }

OptionChain make_chain(const Measure& mu, const std::vector<double>& strikes, double t_star) {
  OptionChain chain;
  chain.t_star = t_star;
  chain.forward = mu.mean();
  for (double k : strikes) chain.quotes.push_back({k, price_at_maturity(mu, k)});
  return chain;
}

std::vector<double> GammaClock::sample(const std::vector<double>& times, rng::Engine& eng) const {
  if (!(t_star > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_star must be positive");
  std::vector<double> out;
  out.reserve(times.size());
  double t = 0.0, clock = 0.0;
  for (double s : times) {
    if (s < t) throw Error(ErrorCode::InvalidArgument, "times must be sorted");
    if (s > t) clock += rng::gamma(eng, shape(s - t), 1.0);
    t = s;
    out.push_back(clock);
  }
  return out;
}

namespace {

// Diffusion of mu sampled at nondecreasing clock values.
class PriceModel {
 public:
  PriceModel(const Measure& mu, double h)
      : profile_(std::make_shared<PotentialProfile>(mu)), sm_(build_speed_measure(profile_)) {
    if (mu.is_atomic()) {
      chain_ = std::make_unique<BirthDeathChain>(build_chain(sm_, mu));
      start_ = chain_->index_of(sm_.origin());
    } else {
      grid_ = std::make_unique<GridSpeed>(discretize_speed(sm_, h > 0.0 ? h : default_grid_step(sm_)));
    }
  }

  std::vector<double> at(const std::vector<double>& clock, rng::Engine& eng) const {
    if (chain_) {
      const auto idx = simulate_chain_path(*chain_, start_, clock, eng);
      std::vector<double> out(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) out[i] = chain_->states()[idx[i]];
      return out;
    }
    return simulate_gap_diffusion(*grid_, clock, eng);
  }

 private:
  std::shared_ptr<const PotentialProfile> profile_;
  SpeedMeasure sm_;
  std::unique_ptr<BirthDeathChain> chain_;
  std::size_t start_ = 0;
  std::unique_ptr<GridSpeed> grid_;
};

std::vector<double> price_path(const PriceModel& model, const GammaClock& clock, const std::vector<double>& times,
                               std::uint64_t seed, std::uint64_t path) {
  auto clock_eng = rng::make_engine(seed, rng::Stream::Clock, path);
  auto eng = rng::make_engine(seed, rng::Stream::Price, path);
  return model.at(clock.sample(times, clock_eng), eng);
}

}  // namespace

std::vector<double> simulate_price_path(const Measure& mu, const GammaClock& clock, const std::vector<double>& times,
                                        std::uint64_t seed, double h) {
  const PriceModel model(mu, h);
  return price_path(model, clock, times, seed, 0);
}

std::vector<double> simulate_terminal_prices(const Measure& mu, const GammaClock& clock, std::size_t paths,
                                             std::uint64_t seed, Execution exec, double h) {
  const PriceModel model(mu, h);
  const std::vector<double> times{clock.t_star};
  std::vector<double> out(paths);
  for_each_path(paths, exec, [&](std::size_t k) { out[k] = price_path(model, clock, times, seed, k).front(); });
  return out;
}

namespace {

bool next_line(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

std::pair<double, double> parse_pair(const std::string& line) {
  std::istringstream ss(line);
  double a = 0.0, b = 0.0;
  char comma = 0;
  if (!(ss >> a >> comma >> b) || comma != ',') throw Error(ErrorCode::ConfigError, "bad option csv row: " + line);
  ss >> std::ws;
  if (!ss.eof()) throw Error(ErrorCode::ConfigError, "bad option csv row: " + line);
  return {a, b};
}

}  // namespace

OptionChain read_option_csv(std::istream& is) {
  std::string line;
  if (!next_line(is, line) || line != "t_star,forward") throw Error(ErrorCode::ConfigError, "expected t_star,forward");
  if (!next_line(is, line)) throw Error(ErrorCode::ConfigError, "missing t_star,forward values");
  OptionChain chain;
  std::tie(chain.t_star, chain.forward) = parse_pair(line);
  if (!(chain.t_star > 0.0)) throw Error(ErrorCode::ConfigError, "t_star must be positive");
  if (!next_line(is, line) || line != "strike,price") throw Error(ErrorCode::ConfigError, "expected strike,price");
  while (next_line(is, line)) {
    const auto [k, c] = parse_pair(line);
    chain.quotes.push_back({k, c});
  }
  return chain;
}

void write_price_csv(std::ostream& os, const OptionChain& chain, const std::vector<double>& repriced) {
  os << "strike,input_price,repriced,abs_err\n";
  char buf[160];
  for (std::size_t i = 0; i < chain.quotes.size(); ++i) {
    const auto& q = chain.quotes[i];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", q.strike, q.price, repriced[i],
                  std::abs(q.price - repriced[i]));
    os << buf;
  }
}

}  // namespace expembed
