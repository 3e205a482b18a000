#include "expembed/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "expembed/error.hpp"

namespace expembed {

BirthDeathChain::BirthDeathChain(std::vector<double> states, std::vector<double> holding_mean,
                                 std::vector<double> up_prob, std::vector<bool> absorbing)
    : states_(std::move(states)),
      holding_mean_(std::move(holding_mean)),
      up_prob_(std::move(up_prob)),
      absorbing_(std::move(absorbing)) {
  const std::size_t n = states_.size();
  if (holding_mean_.size() != n || up_prob_.size() != n || absorbing_.size() != n)
    throw Error(ErrorCode::InvalidArgument, "chain arrays differ in length");
  if (n < 2) throw Error(ErrorCode::TooFewStates, "need at least two states");
  for (std::size_t i = 1; i < n; ++i)
    if (!(states_[i - 1] < states_[i])) throw Error(ErrorCode::InvalidArgument, "states must be strictly increasing");
  if (!absorbing_.front() || !absorbing_.back())
    throw Error(ErrorCode::InvalidArgument, "extreme states must be absorbing");
}

std::size_t BirthDeathChain::index_of(double x) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), x);
  if (it == states_.end() || *it != x) throw Error(ErrorCode::InvalidArgument, "not a chain state");
  return static_cast<std::size_t>(it - states_.begin());
}

Eigen::MatrixXd BirthDeathChain::generator() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (absorbing_[k] || holding_mean_[k] == 0.0) continue;
    const double rate = 1.0 / holding_mean_[k];
    Q(i, i + 1) = rate * up_prob_[k];
    Q(i, i - 1) = rate * (1.0 - up_prob_[k]);
    Q(i, i) = -rate;
  }
  return Q;
}

BirthDeathChain build_chain(const SpeedMeasure& sm, const Measure& mu) {
  if (!mu.is_atomic()) throw Error(ErrorCode::NotAtomic, "chain requires a purely atomic measure");

  std::vector<double> states;
  for (const auto& a : mu.atoms()) states.push_back(a.x);
  const double x0 = sm.origin();
  if (!std::binary_search(states.begin(), states.end(), x0)) {
    states.push_back(x0);
    std::sort(states.begin(), states.end());
  }
  const std::size_t n = states.size();
  if (n < 2) throw Error(ErrorCode::TooFewStates, "need at least two states");

  std::vector<double> theta(n, 0.0), p(n, 0.0);
  std::vector<bool> absorbing(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || i + 1 == n || sm.is_trap(states[i])) {
      absorbing[i] = true;
      continue;
    }
    const double left = states[i] - states[i - 1];
    const double right = states[i + 1] - states[i];
    const double span = states[i + 1] - states[i - 1];
    const double beta = sm.atom_weight(states[i]);
    theta[i] = 2.0 * beta * right * left / span;
    p[i] = left / span;
  }
  return BirthDeathChain(std::move(states), std::move(theta), std::move(p), std::move(absorbing));
}

std::vector<double> exact_law_masses(const BirthDeathChain& chain, std::size_t start, double q) {
  if (!(q > 0.0) || !std::isfinite(q)) throw Error(ErrorCode::InvalidRate, "rate must be positive and finite");
  if (start >= chain.size()) throw Error(ErrorCode::InvalidArgument, "start out of range");
  // Row i of V = A^{-1} R is the law of X_T from state i. Transient rows of A
  // are (q theta_i + 1) e_i - p_i e_{i+1} - (1 - p_i) e_{i-1}; R = diag(q theta_i);
  // absorbing rows are identity in both. Only row `start` is needed, so solve
  // A^T w = e_start and read V(start, j) = w_j R_jj.
  const auto n = static_cast<Eigen::Index>(chain.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd r(n);
  const auto& theta = chain.holding_mean();
  const auto& p = chain.up_prob();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (chain.absorbing(k)) {
      A(i, i) = 1.0;
      r(i) = 1.0;
      continue;
    }
    A(i, i) = q * theta[k] + 1.0;
    A(i, i + 1) = -p[k];
    A(i, i - 1) = -(1.0 - p[k]);
    r(i) = q * theta[k];
  }
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(static_cast<Eigen::Index>(start)) = 1.0;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A.transpose());
  if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-300) throw Error(ErrorCode::SingularSystem, "resolvent system singular");
  const Eigen::VectorXd w = lu.solve(e);
  std::vector<double> law(chain.size());
  for (Eigen::Index j = 0; j < n; ++j) law[static_cast<std::size_t>(j)] = std::max(0.0, w(j) * r(j));
  return law;
}

Measure exact_law(const BirthDeathChain& chain, std::size_t start, double q) {
  const auto masses = exact_law_masses(chain, start, q);
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < masses.size(); ++i)
    if (masses[i] > 0.0) atoms.push_back({chain.states()[i], masses[i]});
  return Measure::atomic(std::move(atoms));
}

namespace {

std::size_t jump(const BirthDeathChain& chain, std::size_t i, rng::Engine& eng) {
  return rng::uniform01(eng) < chain.up_prob()[i] ? i + 1 : i - 1;
}

}  // namespace

std::vector<std::size_t> simulate_chain_path(const BirthDeathChain& chain, std::size_t start,
                                             const std::vector<double>& times, rng::Engine& eng,
                                             std::uint64_t step_cap) {
  std::vector<std::size_t> out;
  out.reserve(times.size());
  std::size_t state = start;
  double clock = 0.0;
  std::uint64_t steps = 0;
  // Time at which the current holding period ends.
  auto holding_end = [&](std::size_t i) {
    if (chain.absorbing(i)) return std::numeric_limits<double>::infinity();
    if (chain.instantaneous(i)) return clock;
    return clock + rng::exponential(eng, 1.0 / chain.holding_mean()[i]);
  };
  double leave = holding_end(state);
  for (double t : times) {
    // Ties resolve in favour of the observation time: X is still in `state`,
    // except that an instantaneous state is left at once for any t > 0.
    while (leave < t || (chain.instantaneous(state) && leave <= t && t > 0.0)) {
      if (++steps > step_cap) throw Error(ErrorCode::StepCapExceeded, "chain simulation step cap");
      clock = leave;
      state = jump(chain, state, eng);
      leave = holding_end(state);
    }
    out.push_back(state);
  }
  return out;
}

std::size_t simulate_chain(const BirthDeathChain& chain, std::size_t start, rng::Engine& eng, double rate,
                           std::uint64_t step_cap) {
  const double T = rng::exponential(eng, rate);
  return simulate_chain_path(chain, start, {T}, eng, step_cap).front();
}

double sample_holding_time(const BirthDeathChain& chain, std::size_t start, rng::Engine& eng) {
  if (chain.absorbing(start)) return std::numeric_limits<double>::infinity();
  if (chain.instantaneous(start)) return 0.0;
  return rng::exponential(eng, 1.0 / chain.holding_mean()[start]);
}

std::vector<std::size_t> simulate_chain_batch(const BirthDeathChain& chain, std::size_t start, std::size_t paths,
                                              std::uint64_t seed, Execution exec, double rate) {
  std::vector<std::size_t> out(paths);
  for_each_path(paths, exec, [&](std::size_t k) {
    auto eng = rng::make_engine(seed, rng::Stream::Chain, k);
    out[k] = simulate_chain(chain, start, eng, rate);
  });
  return out;
}

void write_chain_law_csv(std::ostream& os, const BirthDeathChain& chain, const std::vector<double>& exact,
                         const std::vector<double>& empirical) {
  os << "state,exact_mass,empirical_mass,abs_error\n";
  char buf[160];
  for (std::size_t i = 0; i < chain.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", chain.states()[i], exact[i], empirical[i],
                  std::abs(exact[i] - empirical[i]));
    os << buf;
  }
}

}  // namespace expembed
