#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "expembed/config.hpp"
#include "expembed/measure.hpp"
#include "expembed/parallel.hpp"
#include "expembed/rng.hpp"
#include "expembed/speed.hpp"

namespace expembed {

// Continuous-time nearest-neighbour chain realising the gap diffusion of an
// atomic speed measure. Interior state i holds for Exp(mean theta_i) and then
// moves up with probability p_i; theta_i = 0 marks an instantaneous state.
class BirthDeathChain {
 public:
  BirthDeathChain(std::vector<double> states, std::vector<double> holding_mean, std::vector<double> up_prob,
                  std::vector<bool> absorbing);

  std::size_t size() const { return states_.size(); }
  const std::vector<double>& states() const { return states_; }
  const std::vector<double>& holding_mean() const { return holding_mean_; }
  const std::vector<double>& up_prob() const { return up_prob_; }
  bool absorbing(std::size_t i) const { return absorbing_[i]; }
  bool instantaneous(std::size_t i) const { return !absorbing_[i] && holding_mean_[i] == 0.0; }

  // Throws InvalidArgument if x is not a state.
  std::size_t index_of(double x) const;

  // Dense rate matrix. Absorbing rows are zero. Instantaneous states have no
  // finite rates; their rows are zero as well and their exits are described
  // by up_prob alone.
  Eigen::MatrixXd generator() const;

 private:
  std::vector<double> states_;
  std::vector<double> holding_mean_;
  std::vector<double> up_prob_;
  std::vector<bool> absorbing_;
};

// States are supp(mu) plus x0 when mu has no atom there (inserted as an
// instantaneous state). theta_i = 2 beta_i (a_{i+1} - a_i)(a_i - a_{i-1}) /
// (a_{i+1} - a_{i-1}), p_i = (a_i - a_{i-1}) / (a_{i+1} - a_{i-1}).
BirthDeathChain build_chain(const SpeedMeasure& sm, const Measure& mu);

// Law of X_T, T ~ Exp(q) independent, from a single dense LU solve of
// (q Theta + I - J) v = q Theta e, J the jump kernel.
Measure exact_law(const BirthDeathChain& chain, std::size_t start, double q = 1.0);

// Same law as raw masses aligned with chain.states().
std::vector<double> exact_law_masses(const BirthDeathChain& chain, std::size_t start, double q = 1.0);

// X at the independent Exp(rate) clock; returns the state index.
std::size_t simulate_chain(const BirthDeathChain& chain, std::size_t start, rng::Engine& eng, double rate = 1.0,
                           std::uint64_t step_cap = kDefaultStepCap);

// X at each of the sorted times; returns state indices.
std::vector<std::size_t> simulate_chain_path(const BirthDeathChain& chain, std::size_t start,
                                             const std::vector<double>& times, rng::Engine& eng,
                                             std::uint64_t step_cap = kDefaultStepCap);

// Time spent in the start state before the first jump: 0 for an
// instantaneous state, +inf for an absorbing one.
double sample_holding_time(const BirthDeathChain& chain, std::size_t start, rng::Engine& eng);

// Path batch: result[k] from engine (seed, Stream::Chain, k).
std::vector<std::size_t> simulate_chain_batch(const BirthDeathChain& chain, std::size_t start, std::size_t paths,
                                              std::uint64_t seed, Execution exec, double rate = 1.0);

// state,exact_mass,empirical_mass,abs_error
void write_chain_law_csv(std::ostream& os, const BirthDeathChain& chain, const std::vector<double>& exact,
                         const std::vector<double>& empirical);

}  // namespace expembed
