#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "expembed/measure.hpp"
#include "expembed/parallel.hpp"
#include "expembed/rng.hpp"

namespace expembed {

struct OptionQuote {
  double strike = 0.0;
  double price = 0.0;
};

// Undiscounted call quotes at one maturity (zero rates and dividends).
struct OptionChain {
  double t_star = 1.0;
  double forward = 0.0;
  std::vector<OptionQuote> quotes;
};

// Atomic law implied by the quotes: the interior strike K_i gets the jump of
// the price slope there. The remaining mass goes to two tail atoms at
// K_1 - g and K_n + g, g the median strike gap, with masses fixed by unit
// mass and mean = forward. Throws ArbitrageViolation (naming the strike) for
// unsorted strikes, decreasing-slope violations, slopes outside [-1, 0],
// prices below intrinsic value, or negative tail masses; InvalidArgument for
// fewer than three strikes.
Measure implied_measure(const OptionChain& chain, double tol = 1e-12);

// E (X - K)^+ and E (K - X)^+ for X ~ mu, in closed form.
double price_at_maturity(const Measure& mu, double strike);
double put_at_maturity(const Measure& mu, double strike);

// Call prices of mu at the given strikes.
OptionChain make_chain(const Measure& mu, const std::vector<double>& strikes, double t_star);

// Gamma subordinator with shape t / t_star and unit scale, so gamma(t_star)
// is Exp(1).
struct GammaClock {
  double t_star = 1.0;

  double shape(double t) const { return t / t_star; }
  // Clock values at the sorted times.
  std::vector<double> sample(const std::vector<double>& times, rng::Engine& eng) const;
};

// S_t = X_{gamma_t} with X the gap diffusion built from mu. Atomic mu runs
// on the birth-death chain; otherwise the grid walk with step h (0 picks the
// default). The clock and the diffusion draw from separate streams of seed.
std::vector<double> simulate_price_path(const Measure& mu, const GammaClock& clock, const std::vector<double>& times,
                                        std::uint64_t seed, double h = 0.0);

// S at t_star for each path; path k uses seed derive_seed(seed, Price, k).
std::vector<double> simulate_terminal_prices(const Measure& mu, const GammaClock& clock, std::size_t paths,
                                             std::uint64_t seed, Execution exec, double h = 0.0);

// First non-comment line `t_star,forward`, then their values, then
// `strike,price` and one quote per line. Lines starting with '#' are skipped.
OptionChain read_option_csv(std::istream& is);

// strike,input_price,repriced,abs_err
void write_price_csv(std::ostream& os, const OptionChain& chain, const std::vector<double>& repriced);

}  // namespace expembed
