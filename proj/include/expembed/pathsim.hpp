#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "expembed/config.hpp"
#include "expembed/measure.hpp"
#include "expembed/parallel.hpp"
#include "expembed/rng.hpp"
#include "expembed/speed.hpp"

namespace expembed {

// ---------------------------------------------------------------------------
// Speed measure on the random-walk grid
// ---------------------------------------------------------------------------

// m discretised on the sites origin + k h. The embedded walk moves +-h per
// step of duration h^2; each step taken from a site adds h to that site's
// local time (so |B - x| - L^x stays a martingale) and h * mass to Phi.
// Sites at or beyond the interval bounds, and snapped infinite atoms, are
// traps.
struct GridSpeed {
  double h = 0.0;
  double origin = 0.0;
  std::int64_t first_index = 0;  // grid index k of sites[0]
  std::vector<double> mass;      // finite site mass (0 on traps)
  std::vector<std::uint8_t> trap;
  std::size_t start = 0;         // site of the origin

  std::size_t size() const { return mass.size(); }
  double position(std::size_t i) const {
    return origin + static_cast<double>(first_index + static_cast<std::int64_t>(i)) * h;
  }
};

// Finite atoms snap to the nearest site (GridTooCoarse if two share one or an
// atom lands on a trap); continuous mass per site is lambda at the midpoint of
// the covered part of the cell times its length.
GridSpeed discretize_speed(const SpeedMeasure& sm, double h);

// Every gap between distinct atoms (and the origin) spans >= 100 sites, and
// a continuous part gets at least 200 sites across the interval.
double default_grid_step(const SpeedMeasure& sm);

// ---------------------------------------------------------------------------
// SDE route
// ---------------------------------------------------------------------------

// sigma(x) = sqrt(U(x) / f(x)) = lambda(x)^{-1/2}. Throws NoDensityAt when x
// carries an atom or lies outside the continuous part, OutOfInterval when x is
// not strictly inside the support.
double sigma_coefficient(const PotentialProfile& profile, const Measure& mu, double x);

// sigma on the support as a list of pieces on which U is an explicit
// quadratic, for O(1) evaluation along a path. Requires the continuous part to
// cover the open support without gaps and no interior atoms.
class SigmaField {
 public:
  explicit SigmaField(const PotentialProfile& profile);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double origin() const { return origin_; }

  // piece is a hint updated in place.
  double operator()(double x, std::size_t& piece) const;

 private:
  struct Piece {
    double left, right, density, u_left, slope_left;
  };
  std::vector<Piece> pieces_;
  double lower_ = 0.0, upper_ = 0.0, origin_ = 0.0;
};

// Euler-Maruyama for dX = sigma(X) dW from x0, stopped at an independent
// Exp(rate) time (last step shortened to land on it). Leaving the support
// pins X to the crossed bound, which is a trap for absorbing bounds and a
// zero of sigma for natural ones.
double simulate_sde(const SigmaField& field, double dt, rng::Engine& eng, double rate = 1.0,
                    std::uint64_t step_cap = kDefaultStepCap);

std::vector<double> simulate_sde_batch(const SigmaField& field, double dt, std::size_t paths, std::uint64_t seed,
                                       Execution exec);

// ---------------------------------------------------------------------------
// Local time
// ---------------------------------------------------------------------------

// E^x[L^y at the exit of (a, b)] = 2 (min(x,y) - a)(b - max(x,y)) / (b - a).
double expected_local_time(double x, double y, double a, double b);

// Walk local time at y when the walk from x first leaves (a, b); all four
// points are snapped to the grid a + k h.
double local_time_at_exit(double x, double y, double a, double b, double h, rng::Engine& eng,
                          std::uint64_t step_cap = kDefaultStepCap);

std::vector<double> local_time_batch(double x, double y, double a, double b, double h, std::size_t paths,
                                     std::uint64_t seed, Execution exec);

// ---------------------------------------------------------------------------
// Time change X_t = B_{A_t}
// ---------------------------------------------------------------------------

// X at each of the sorted diffusion times. X_t is the site being visited when
// Phi first exceeds t; traps hold X forever.
std::vector<double> simulate_gap_diffusion(const GridSpeed& grid, std::span<const double> times, rng::Engine& eng,
                                           std::uint64_t step_cap = kDefaultStepCap);

std::vector<double> simulate_gap_diffusion(const SpeedMeasure& sm, std::span<const double> times, double h,
                                           std::uint64_t seed);

// X_T with T ~ Exp(rate) independent of the walk.
double gap_diffusion_at_exp(const GridSpeed& grid, rng::Engine& eng, double rate = 1.0,
                            std::uint64_t step_cap = kDefaultStepCap);

std::vector<double> gap_diffusion_batch(const GridSpeed& grid, std::size_t paths, std::uint64_t seed,
                                        Execution exec, double rate = 1.0);

// Diffusion time X spends at its start before moving to another charged site
// or a trap.
double holding_time_at_start(const GridSpeed& grid, rng::Engine& eng, std::uint64_t step_cap = kDefaultStepCap);

std::vector<double> holding_time_batch(const GridSpeed& grid, std::size_t paths, std::uint64_t seed,
                                       Execution exec);

// Phi before each walk step and the site visited, for at most `steps` steps
// (stops early at a trap).
struct TimeChangeTrace {
  std::vector<double> phi;
  std::vector<double> site;
  std::vector<double> increment;  // Phi gained during the step
};

TimeChangeTrace trace_time_change(const GridSpeed& grid, std::size_t steps, rng::Engine& eng);

// Right-continuous inverse A_t = inf{ n : Phi after step n > t } of a traced
// Phi, as a step index; trace.phi.size() if Phi never exceeds t.
std::size_t time_change_inverse(const TimeChangeTrace& trace, double t);

// ---------------------------------------------------------------------------
// Poisson-mark stopping
// ---------------------------------------------------------------------------

struct PoissonStop {
  double position = 0.0;  // B at T^m
  double phi = 0.0;       // Phi at T^m, plus the residual clock when trapped
  double phi_raw = 0.0;   // Phi at T^m
  bool trapped = false;
};

// Each charged site carries the lowest mark of a Poisson measure with
// intensity du m(dx), i.e. an Exp(rate m({x})) threshold sampled on first
// visit; the walk stops the first time some site's local time exceeds its
// threshold, or on reaching a trap. When the stop is a trap, X stays absorbed
// and its independent clock keeps running: phi adds an Exp(1) residual so
// that phi is the exponential time at which X is observed.
PoissonStop poisson_stop(const GridSpeed& grid, rng::Engine& eng, std::uint64_t step_cap = kDefaultStepCap);

std::vector<PoissonStop> poisson_stop_batch(const GridSpeed& grid, std::size_t paths, std::uint64_t seed,
                                            Execution exec);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// path_id,stop_position,phi_at_stop
void write_stop_csv(std::ostream& os, const std::vector<PoissonStop>& stops);

// bin_left,bin_right,empirical_mass,target_mass over `bins` equal cells of
// [lower, upper]; cells are (l, r] except the first, which is closed.
void write_histogram_csv(std::ostream& os, const std::vector<double>& samples, const Measure& target,
                         std::size_t bins);

}  // namespace expembed
