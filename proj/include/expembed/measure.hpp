#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "expembed/config.hpp"

namespace expembed {

struct Atom {
  double x = 0.0;
  double p = 0.0;
};

// Constant density on [left, right].
struct Segment {
  double left = 0.0;
  double right = 0.0;
  double density = 0.0;
};

// Unvalidated input, as read from a config file or assembled by hand.
struct RawMeasure {
  std::vector<Atom> atoms;
  std::vector<Segment> segments;
  std::string name;
};

// A point of the extended real line. Infinite bounds are flagged and never
// enter arithmetic.
struct Bound {
  double value = 0.0;
  bool infinite = false;

  static Bound finite(double v) { return {v, false}; }
  static Bound minus_infinity() { return {0.0, true}; }
  static Bound plus_infinity() { return {0.0, true}; }
};

// Mass and first moment of the part of a measure on one side of a point.
struct PartialSums {
  double mass = 0.0;
  double moment = 0.0;
};

// A validated probability measure with finite mean: finitely many atoms plus
// piecewise-constant density segments. Immutable.
class Measure {
 public:
  // Sorts, merges duplicate atoms, drops zero-mass pieces, checks unit mass
  // and renormalises. Throws Error{NonUnitMass | NonFiniteMean | EmptyMeasure
  // | InvalidMeasure}.
  static Measure validate(RawMeasure raw, const Tolerances& tol = {});

  // Convenience for purely atomic measures.
  static Measure atomic(std::vector<Atom> atoms, const Tolerances& tol = {});

  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Segment> segments() const { return segments_; }
  const std::string& name() const { return name_; }

  double mean() const { return mean_; }
  Bound lower() const { return lower_; }
  Bound upper() const { return upper_; }
  bool is_atomic() const { return segments_.empty(); }

  // Mass of the atom at x (0 if none).
  double atom_mass(double x) const;

  // Right-continuous CDF F(x) = mu((-inf, x]) and its left limit F(x-).
  double cdf(double x) const;
  double cdf_left(double x) const;

  // Density of the continuous part at x (0 in gaps; right-continuous choice at
  // segment boundaries).
  double density(double x) const;

  // Sum over y < x (or y <= x) and over y > x (or y >= x).
  PartialSums below(double x, bool inclusive) const;
  PartialSums above(double x, bool inclusive) const;

  // Integrals of (x - y)^+ and (y - x)^+ against mu; both finite and >= 0.
  double lower_excess(double x) const;
  double upper_excess(double x) const;

  RawMeasure raw() const;

 private:
  Measure() = default;
  void build_tables();

  std::vector<Atom> atoms_;
  std::vector<Segment> segments_;
  std::string name_;
  double mean_ = 0.0;
  Bound lower_;
  Bound upper_;

  // prefix_[i] sums pieces [0, i); suffix_[i] sums pieces [i, n).
  std::vector<double> atom_x_;
  std::vector<PartialSums> atom_prefix_;
  std::vector<PartialSums> atom_suffix_;
  std::vector<double> seg_left_;
  std::vector<double> seg_right_;
  std::vector<PartialSums> seg_prefix_;
  std::vector<PartialSums> seg_suffix_;
};

inline Measure validate_measure(RawMeasure raw, const Tolerances& tol = {}) {
  return Measure::validate(std::move(raw), tol);
}

// The potential function u(x) = integral |x - y| mu(dy) together with the
// excess U(x) = u(x) - |x - x0| over the potential of the point mass at the
// mean x0.
//
// Per constant-density piece f on [l, r] the closed form used is
//   f * ((x - l)^2 + (r - x)^2) / 2      for l <= x <= r,
//   f * (r - l) * |x - (l + r) / 2|      otherwise,
// which is what the prefix/suffix tables in Measure evaluate in O(log n).
class PotentialProfile {
 public:
  explicit PotentialProfile(Measure mu);

  const Measure& measure() const { return mu_; }
  double mean() const { return mu_.mean(); }
  Bound lower() const { return mu_.lower(); }
  Bound upper() const { return mu_.upper(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  double potential(double x) const;
  // Always >= 0; exactly 0 at and beyond finite support bounds.
  double excess_potential(double x) const;

  // One-sided derivatives u'(x-) = 2F(x-) - 1 and u'(x+) = 2F(x) - 1.
  double slope_left(double x) const;
  double slope_right(double x) const;
  double excess_slope_left(double x) const;
  double excess_slope_right(double x) const;

 private:
  Measure mu_;
  std::vector<double> breakpoints_;
};

// u evaluated by brute-force summation; independent of the table path.
double potential_direct(const Measure& mu, double x);

// Mean-preserving truncation onto [q-, q+] with atoms at x0 - M and x0 + M,
// chosen so u_{mu_M} = u_mu on [q-, q+] and u_{mu_M} <= u_mu everywhere.
// Sides whose support already lies within [x0 - M, x0 + M] are left alone;
// if both do, mu is returned unchanged.
struct Truncation {
  Measure measure;
  bool truncated_left = false;
  bool truncated_right = false;
  double q_lower = 0.0;
  double q_upper = 0.0;
};

Truncation truncate_measure_detailed(const PotentialProfile& profile, double M);
Measure truncate_measure(const PotentialProfile& profile, double M);

// (N - u(a)) / (N - |a|); requires x0 = 0 and support inside (-N, N).
double vhat_ratio(const PotentialProfile& profile, double N, double a);

// Piecewise-constant discretisation of a smooth law on [lo, hi]: each of n
// equal cells receives density (cdf(r) - cdf(l)) / (r - l); the result is
// renormalised to unit mass. Use this to feed smooth targets to the library.
// Cells above the median use the survival function when one is given, so
// thin upper tails do not round to zero.
RawMeasure discretize_density(const std::function<double(double)>& cdf, double lo, double hi,
                              std::size_t cells, std::string name = {},
                              const std::function<double(double)>& survival = {});

// Recentre by shifting every position by -mean.
RawMeasure recentre(const Measure& mu);

}  // namespace expembed
