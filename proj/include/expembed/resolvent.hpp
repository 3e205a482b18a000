#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "expembed/measure.hpp"
#include "expembed/speed.hpp"

namespace expembed {

// Continuous piecewise-linear function given by its values at sorted knots
// and the slope on each of the knots.size() - 1 pieces.
struct PiecewiseLinear {
  std::vector<double> knots;
  std::vector<double> values;
  std::vector<double> slopes;

  double operator()(double x) const;
  double slope_left(double x) const;
  double slope_right(double x) const;
};

// Solutions of f'' = 2 lambda f m for an atomic string on a bounded interval,
// normalised at the origin x0 of the speed measure:
//   phi(x0) = 1, phi'(x0-) = 0;  psi(x0) = 0, psi'(x0-) = 1,
// with the atom at x0 (if any) acting on the right-hand side. The knots are
// the interval bounds, the origin and every finite atom.
struct EigenSolution {
  double lambda = 1.0;
  double origin = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  PiecewiseLinear phi, psi, u_plus, u_minus;
  double h_plus = 0.0;   // lim psi/phi at the upper bound
  double h_minus = 0.0;  // -lim psi/phi at the lower bound
  double h = 0.0;        // (1/h_plus + 1/h_minus)^{-1}
  double h_plus_integral = 0.0;   // int_{x0}^{l+} phi^{-2}
  double h_minus_integral = 0.0;  // int_{l-}^{x0} phi^{-2}
  std::vector<double> atom_x;
  std::vector<double> atom_weight;
};

// Throws NonAtomicInterior if the speed measure has a continuous part,
// UnboundedInterval for infinite bounds and InvalidArgument for lambda <= 0.
EigenSolution solve_eigenfunctions(const SpeedMeasure& sm, double lambda = 1.0);

// g(x, y) = h u+(max) u-(min). Throws OutOfInterval outside the open interval.
double green_function(const EigenSolution& sol, double x, double y);

struct IdentityRow {
  double x, g1, half_u, abs_err;
};

struct IdentityReport {
  double max_abs_error = 0.0;
  double worst_x = 0.0;
  // g'(x0-) - g'(x0+), reported only when mu has no atom at x0.
  std::optional<double> derivative_jump;
  std::vector<IdentityRow> rows;
};

// Compares g_1(x, x0) with U(x)/2 on the grid (points outside the open
// interval are skipped). sm must be atomic inside the interval; for measures
// with a density use atomize() first.
IdentityReport check_main_identity(const PotentialProfile& profile, const SpeedMeasure& sm,
                                   const std::vector<double>& grid);

// Replaces the continuous part by one atom per cell at the cell midpoint,
// weight lambda(mid) times the covered length; keeps existing atoms and
// traps. Cells are `cells` equal parts of (lower, upper).
SpeedMeasure atomize(const SpeedMeasure& sm, std::size_t cells);

// x,g1_x_0,half_U,abs_err
void write_identity_csv(std::ostream& os, const IdentityReport& report);

}  // namespace expembed
