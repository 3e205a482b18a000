#include "expembed/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "expembed/error.hpp"

namespace expembed {

namespace {

std::size_t segment_of(const std::vector<double>& knots, double x) {
  // index i with knots[i] <= x < knots[i+1], clamped to the valid range
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  std::size_t i = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
  return std::min(i, knots.size() - 2);
}

double slope_of(const PiecewiseLinear& f, std::size_t i) { return f.slopes[i]; }

}  // namespace

double PiecewiseLinear::operator()(double x) const {
  const std::size_t i = segment_of(knots, x);
  return values[i] + slope_of(*this, i) * (x - knots[i]);
}

double PiecewiseLinear::slope_right(double x) const { return slope_of(*this, segment_of(knots, x)); }

double PiecewiseLinear::slope_left(double x) const {
  auto it = std::lower_bound(knots.begin(), knots.end(), x);
  std::size_t i = it == knots.begin() ? 0 : static_cast<std::size_t>(it - knots.begin()) - 1;
  return slope_of(*this, std::min(i, knots.size() - 2));
}

EigenSolution solve_eigenfunctions(const SpeedMeasure& sm, double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "spectral parameter must be positive");
  if (sm.has_segments()) throw Error(ErrorCode::NonAtomicInterior, "atomize the speed measure first");
  if (!std::isfinite(sm.lower()) || !std::isfinite(sm.upper()))
    throw Error(ErrorCode::UnboundedInterval, "bounded interval required");

  EigenSolution sol;
  sol.lambda = lambda;
  sol.origin = sm.origin();
  sol.lower = sm.lower();
  sol.upper = sm.upper();
  const double x0 = sm.origin();

  std::vector<double> knots{sm.lower(), x0, sm.upper()};
  for (const auto& a : sm.atoms()) {
    if (a.infinite || a.x <= sm.lower() || a.x >= sm.upper()) continue;
    sol.atom_x.push_back(a.x);
    sol.atom_weight.push_back(a.weight);
    knots.push_back(a.x);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  const std::size_t n = knots.size();
  std::vector<double> weight(n, 0.0);
  for (std::size_t k = 0; k < sol.atom_x.size(); ++k)
    weight[static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), sol.atom_x[k]) - knots.begin())] +=
        sol.atom_weight[k];
  const auto zero = static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), x0) - knots.begin());

  // Shoot from x0 in both directions. Slopes are constant between knots and
  // jump by 2 lambda w f(a) across an atom a of weight w (f'' = 2 lambda f m).
  auto shoot = [&](double value0, double slope_below0, PiecewiseLinear& f) {
    f.knots = knots;
    f.values.assign(n, 0.0);
    f.slopes.assign(n - 1, 0.0);
    f.values[zero] = value0;
    double slope = slope_below0 + 2.0 * lambda * weight[zero] * value0;
    for (std::size_t i = zero + 1; i < n; ++i) {
      f.slopes[i - 1] = slope;
      f.values[i] = f.values[i - 1] + slope * (knots[i] - knots[i - 1]);
      slope += 2.0 * lambda * weight[i] * f.values[i];
    }
    slope = slope_below0;
    for (std::size_t i = zero; i-- > 0;) {
      f.slopes[i] = slope;
      f.values[i] = f.values[i + 1] - slope * (knots[i + 1] - knots[i]);
      slope -= 2.0 * lambda * weight[i] * f.values[i];
    }
  };
  shoot(1.0, 0.0, sol.phi);
  shoot(0.0, 1.0, sol.psi);
  const auto& phi = sol.phi.values;
  const auto& psi = sol.psi.values;

  sol.h_plus = psi.back() / phi.back();
  sol.h_minus = -psi.front() / phi.front();
  sol.h = 1.0 / (1.0 / sol.h_plus + 1.0 / sol.h_minus);
  // phi is linear between knots: int_a^b phi^{-2} = (b - a) / (phi(a) phi(b)).
  for (std::size_t i = zero; i + 1 < n; ++i) sol.h_plus_integral += (knots[i + 1] - knots[i]) / (phi[i] * phi[i + 1]);
  for (std::size_t i = 0; i < zero; ++i) sol.h_minus_integral += (knots[i + 1] - knots[i]) / (phi[i] * phi[i + 1]);

  auto combine = [&](double c) {
    PiecewiseLinear f{knots, std::vector<double>(n), std::vector<double>(n - 1)};
    for (std::size_t i = 0; i < n; ++i) f.values[i] = phi[i] + c * psi[i];
    for (std::size_t i = 0; i + 1 < n; ++i) f.slopes[i] = sol.phi.slopes[i] + c * sol.psi.slopes[i];
    return f;
  };
  sol.u_plus = combine(-1.0 / sol.h_plus);
  sol.u_minus = combine(1.0 / sol.h_minus);
  return sol;
}

double green_function(const EigenSolution& sol, double x, double y) {
  if (!(x > sol.lower && x < sol.upper && y > sol.lower && y < sol.upper))
    throw Error(ErrorCode::OutOfInterval, "green function arguments must be inside the interval");
  return sol.h * sol.u_plus(std::max(x, y)) * sol.u_minus(std::min(x, y));
}

IdentityReport check_main_identity(const PotentialProfile& profile, const SpeedMeasure& sm,
                                   const std::vector<double>& grid) {
  const EigenSolution sol = solve_eigenfunctions(sm, 1.0);
  const double x0 = sm.origin();
  IdentityReport rep;
  for (double x : grid) {
    if (!(x > sol.lower && x < sol.upper)) continue;
    const double g = green_function(sol, x, x0);
    const double half_u = 0.5 * profile.excess_potential(x);
    const double err = std::abs(g - half_u);
    rep.rows.push_back({x, g, half_u, err});
    if (err > rep.max_abs_error || rep.rows.size() == 1) {
      rep.max_abs_error = std::max(rep.max_abs_error, err);
      rep.worst_x = x;
    }
  }
  if (profile.measure().atom_mass(x0) == 0.0)
    rep.derivative_jump = sol.h * (sol.u_minus.slope_left(x0) - sol.u_plus.slope_right(x0));
  return rep;
}

SpeedMeasure atomize(const SpeedMeasure& sm, std::size_t cells) {
  if (cells == 0) throw Error(ErrorCode::InvalidArgument, "cells must be positive");
  std::vector<SpeedAtom> atoms(sm.atoms().begin(), sm.atoms().end());
  const double w = (sm.upper() - sm.lower()) / static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    const double l = sm.lower() + w * static_cast<double>(i);
    const double r = i + 1 == cells ? sm.upper() : sm.lower() + w * static_cast<double>(i + 1);
    const double mass = sm.continuous_mass_midpoint(l, r);
    if (mass > 0.0) atoms.push_back({0.5 * (l + r), mass, false});
  }
  std::sort(atoms.begin(), atoms.end(), [](const SpeedAtom& a, const SpeedAtom& b) { return a.x < b.x; });
  // merge coincident positions
  std::vector<SpeedAtom> merged;
  for (const auto& a : atoms) {
    if (!merged.empty() && merged.back().x == a.x) {
      if (a.infinite || merged.back().infinite)
        merged.back().infinite = true;
      else
        merged.back().weight += a.weight;
    } else {
      merged.push_back(a);
    }
  }
  return SpeedMeasure::from_parts(sm.origin(), sm.lower(), sm.upper(), std::move(merged), {});
}

void write_identity_csv(std::ostream& os, const IdentityReport& report) {
  os << "x,g1_x_0,half_U,abs_err\n";
  char buf[160];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.x, r.g1, r.half_u, r.abs_err);
    os << buf;
  }
}

}  // namespace expembed
