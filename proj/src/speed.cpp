#include "expembed/speed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "expembed/error.hpp"

namespace expembed {

namespace {

double integrate(const std::function<double(double)>& f, double a, double b) {
  if (!(a < b)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-12);
}

}  // namespace

SpeedMeasure SpeedMeasure::from_parts(double origin, double lower, double upper, std::vector<SpeedAtom> atoms,
                                      std::vector<SpeedSegment> segments) {
  if (!(lower < origin && origin < upper))
    throw Error(ErrorCode::InvalidArgument, "origin must lie strictly inside (lower, upper)");
  SpeedMeasure sm;
  sm.origin_ = origin;
  sm.lower_ = lower;
  sm.upper_ = upper;
  std::sort(atoms.begin(), atoms.end(), [](const SpeedAtom& l, const SpeedAtom& r) { return l.x < r.x; });
  for (const auto& a : atoms) {
    if (a.x < lower || a.x > upper) throw Error(ErrorCode::InvalidArgument, "speed atom outside [lower, upper]");
    if (!a.infinite && !(a.weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite speed weights must be > 0");
    if (a.infinite && a.x == lower) sm.absorbing_left_ = true;
    if (a.infinite && a.x == upper) sm.absorbing_right_ = true;
  }
  std::sort(segments.begin(), segments.end(),
            [](const SpeedSegment& l, const SpeedSegment& r) { return l.left < r.left; });
  for (const auto& s : segments)
    if (!(s.left < s.right) || s.left < lower || s.right > upper || s.numerator < 0.0)
      throw Error(ErrorCode::InvalidArgument, "bad speed segment");
  sm.atoms_ = std::move(atoms);
  sm.segments_ = std::move(segments);
  return sm;
}

SpeedMeasure build_speed_measure(std::shared_ptr<const PotentialProfile> profile) {
  const Measure& mu = profile->measure();
  const double x0 = mu.mean();
  if (mu.atoms().size() == 1 && mu.segments().empty())
    throw Error(ErrorCode::DegenerateMeasure, "mu is a point mass at its mean; X stays at x0");

  SpeedMeasure sm;
  sm.origin_ = x0;
  sm.lower_ = mu.lower().value;
  sm.upper_ = mu.upper().value;
  for (const auto& a : mu.atoms()) {
    if (a.x == sm.lower_ || a.x == sm.upper_) {
      sm.atoms_.push_back({a.x, 0.0, true});
      (a.x == sm.lower_ ? sm.absorbing_left_ : sm.absorbing_right_) = true;
      continue;
    }
    const double U = profile->excess_potential(a.x);
    sm.atoms_.push_back({a.x, a.p / U, false});
  }
  for (const auto& s : mu.segments()) sm.segments_.push_back({s.left, s.right, s.density});
  sm.profile_ = std::move(profile);
  return sm;
}

double SpeedMeasure::density(double x) const {
  if (!(x > lower_ && x < upper_)) return 0.0;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                             [](double v, const SpeedSegment& s) { return v < s.left; });
  if (it == segments_.begin()) return 0.0;
  const auto& s = *(it - 1);
  if (x > s.right) return 0.0;
  if (!profile_) return scale_ * s.numerator;
  return scale_ * s.numerator / profile_->excess_potential(x);
}

double SpeedMeasure::atom_weight(double x) const {
  for (const auto& a : atoms_)
    if (a.x == x) return a.infinite ? 0.0 : a.weight;
  return 0.0;
}

bool SpeedMeasure::is_trap(double x) const {
  if (x <= lower_ || x >= upper_) return true;
  for (const auto& a : atoms_)
    if (a.x == x && a.infinite) return true;
  return false;
}

double SpeedMeasure::continuous_mass(double a, double b) const {
  double total = 0.0;
  for (const auto& s : segments_) {
    const double l = std::max({a, s.left, lower_});
    const double r = std::min({b, s.right, upper_});
    if (l < r) total += integrate([this](double x) { return density(x); }, l, r);
  }
  return total;
}

double SpeedMeasure::continuous_mass_midpoint(double a, double b) const {
  double total = 0.0;
  for (const auto& s : segments_) {
    const double l = std::max({a, s.left, lower_});
    const double r = std::min({b, s.right, upper_});
    if (l < r) total += density(0.5 * (l + r)) * (r - l);
  }
  return total;
}

SpeedMeasure SpeedMeasure::scaled(double q) const {
  SpeedMeasure out = *this;
  out.scale_ *= q;
  for (auto& a : out.atoms_)
    if (!a.infinite) a.weight *= q;
  return out;
}

SpeedMeasure scale_for_rate(const SpeedMeasure& sm, double q) {
  if (!(q > 0.0) || !std::isfinite(q)) throw Error(ErrorCode::InvalidRate, "rate must be positive and finite");
  return sm.scaled(q);
}

const char* to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::Natural: return "Natural";
    case BoundaryClass::AbsorbingRegular: return "AbsorbingRegular";
    case BoundaryClass::AbsorbingIsolated: return "AbsorbingIsolated";
  }
  return "?";
}

BoundaryReport classify_boundary(const SpeedMeasure& sm, const PotentialProfile& profile, Side side) {
  const Measure& mu = profile.measure();
  const Bound b = side == Side::Right ? mu.upper() : mu.lower();
  if (b.infinite) throw Error(ErrorCode::UnboundedSide, "unbounded support; natural by convention");
  const double ell = b.value;

  BoundaryReport rep;
  if (mu.atom_mass(ell) == 0.0) {
    rep.kind = BoundaryClass::Natural;
    rep.sigma_m = std::numeric_limits<double>::infinity();
    rep.sigma_finite = false;
    return rep;
  }

  bool charged = false;
  for (const auto& s : mu.segments())
    if (side == Side::Right ? s.right == ell : s.left == ell) charged = true;
  rep.kind = charged ? BoundaryClass::AbsorbingRegular : BoundaryClass::AbsorbingIsolated;

  // sigma_m = int (ell - y) m(dy) over the open stretch between x0 and ell.
  const double x0 = sm.origin();
  double sigma = 0.0;
  for (const auto& a : sm.atoms()) {
    if (a.infinite) continue;
    if (side == Side::Right && a.x > x0 && a.x < ell) sigma += (ell - a.x) * a.weight;
    if (side == Side::Left && a.x < x0 && a.x > ell) sigma += (a.x - ell) * a.weight;
  }
  for (const auto& s : sm.segments()) {
    const double l = side == Side::Right ? std::max(s.left, x0) : s.left;
    const double r = side == Side::Right ? s.right : std::min(s.right, x0);
    if (!(l < r)) continue;
    sigma += integrate([&](double y) { return std::abs(ell - y) * sm.density(y); }, l, r);
  }
  rep.sigma_m = sigma;
  rep.sigma_finite = std::isfinite(sigma);
  return rep;
}

void write_speed_csv(std::ostream& os, const SpeedMeasure& sm) {
  os << "kind,x_or_left,right,weight_or_density,absorbing\n";
  char buf[160];
  for (const auto& a : sm.atoms()) {
    if (a.infinite)
      std::snprintf(buf, sizeof buf, "atom,%.17g,,inf,1\n", a.x);
    else
      std::snprintf(buf, sizeof buf, "atom,%.17g,,%.17g,0\n", a.x, a.weight);
    os << buf;
  }
  for (const auto& s : sm.segments()) {
    std::snprintf(buf, sizeof buf, "segment,%.17g,%.17g,%.17g,0\n", s.left, s.right, s.numerator * sm.scale());
    os << buf;
  }
}

}  // namespace expembed
