#include "expembed/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "expembed/error.hpp"

namespace expembed {

namespace {

bool all_finite(double a, double b) { return std::isfinite(a) && std::isfinite(b); }

}  // namespace

Measure Measure::validate(RawMeasure raw, const Tolerances& tol) {
  Measure mu;
  mu.name_ = std::move(raw.name);

  for (const auto& a : raw.atoms) {
    if (!std::isfinite(a.x)) throw Error(ErrorCode::NonFiniteMean, "atom at infinite position");
    if (!std::isfinite(a.p) || a.p < 0.0) throw Error(ErrorCode::InvalidMeasure, "atom mass must be finite and >= 0");
  }
  for (const auto& s : raw.segments) {
    if (!all_finite(s.left, s.right)) throw Error(ErrorCode::NonFiniteMean, "unbounded segment");
    if (!(s.left < s.right)) throw Error(ErrorCode::InvalidMeasure, "segment requires left < right");
    if (!std::isfinite(s.density) || s.density < 0.0)
      throw Error(ErrorCode::InvalidMeasure, "segment density must be finite and >= 0");
  }

  std::vector<Atom> atoms;
  for (const auto& a : raw.atoms)
    if (a.p > 0.0) atoms.push_back(a);
  std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.x < r.x; });
  for (const auto& a : atoms) {
    const double scale = std::max(1.0, std::abs(a.x));
    if (!mu.atoms_.empty() && std::abs(mu.atoms_.back().x - a.x) <= tol.position * scale)
      mu.atoms_.back().p += a.p;
    else
      mu.atoms_.push_back(a);
  }

  std::vector<Segment> segs;
  for (const auto& s : raw.segments)
    if (s.density > 0.0) segs.push_back(s);
  std::sort(segs.begin(), segs.end(), [](const Segment& l, const Segment& r) { return l.left < r.left; });
  for (std::size_t i = 1; i < segs.size(); ++i)
    if (segs[i].left < segs[i - 1].right) throw Error(ErrorCode::InvalidMeasure, "overlapping segments");
  mu.segments_ = std::move(segs);

  if (mu.atoms_.empty() && mu.segments_.empty()) throw Error(ErrorCode::EmptyMeasure, "no mass");

  double mass = 0.0;
  for (const auto& a : mu.atoms_) mass += a.p;
  for (const auto& s : mu.segments_) mass += s.density * (s.right - s.left);
  if (std::abs(mass - 1.0) > tol.mass_accept)
    throw Error(ErrorCode::NonUnitMass, "total mass " + std::to_string(mass));
  for (auto& a : mu.atoms_) a.p /= mass;
  for (auto& s : mu.segments_) s.density /= mass;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (!mu.atoms_.empty()) {
    lo = std::min(lo, mu.atoms_.front().x);
    hi = std::max(hi, mu.atoms_.back().x);
  }
  if (!mu.segments_.empty()) {
    lo = std::min(lo, mu.segments_.front().left);
    hi = std::max(hi, mu.segments_.back().right);
  }
  mu.lower_ = Bound::finite(lo);
  mu.upper_ = Bound::finite(hi);

  mu.build_tables();
  const PartialSums all = mu.below(hi, true);
  mu.mean_ = all.moment;
  if (!std::isfinite(mu.mean_)) throw Error(ErrorCode::NonFiniteMean, "mean diverges");
  return mu;
}

Measure Measure::atomic(std::vector<Atom> atoms, const Tolerances& tol) {
  return validate(RawMeasure{std::move(atoms), {}, {}}, tol);
}

void Measure::build_tables() {
  const std::size_t na = atoms_.size();
  atom_x_.resize(na);
  atom_prefix_.assign(na + 1, {});
  atom_suffix_.assign(na + 1, {});
  for (std::size_t i = 0; i < na; ++i) {
    atom_x_[i] = atoms_[i].x;
    atom_prefix_[i + 1] = {atom_prefix_[i].mass + atoms_[i].p, atom_prefix_[i].moment + atoms_[i].p * atoms_[i].x};
  }
  for (std::size_t i = na; i-- > 0;)
    atom_suffix_[i] = {atom_suffix_[i + 1].mass + atoms_[i].p, atom_suffix_[i + 1].moment + atoms_[i].p * atoms_[i].x};

  const std::size_t ns = segments_.size();
  seg_left_.resize(ns);
  seg_right_.resize(ns);
  seg_prefix_.assign(ns + 1, {});
  seg_suffix_.assign(ns + 1, {});
  auto seg_sums = [](const Segment& s) {
    const double m = s.density * (s.right - s.left);
    return PartialSums{m, m * 0.5 * (s.left + s.right)};
  };
  for (std::size_t i = 0; i < ns; ++i) {
    seg_left_[i] = segments_[i].left;
    seg_right_[i] = segments_[i].right;
    const auto s = seg_sums(segments_[i]);
    seg_prefix_[i + 1] = {seg_prefix_[i].mass + s.mass, seg_prefix_[i].moment + s.moment};
  }
  for (std::size_t i = ns; i-- > 0;) {
    const auto s = seg_sums(segments_[i]);
    seg_suffix_[i] = {seg_suffix_[i + 1].mass + s.mass, seg_suffix_[i + 1].moment + s.moment};
  }
}

double Measure::atom_mass(double x) const {
  auto it = std::lower_bound(atom_x_.begin(), atom_x_.end(), x);
  if (it != atom_x_.end() && *it == x) return atoms_[static_cast<std::size_t>(it - atom_x_.begin())].p;
  return 0.0;
}

PartialSums Measure::below(double x, bool inclusive) const {
  const auto ai = static_cast<std::size_t>(
      (inclusive ? std::upper_bound(atom_x_.begin(), atom_x_.end(), x) : std::lower_bound(atom_x_.begin(), atom_x_.end(), x)) -
      atom_x_.begin());
  PartialSums out = atom_prefix_[ai];
  // segments entirely at or left of x
  const auto sj = static_cast<std::size_t>(std::upper_bound(seg_right_.begin(), seg_right_.end(), x) - seg_right_.begin());
  out.mass += seg_prefix_[sj].mass;
  out.moment += seg_prefix_[sj].moment;
  if (sj < segments_.size() && segments_[sj].left < x) {
    const auto& s = segments_[sj];
    out.mass += s.density * (x - s.left);
    out.moment += s.density * (x - s.left) * 0.5 * (x + s.left);
  }
  return out;
}

PartialSums Measure::above(double x, bool inclusive) const {
  const auto ai = static_cast<std::size_t>(
      (inclusive ? std::lower_bound(atom_x_.begin(), atom_x_.end(), x) : std::upper_bound(atom_x_.begin(), atom_x_.end(), x)) -
      atom_x_.begin());
  PartialSums out = atom_suffix_[ai];
  // segments entirely at or right of x
  const auto sj = static_cast<std::size_t>(std::lower_bound(seg_left_.begin(), seg_left_.end(), x) - seg_left_.begin());
  out.mass += seg_suffix_[sj].mass;
  out.moment += seg_suffix_[sj].moment;
  if (sj > 0 && segments_[sj - 1].right > x) {
    const auto& s = segments_[sj - 1];
    out.mass += s.density * (s.right - x);
    out.moment += s.density * (s.right - x) * 0.5 * (s.right + x);
  }
  return out;
}

double Measure::cdf(double x) const { return std::clamp(below(x, true).mass, 0.0, 1.0); }

double Measure::cdf_left(double x) const { return std::clamp(below(x, false).mass, 0.0, 1.0); }

double Measure::density(double x) const {
  auto it = std::upper_bound(seg_left_.begin(), seg_left_.end(), x);
  if (it == seg_left_.begin()) return 0.0;
  const auto& s = segments_[static_cast<std::size_t>(it - seg_left_.begin()) - 1];
  return x < s.right ? s.density : 0.0;
}

double Measure::lower_excess(double x) const {
  // Full pieces from the tables; the straddling segment in closed form.
  const auto ai = static_cast<std::size_t>(std::lower_bound(atom_x_.begin(), atom_x_.end(), x) - atom_x_.begin());
  double v = x * atom_prefix_[ai].mass - atom_prefix_[ai].moment;
  const auto sj = static_cast<std::size_t>(std::upper_bound(seg_right_.begin(), seg_right_.end(), x) - seg_right_.begin());
  v += x * seg_prefix_[sj].mass - seg_prefix_[sj].moment;
  if (sj < segments_.size() && segments_[sj].left < x) {
    const auto& s = segments_[sj];
    v += 0.5 * s.density * (x - s.left) * (x - s.left);
  }
  return std::max(v, 0.0);
}

double Measure::upper_excess(double x) const {
  const auto ai = static_cast<std::size_t>(std::upper_bound(atom_x_.begin(), atom_x_.end(), x) - atom_x_.begin());
  double v = atom_suffix_[ai].moment - x * atom_suffix_[ai].mass;
  const auto sj = static_cast<std::size_t>(std::lower_bound(seg_left_.begin(), seg_left_.end(), x) - seg_left_.begin());
  v += seg_suffix_[sj].moment - x * seg_suffix_[sj].mass;
  if (sj > 0 && segments_[sj - 1].right > x) {
    const auto& s = segments_[sj - 1];
    v += 0.5 * s.density * (s.right - x) * (s.right - x);
  }
  return std::max(v, 0.0);
}

RawMeasure Measure::raw() const { return RawMeasure{atoms_, segments_, name_}; }

PotentialProfile::PotentialProfile(Measure mu) : mu_(std::move(mu)) {
  for (const auto& a : mu_.atoms()) breakpoints_.push_back(a.x);
  for (const auto& s : mu_.segments()) {
    breakpoints_.push_back(s.left);
    breakpoints_.push_back(s.right);
  }
  std::sort(breakpoints_.begin(), breakpoints_.end());
  breakpoints_.erase(std::unique(breakpoints_.begin(), breakpoints_.end()), breakpoints_.end());
}

double PotentialProfile::potential(double x) const { return mu_.lower_excess(x) + mu_.upper_excess(x); }

double PotentialProfile::excess_potential(double x) const {
  // u(x) - |x - x0| = 2 * (mass-weighted distance on the far side of x from x0)
  if (x <= mu_.lower().value || x >= mu_.upper().value) return 0.0;
  return 2.0 * (x >= mean() ? mu_.upper_excess(x) : mu_.lower_excess(x));
}

double PotentialProfile::slope_left(double x) const { return 2.0 * mu_.cdf_left(x) - 1.0; }

double PotentialProfile::slope_right(double x) const { return 2.0 * mu_.cdf(x) - 1.0; }

// Tail masses rather than 2F - 1 -+ 1, which cancels where F is near 0 or 1.
double PotentialProfile::excess_slope_left(double x) const {
  return x > mean() ? -2.0 * mu_.above(x, true).mass : 2.0 * mu_.below(x, false).mass;
}

double PotentialProfile::excess_slope_right(double x) const {
  return x >= mean() ? -2.0 * mu_.above(x, false).mass : 2.0 * mu_.below(x, true).mass;
}

double potential_direct(const Measure& mu, double x) {
  double v = 0.0;
  for (const auto& a : mu.atoms()) v += a.p * std::abs(x - a.x);
  for (const auto& s : mu.segments()) {
    if (x <= s.left)
      v += s.density * (s.right - s.left) * (0.5 * (s.left + s.right) - x);
    else if (x >= s.right)
      v += s.density * (s.right - s.left) * (x - 0.5 * (s.left + s.right));
    else
      v += 0.5 * s.density * ((x - s.left) * (x - s.left) + (s.right - x) * (s.right - x));
  }
  return v;
}

namespace {

// Root of g(q) = u(q) + u'(q+) (P - q) - V on [lo, hi], g nondecreasing,
// g(lo) <= 0 < g(hi). This is the contact point of the tangent to u drawn
// from (P, V). Atoms make g jump; a root sitting on an atom is snapped to it.
double tangent_point(const PotentialProfile& prof, double P, double V, double lo, double hi, bool right_side) {
  auto g = [&](double q) {
    const double slope = right_side ? prof.slope_right(q) : prof.slope_left(q);
    return prof.potential(q) + slope * (P - q) - V;
  };
  if (right_side) {
    if (g(lo) > 0.0) throw Error(ErrorCode::NoTangent, "tangency not bracketed on the right");
    if (g(hi) <= 0.0) throw Error(ErrorCode::NoTangent, "tangency not bracketed on the right");
  } else {
    // On the left g is nonincreasing in q; flip the roles.
    if (g(hi) > 0.0 || g(lo) <= 0.0) throw Error(ErrorCode::NoTangent, "tangency not bracketed on the left");
  }
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const bool positive = g(mid) > 0.0;
    if (positive == right_side)
      hi = mid;
    else
      lo = mid;
  }
  const auto atoms = prof.measure().atoms();
  for (const auto& a : atoms)
    if (a.x >= lo && a.x <= hi) return a.x;
  return right_side ? hi : lo;
}

}  // namespace

Truncation truncate_measure_detailed(const PotentialProfile& prof, double M) {
  const double x0 = prof.mean();
  if (!(M > std::abs(prof.potential(x0))))
    throw Error(ErrorCode::InvalidArgument, "truncation level must exceed |u(x0)|");
  const double P_hi = x0 + M;
  const double P_lo = x0 - M;
  const Measure& mu = prof.measure();
  const bool cut_right = mu.upper().infinite || mu.upper().value > P_hi;
  const bool cut_left = mu.lower().infinite || mu.lower().value < P_lo;

  Truncation out{mu, false, false, mu.lower().value, mu.upper().value};
  if (!cut_right && !cut_left) return out;

  double q_hi = mu.upper().value;
  double q_lo = mu.lower().value;
  if (cut_right) q_hi = tangent_point(prof, P_hi, M, x0, P_hi, true);
  if (cut_left) q_lo = tangent_point(prof, P_lo, M, P_lo, x0, false);

  RawMeasure raw;
  raw.name = mu.name().empty() ? "" : mu.name() + "_truncated";
  auto inside = [&](double x) { return (cut_left ? x > q_lo : x >= q_lo) && (cut_right ? x < q_hi : x <= q_hi); };
  for (const auto& a : mu.atoms())
    if (inside(a.x)) raw.atoms.push_back(a);
  for (const auto& s : mu.segments()) {
    const double l = cut_left ? std::max(s.left, q_lo) : s.left;
    const double r = cut_right ? std::min(s.right, q_hi) : s.right;
    if (l < r) raw.segments.push_back({l, r, s.density});
  }
  if (cut_right) {
    const double chord = (M - prof.potential(q_hi)) / (P_hi - q_hi);
    raw.atoms.push_back({q_hi, std::max(0.0, 0.5 * (chord - prof.slope_left(q_hi)))});
    raw.atoms.push_back({P_hi, std::max(0.0, 0.5 * (1.0 - chord))});
  }
  if (cut_left) {
    const double chord = (prof.potential(q_lo) - M) / (q_lo - P_lo);
    raw.atoms.push_back({q_lo, std::max(0.0, 0.5 * (prof.slope_right(q_lo) - chord))});
    raw.atoms.push_back({P_lo, std::max(0.0, 0.5 * (chord + 1.0))});
  }
  out.measure = Measure::validate(std::move(raw));
  out.truncated_left = cut_left;
  out.truncated_right = cut_right;
  out.q_lower = q_lo;
  out.q_upper = q_hi;
  return out;
}

Measure truncate_measure(const PotentialProfile& profile, double M) {
  return truncate_measure_detailed(profile, M).measure;
}

double vhat_ratio(const PotentialProfile& prof, double N, double a) {
  if (std::abs(a) >= N) throw Error(ErrorCode::OutOfRange, "|a| must be < N");
  if (!(prof.lower().value > -N && prof.upper().value < N))
    throw Error(ErrorCode::OutOfRange, "support must lie inside (-N, N)");
  return (N - prof.potential(a)) / (N - std::abs(a));
}

RawMeasure discretize_density(const std::function<double(double)>& cdf, double lo, double hi, std::size_t cells,
                              std::string name, const std::function<double(double)>& survival) {
  if (!(lo < hi) || cells == 0) throw Error(ErrorCode::InvalidArgument, "discretize_density needs lo < hi and cells > 0");
  RawMeasure raw;
  raw.name = std::move(name);
  const double w = (hi - lo) / static_cast<double>(cells);
  double total = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double l = lo + w * static_cast<double>(i);
    const double r = i + 1 == cells ? hi : lo + w * static_cast<double>(i + 1);
    const double m = survival && cdf(l) > 0.5 ? survival(l) - survival(r) : cdf(r) - cdf(l);
    total += m;
    raw.segments.push_back({l, r, m / (r - l)});
  }
  for (auto& s : raw.segments) s.density /= total;
  return raw;
}

RawMeasure recentre(const Measure& mu) {
  RawMeasure raw = mu.raw();
  const double c = mu.mean();
  for (auto& a : raw.atoms) a.x -= c;
  for (auto& s : raw.segments) {
    s.left -= c;
    s.right -= c;
  }
  return raw;
}

}  // namespace expembed
