#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "expembed/measure.hpp"

namespace expembed {

// Finite atoms carry weight > 0 (already rate-scaled). Infinite atoms are traps; their weight field
// is ignored and never used in arithmetic.
struct SpeedAtom {
  double x = 0.0;
  double weight = 0.0;
  bool infinite = false;
};

// Density lambda(x) = scale * numerator / U(x) on [left, right] when the speed
// measure is tied to a potential profile, and scale * numerator otherwise.
struct SpeedSegment {
  double left = 0.0;
  double right = 0.0;
  double numerator = 0.0;
};

enum class Side { Left, Right };

// Speed measure of a generalised diffusion on natural scale. m is infinite
// outside the open interval (lower, upper); finite on compacts inside it.
class SpeedMeasure {
 public:
  // Direct construction, e.g. Lebesgue measure or a hand-built string.
  // Segment densities are taken literally (no profile denominator).
  static SpeedMeasure from_parts(double origin, double lower, double upper, std::vector<SpeedAtom> atoms,
                                 std::vector<SpeedSegment> segments);

  std::span<const SpeedAtom> atoms() const { return atoms_; }
  std::span<const SpeedSegment> segments() const { return segments_; }
  double origin() const { return origin_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool absorbing_left() const { return absorbing_left_; }
  bool absorbing_right() const { return absorbing_right_; }
  double scale() const { return scale_; }
  const PotentialProfile* profile() const { return profile_.get(); }
  bool has_segments() const { return !segments_.empty(); }

  // lambda(x) for x strictly inside (lower, upper); 0 outside segments.
  double density(double x) const;

  // Finite atom weight at x (0 if none); infinite atoms report 0 as well.
  double atom_weight(double x) const;
  bool is_trap(double x) const;

  // Mass of the continuous part over [a, b] (adaptive Gauss-Kronrod).
  double continuous_mass(double a, double b) const;
  // Midpoint rule: sum over segments of lambda(c) |[a, b] n segment|, c the
  // midpoint of the intersection.
  double continuous_mass_midpoint(double a, double b) const;

  SpeedMeasure scaled(double q) const;

 private:
  friend SpeedMeasure build_speed_measure(std::shared_ptr<const PotentialProfile> profile);

  std::vector<SpeedAtom> atoms_;
  std::vector<SpeedSegment> segments_;
  std::shared_ptr<const PotentialProfile> profile_;
  double origin_ = 0.0;
  double lower_ = 0.0;
  double upper_ = 0.0;
  bool absorbing_left_ = false;
  bool absorbing_right_ = false;
  double scale_ = 1.0;
};

// m(dx) = mu(dx) / (u(x) - |x - x0|) inside the support, infinite outside.
// Atoms of mu at the support bounds become traps. Throws DegenerateMeasure for
// mu = delta_{x0}.
SpeedMeasure build_speed_measure(std::shared_ptr<const PotentialProfile> profile);

enum class BoundaryClass { Natural, AbsorbingRegular, AbsorbingIsolated };

const char* to_string(BoundaryClass c);

struct BoundaryReport {
  BoundaryClass kind = BoundaryClass::Natural;
  // sigma_m = integral over (x0, l+) of (l+ - y) m(dy) (mirrored on the left).
  // Infinite for natural boundaries (not evaluated); computed numerically
  // for AbsorbingRegular; finite sum for AbsorbingIsolated.
  double sigma_m = 0.0;
  bool sigma_finite = false;
};

BoundaryReport classify_boundary(const SpeedMeasure& sm, const PotentialProfile& profile, Side side);

// m -> q m on finite parts; traps untouched. Throws InvalidRate for q <= 0.
SpeedMeasure scale_for_rate(const SpeedMeasure& sm, double q);

// kind,x_or_left,right,weight_or_density,absorbing
// Segment rows report the scaled numerator; lambda(x) = value / U(x).
void write_speed_csv(std::ostream& os, const SpeedMeasure& sm);

}  // namespace expembed
