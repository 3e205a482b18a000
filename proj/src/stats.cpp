#include "expembed/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "expembed/error.hpp"

namespace expembed {

EmpiricalLaw::EmpiricalLaw(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw Error(ErrorCode::EmptySample, "no samples");
  for (double x : samples_)
    if (std::isnan(x)) throw Error(ErrorCode::InvalidArgument, "NaN sample");
  std::sort(samples_.begin(), samples_.end());
}

double EmpiricalLaw::cdf(double x) const {
  const auto k = std::upper_bound(samples_.begin(), samples_.end(), x) - samples_.begin();
  return static_cast<double>(k) / static_cast<double>(count());
}

double EmpiricalLaw::cdf_left(double x) const {
  const auto k = std::lower_bound(samples_.begin(), samples_.end(), x) - samples_.begin();
  return static_cast<double>(k) / static_cast<double>(count());
}

double EmpiricalLaw::mean() const { return estimate_mean(samples_).mean; }

double EmpiricalLaw::variance() const {
  if (count() < 2) return 0.0;
  const double m = mean();
  double s = 0.0;
  for (double x : samples_) s += (x - m) * (x - m);
  return s / static_cast<double>(count() - 1);
}

Measure EmpiricalLaw::to_measure() const {
  std::vector<Atom> atoms;
  const double w = 1.0 / static_cast<double>(count());
  for (double x : samples_) {
    if (!atoms.empty() && atoms.back().x == x)
      atoms.back().p += w;
    else
      atoms.push_back({x, w});
  }
  return Measure::atomic(std::move(atoms));
}

double ks_distance(const EmpiricalLaw& emp, const Measure& target) {
  std::vector<double> points(emp.samples());
  for (const auto& a : target.atoms()) points.push_back(a.x);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  double d = 0.0;
  for (double x : points) {
    d = std::max(d, std::abs(emp.cdf(x) - target.cdf(x)));
    d = std::max(d, std::abs(emp.cdf_left(x) - target.cdf_left(x)));
  }
  return d;
}

double ks_distance(const EmpiricalLaw& emp, const std::function<double(double)>& cdf) {
  const auto& s = emp.samples();
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 1 < s.size() && s[i + 1] == s[i]) continue;
    const double f = cdf(s[i]);
    d = std::max(d, std::abs(emp.cdf_left(s[i]) - f));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double tv_atomic(const Measure& p, const Measure& q) {
  if (!p.is_atomic() || !q.is_atomic()) throw Error(ErrorCode::NotAtomic, "total variation needs atomic measures");
  std::map<double, double> diff;
  for (const auto& a : p.atoms()) diff[a.x] += a.p;
  for (const auto& a : q.atoms()) diff[a.x] -= a.p;
  double s = 0.0;
  for (const auto& [x, d] : diff) s += std::abs(d);
  return 0.5 * s;
}

namespace {

// integral over [a, b] of |c - (f0 + s (x - a))|.
double abs_linear_integral(double c, double f0, double s, double a, double b) {
  const double len = b - a;
  if (len <= 0.0) return 0.0;
  const double g0 = f0 - c;
  const double g1 = g0 + s * len;
  if ((g0 >= 0.0 && g1 >= 0.0) || (g0 <= 0.0 && g1 <= 0.0)) return 0.5 * std::abs(g0 + g1) * len;
  const double t = g0 / (g0 - g1) * len;
  return 0.5 * (std::abs(g0) * t + std::abs(g1) * (len - t));
}

}  // namespace

double wasserstein1(const EmpiricalLaw& emp, const Measure& target) {
  std::vector<double> cuts(emp.samples());
  for (const auto& a : target.atoms()) cuts.push_back(a.x);
  for (const auto& s : target.segments()) {
    cuts.push_back(s.left);
    cuts.push_back(s.right);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  // Both CDFs are 0 before the first cut and 1 after the last. Between cuts
  // F_n is constant and F is linear.
  double w = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    const double c = emp.cdf(a);
    const double fa = target.cdf(a);
    const double slope = (target.cdf_left(b) - fa) / (b - a);
    w += abs_linear_integral(c, fa, slope, a, b);
  }
  return w;
}

MeanEstimate estimate_mean(const std::vector<double>& values) {
  if (values.empty()) throw Error(ErrorCode::EmptySample, "no values");
  const double n = static_cast<double>(values.size());
  double m = 0.0;
  for (double v : values) m += v;
  m /= n;
  if (values.size() < 2) return {m, 0.0};
  double s = 0.0;
  for (double v : values) s += (v - m) * (v - m);
  return {m, std::sqrt(s / (n - 1.0) / n)};
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  if (x.size() < 2) throw Error(ErrorCode::EmptySample, "need two pairs");
  const double mx = estimate_mean(x).mean, my = estimate_mean(y).mean;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace expembed
