#pragma once

#include <functional>
#include <vector>

#include "expembed/measure.hpp"

namespace expembed {

class EmpiricalLaw {
 public:
  // Throws EmptySample for an empty input and InvalidArgument for NaN.
  explicit EmpiricalLaw(std::vector<double> samples);

  const std::vector<double>& samples() const { return samples_; }
  std::size_t count() const { return samples_.size(); }

  // #{x_i <= x} / n and #{x_i < x} / n.
  double cdf(double x) const;
  double cdf_left(double x) const;

  double mean() const;
  // Unbiased sample variance (0 for a single sample).
  double variance() const;

  // Purely atomic measure with mass k/n at each distinct sample value.
  Measure to_measure() const;

 private:
  std::vector<double> samples_;
};

// sup |F_n - F| for a mixed target; both one-sided limits are compared at
// every sample point and every atom of the target.
double ks_distance(const EmpiricalLaw& emp, const Measure& target);

// Same against a continuous CDF.
double ks_distance(const EmpiricalLaw& emp, const std::function<double(double)>& cdf);

// (1/2) sum |p - q| over the union of atoms. Throws NotAtomic.
double tv_atomic(const Measure& p, const Measure& q);

// integral |F_n - F| dx, integrated exactly piece by piece.
double wasserstein1(const EmpiricalLaw& emp, const Measure& target);

// Mean and standard error of the mean.
struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanEstimate estimate_mean(const std::vector<double>& values);

// Sample Pearson correlation. Throws EmptySample for fewer than two pairs.
double correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace expembed
