#include <doctest.h>

#include <cmath>

#include "expembed/error.hpp"
#include "expembed/rng.hpp"
#include "expembed/stats.hpp"

using namespace expembed;

namespace {

Measure mu3() { return Measure::atomic({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}}); }

}  // namespace

TEST_CASE("empirical law") {
  const EmpiricalLaw e({3.0, 1.0, 2.0, 2.0});
  CHECK(e.samples().front() == 1.0);
  CHECK(e.cdf(2.0) == 0.75);
  CHECK(e.cdf_left(2.0) == 0.25);
  CHECK(e.mean() == 2.0);
  CHECK(e.to_measure().atom_mass(2.0) == 0.5);
  CHECK_THROWS_AS(EmpiricalLaw({}), Error);
}

TEST_CASE("ks distance") {
  CHECK(ks_distance(EmpiricalLaw({0.0}), Measure::atomic({{0.0, 1.0}})) == 0.0);
  CHECK(ks_distance(EmpiricalLaw({-5.0, -4.0}), mu3()) == 1.0);
  // an atom of mass p is a jump of exactly p: all samples at 0 against mu3
  CHECK(ks_distance(EmpiricalLaw({0.0, 0.0}), mu3()) == doctest::Approx(0.25));

  const Measure u = Measure::validate({{}, {{-1.0, 1.0, 0.5}}, ""});
  auto eng = rng::make_engine(1, rng::Stream::Test, 0);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = -1.0 + 2.0 * rng::uniform01(eng);
  const double d = ks_distance(EmpiricalLaw(xs), u);
  CHECK(d < 1.95 / std::sqrt(1e5));
  CHECK(d == doctest::Approx(ks_distance(EmpiricalLaw(xs), [](double x) { return std::clamp((x + 1.0) / 2.0, 0.0, 1.0); })).epsilon(1e-12));
}

TEST_CASE("total variation") {
  CHECK(tv_atomic(mu3(), mu3()) == 0.0);
  CHECK(tv_atomic(Measure::atomic({{0.0, 1.0}}), Measure::atomic({{1.0, 1.0}})) == 1.0);
  const Measure q = Measure::atomic({{-1.0, 0.25}, {0.0, 0.25}, {1.0, 0.5}});
  CHECK(tv_atomic(mu3(), q) == doctest::Approx(0.25));
  CHECK(tv_atomic(q, mu3()) == tv_atomic(mu3(), q));
  CHECK_THROWS_AS(tv_atomic(mu3(), Measure::validate({{}, {{-1.0, 1.0, 0.5}}, ""})), Error);
}

TEST_CASE("wasserstein") {
  const EmpiricalLaw e({-1.0, 0.0, 0.0, 1.0});
  CHECK(wasserstein1(e, mu3()) == 0.0);
  CHECK(wasserstein1(EmpiricalLaw({0.0}), Measure::atomic({{1.0, 1.0}})) == 1.0);
  CHECK(wasserstein1(EmpiricalLaw({-0.7, 0.3, 0.3, 1.3}), mu3()) == doctest::Approx(0.3));
  // uniform[0,1] against a point mass at 0: integral of (1 - x) = 1/2
  CHECK(wasserstein1(EmpiricalLaw({0.0}), Measure::validate({{}, {{0.0, 1.0, 1.0}}, ""})) == doctest::Approx(0.5));
  // a crossing inside a segment: samples at 1/2 against uniform[0,1] gives 1/4
  CHECK(wasserstein1(EmpiricalLaw({0.5}), Measure::validate({{}, {{0.0, 1.0, 1.0}}, ""})) == doctest::Approx(0.25));
}

TEST_CASE("mean estimate and correlation") {
  const auto e = estimate_mean({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == 2.5);
  CHECK(e.std_error == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(correlation({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}) == doctest::Approx(1.0));
  CHECK(correlation({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(estimate_mean({}), Error);
}
