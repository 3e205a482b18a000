#include <doctest.h>

#include <cmath>
#include <random>

#include "expembed/error.hpp"
#include "expembed/measure.hpp"
#include "oracles.hpp"

using namespace expembed;

namespace {

Measure mu3() { return Measure::atomic({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}}); }
Measure uniform() { return Measure::validate({{}, {{-1.0, 1.0, 0.5}}, "uniform"}); }

ErrorCode code_of(const RawMeasure& raw) {
  try {
    Measure::validate(raw);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("validation normalises and rejects bad input") {
  const Measure two = Measure::atomic({{1.0, 0.5}, {-1.0, 0.5}});
  CHECK(two.mean() == 0.0);
  CHECK(two.lower().value == -1.0);
  CHECK(two.upper().value == 1.0);
  CHECK(two.atoms().front().x == -1.0);
  CHECK(mu3().mean() == 0.0);

  CHECK(code_of({{{0.0, 0.5}}, {}, ""}) == ErrorCode::NonUnitMass);
  CHECK(code_of({}) == ErrorCode::EmptyMeasure);
  CHECK(code_of({{{0.0, 1.5}, {1.0, -0.5}}, {}, ""}) == ErrorCode::InvalidMeasure);
  CHECK(code_of({{}, {{0.0, 1.0, 0.5}, {0.5, 1.5, 0.5}}, ""}) == ErrorCode::InvalidMeasure);
  CHECK(code_of({{{INFINITY, 1.0}}, {}, ""}) == ErrorCode::NonFiniteMean);

  const Measure merged = Measure::atomic({{0.0, 0.25}, {0.0, 0.25}, {1.0, 0.25}, {-1.0, 0.25}});
  CHECK(merged.atoms().size() == 3);
  CHECK(merged.atom_mass(0.0) == doctest::Approx(0.5));

  const Measure dropped = Measure::atomic({{0.0, 1.0}, {3.0, 0.0}});
  CHECK(dropped.atoms().size() == 1);
}

TEST_CASE("cdf and one-sided limits") {
  const Measure m = mu3();
  CHECK(m.cdf(-1.0) == 0.25);
  CHECK(m.cdf_left(-1.0) == 0.0);
  CHECK(m.cdf(0.0) == 0.75);
  CHECK(m.cdf_left(0.0) == 0.25);
  const Measure u = uniform();
  CHECK(u.cdf(0.5) == doctest::Approx(0.75));
  CHECK(u.density(0.0) == 0.5);
  CHECK(u.density(2.0) == 0.0);
}

TEST_CASE("potential and excess potential on the worked examples") {
  const PotentialProfile p3(mu3());
  CHECK(p3.potential(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p3.excess_potential(0.5) == doctest::Approx(0.25).epsilon(1e-15));

  const PotentialProfile pu(uniform());
  for (double x : {-1.0, -0.7, 0.0, 0.3, 1.0}) {
    CHECK(pu.potential(x) == doctest::Approx((1.0 + x * x) / 2.0).epsilon(1e-14));
    CHECK(pu.excess_potential(x) == doctest::Approx((1.0 - std::abs(x)) * (1.0 - std::abs(x)) / 2.0).epsilon(1e-14));
  }
  CHECK(pu.excess_potential(1.5) == 0.0);

  const Measure lap = Measure::validate(oracle::laplace(16000));
  CHECK(PotentialProfile(lap).potential(0.0) == doctest::Approx(1.0).epsilon(1e-4));

  const PotentialProfile point(Measure::atomic({{2.0, 1.0}}));
  CHECK(point.excess_potential(2.0) == 0.0);
}

TEST_CASE("property: table potential equals direct summation") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> xs(-7.0, 7.0);
  for (int trial = 0; trial < 100; ++trial) {
    const RawMeasure raw = trial % 2 ? oracle::random_atomic(g, 1 + trial % 50) : oracle::random_mixed(g);
    const Measure mu = Measure::validate(raw);
    const PotentialProfile prof(mu);
    const double x0 = mu.mean();
    CHECK(x0 == doctest::Approx(oracle::mean(raw)).epsilon(1e-12));
    for (int k = 0; k < 40; ++k) {
      const double x = xs(g);
      const double u = prof.potential(x);
      CHECK(std::abs(u - oracle::potential(raw, x)) < 1e-12);
      CHECK(std::abs(u - potential_direct(mu, x)) < 1e-12);
      CHECK(prof.excess_potential(x) >= 0.0);
      CHECK(u >= std::abs(x - x0) - 1e-12);
      const double h = 0.01;
      CHECK(u <= 0.5 * (prof.potential(x - h) + prof.potential(x + h)) + 1e-12);
    }
    CHECK(prof.excess_potential(mu.lower().value) == 0.0);
    CHECK(prof.excess_potential(mu.upper().value) == 0.0);
  }
}

TEST_CASE("property: slope jumps at atoms equal twice the mass") {
  std::mt19937_64 g(11);
  for (int trial = 0; trial < 50; ++trial) {
    const RawMeasure raw = oracle::random_atomic(g, 2 + trial % 30);
    const Measure mu = Measure::validate(raw);
    const PotentialProfile prof(mu);
    for (const auto& a : mu.atoms()) {
      // finite differences on the adjacent linear pieces
      const double e = 1e-4;
      const double right = (prof.potential(a.x + 2 * e) - prof.potential(a.x + e)) / e;
      const double left = (prof.potential(a.x - e) - prof.potential(a.x - 2 * e)) / e;
      CHECK(std::abs((right - left) - 2.0 * a.p) < 1e-8);
      CHECK(std::abs((prof.slope_right(a.x) - prof.slope_left(a.x)) - 2.0 * a.p) < 1e-12);
    }
  }
}

TEST_CASE("truncation") {
  const PotentialProfile p3(mu3());
  const Truncation t3 = truncate_measure_detailed(p3, 5.0);
  CHECK_FALSE(t3.truncated_left);
  CHECK_FALSE(t3.truncated_right);
  CHECK(t3.measure.atoms().size() == 3);

  const Measure lap = Measure::validate(oracle::laplace(8000));
  const PotentialProfile pl(lap);
  const Truncation t = truncate_measure_detailed(pl, 10.0);
  REQUIRE(t.truncated_left);
  REQUIRE(t.truncated_right);
  CHECK(t.q_lower == doctest::Approx(-t.q_upper).epsilon(1e-9));
  CHECK(t.measure.atom_mass(-10.0) == doctest::Approx(t.measure.atom_mass(10.0)).epsilon(1e-9));
  CHECK(t.measure.lower().value == -10.0);
  CHECK(t.measure.upper().value == 10.0);
  CHECK(std::abs(t.measure.mean() - lap.mean()) < 1e-9);
  const PotentialProfile pm(t.measure);
  for (int i = 1; i <= 5; ++i) {
    const double x = t.q_lower + (t.q_upper - t.q_lower) * i / 6.0;
    CHECK(std::abs(pm.potential(x) - pl.potential(x)) < 1e-8);
  }
  for (double x = -20.0; x <= 20.0; x += 0.37) CHECK(pm.potential(x) <= pl.potential(x) + 1e-12);
  double mass = 0.0;
  for (const auto& a : t.measure.atoms()) mass += a.p;
  for (const auto& s : t.measure.segments()) mass += s.density * (s.right - s.left);
  CHECK(std::abs(mass - 1.0) < 1e-9);
}

TEST_CASE("vhat ratio") {
  const PotentialProfile p3(mu3());
  CHECK(vhat_ratio(p3, 2.0, 0.0) == doctest::Approx(0.75));
  CHECK(vhat_ratio(p3, 2.0, 1.0) == doctest::Approx(1.0));
  for (double a = -1.9; a < 1.9; a += 0.1) CHECK(vhat_ratio(p3, 2.0, a) <= 1.0 + 1e-15);
  CHECK_THROWS_AS(vhat_ratio(p3, 2.0, 2.0), Error);
}

TEST_CASE("recentre shifts the mean to zero") {
  const Measure m = Measure::atomic({{1.0, 1.0 / 3}, {2.0, 1.0 / 3}, {4.0, 1.0 / 3}});
  const Measure c = Measure::validate(recentre(m));
  CHECK(std::abs(c.mean()) < 1e-14);
}
