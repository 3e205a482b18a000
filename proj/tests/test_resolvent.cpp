#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "expembed/chain.hpp"
#include "expembed/error.hpp"
#include "expembed/resolvent.hpp"
#include "oracles.hpp"

using namespace expembed;

namespace {

struct Model {
  std::shared_ptr<const PotentialProfile> profile;
  SpeedMeasure sm;
};

Model model(RawMeasure raw) {
  auto p = std::make_shared<const PotentialProfile>(Measure::validate(std::move(raw)));
  return {p, build_speed_measure(p)};
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 1; i < n; ++i) g.push_back(lo + (hi - lo) * i / n);
  return g;
}

SpeedMeasure delta0() {
  return SpeedMeasure::from_parts(0.0, -1.0, 1.0, {{0.0, 1.0, false}, {-1.0, 0.0, true}, {1.0, 0.0, true}}, {});
}

}  // namespace

TEST_CASE("unit atom at the origin") {
  const EigenSolution s = solve_eigenfunctions(delta0(), 1.0);
  for (double x : {0.0, 0.25, 0.5, 0.9}) {
    CHECK(s.phi(x) == doctest::Approx(1.0 + 2.0 * x).epsilon(1e-15));
    CHECK(s.u_plus(x) == doctest::Approx(1.0 - x).epsilon(1e-15));
  }
  for (double x : {-0.9, -0.5, -0.1}) {
    CHECK(s.phi(x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.u_minus(x) == doctest::Approx(1.0 + x).epsilon(1e-15));
  }
  for (double x : {-0.7, 0.0, 0.3}) CHECK(s.psi(x) == doctest::Approx(x).epsilon(1e-15));
  CHECK(s.h_plus == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s.h_minus == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.h == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(green_function(s, 0.0, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(green_function(s, 0.5, 0.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK_THROWS_AS(green_function(s, 1.0, 0.0), Error);
}

TEST_CASE("massless string") {
  const SpeedMeasure sm = SpeedMeasure::from_parts(0.0, -1.0, 1.0, {{-1.0, 0.0, true}, {1.0, 0.0, true}}, {});
  const EigenSolution s = solve_eigenfunctions(sm, 1.0);
  CHECK(s.phi(0.6) == 1.0);
  CHECK(s.psi(0.6) == doctest::Approx(0.6));
  CHECK(s.h_plus == 1.0);
  CHECK(s.h_minus == 1.0);
  CHECK(s.h == 0.5);

  const Model two = model({{{-1.0, 0.5}, {1.0, 0.5}}, {}, ""});
  const IdentityReport rep = check_main_identity(*two.profile, two.sm, grid(-1.0, 1.0, 40));
  CHECK(rep.max_abs_error < 1e-15);
  for (const auto& r : rep.rows) CHECK(r.g1 == doctest::Approx(0.5 * (1.0 - std::abs(r.x))));
  REQUIRE(rep.derivative_jump.has_value());
  CHECK(*rep.derivative_jump == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("identity and invariants on random atomic measures") {
  std::mt19937_64 g(99);
  for (int trial = 0; trial < 60; ++trial) {
    const Model m = model(oracle::random_atomic(g, 2 + trial % 40));
    const Measure& mu = m.profile->measure();
    for (double lambda : {1.0, 0.3, 4.0}) {
      const EigenSolution s = solve_eigenfunctions(m.sm, lambda);
      CHECK(std::abs(s.h * (1.0 / s.h_plus + 1.0 / s.h_minus) - 1.0) < 1e-14);
      CHECK(std::abs(s.h_plus - s.h_plus_integral) < 1e-10 * std::max(1.0, s.h_plus));
      CHECK(std::abs(s.h_minus - s.h_minus_integral) < 1e-10 * std::max(1.0, s.h_minus));
      CHECK(s.u_plus(s.origin) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(s.u_minus(s.origin) == doctest::Approx(1.0).epsilon(1e-14));
      // u+- are differences of phi and psi terms, so rounding scales with those terms
      CHECK(std::abs(s.u_plus(s.upper)) < 1e-12 * std::max(1.0, std::abs(s.phi(s.upper))));
      CHECK(std::abs(s.u_minus(s.lower)) < 1e-12 * std::max(1.0, std::abs(s.phi(s.lower))));
      for (std::size_t i = 1; i < s.u_plus.values.size(); ++i) {
        CHECK(s.u_plus.values[i] <= s.u_plus.values[i - 1] + 1e-14);
        CHECK(s.u_minus.values[i] >= s.u_minus.values[i - 1] - 1e-14);
      }
      // f'' = 2 lambda f m at every finite atom, for phi and u+
      for (std::size_t k = 0; k < s.atom_x.size(); ++k) {
        const double a = s.atom_x[k];
        const double w = 2.0 * lambda * s.atom_weight[k];
        if (a != s.origin) {
          const double jphi = s.phi.slope_right(a) - s.phi.slope_left(a);
          CHECK(std::abs(jphi - w * s.phi(a)) < 1e-12 * std::max(1.0, std::abs(jphi)));
        }
        const double ju = s.u_plus.slope_right(a) - s.u_plus.slope_left(a);
        const double scale = std::abs(s.phi.slope_right(a) - s.phi.slope_left(a)) +
                             std::abs((s.psi.slope_right(a) - s.psi.slope_left(a)) / s.h_plus);
        CHECK(std::abs(ju - w * s.u_plus(a)) < 1e-12 * std::max(1.0, scale));
      }
    }
    const auto pts = grid(mu.lower().value, mu.upper().value, 97);
    const IdentityReport rep = check_main_identity(*m.profile, m.sm, pts);
    CHECK(rep.max_abs_error < 1e-10);
    const EigenSolution s = solve_eigenfunctions(m.sm, 1.0);
    for (int k = 0; k < 20; ++k) {
      const double x = pts[static_cast<std::size_t>(k * 4)], y = pts[static_cast<std::size_t>(95 - k * 3)];
      CHECK(green_function(s, x, y) == green_function(s, y, x));
    }

    // P(X_T = a) = 2 g_1(x0, a) m({a}) at interior atoms
    const BirthDeathChain chain = build_chain(m.sm, mu);
    const auto law = exact_law_masses(chain, chain.index_of(m.sm.origin()), 1.0);
    for (std::size_t k = 0; k < s.atom_x.size(); ++k) {
      const double a = s.atom_x[k];
      CHECK(std::abs(law[chain.index_of(a)] - 2.0 * green_function(s, s.origin, a) * s.atom_weight[k]) < 1e-8);
    }
  }
}

TEST_CASE("derivative jump without an atom at the origin") {
  const Model m = model({{{-2.0, 0.2}, {-0.5, 0.3}, {0.7, 0.3}, {1.5, 0.2}}, {}, ""});
  REQUIRE(m.profile->measure().atom_mass(m.sm.origin()) == 0.0);
  const IdentityReport rep = check_main_identity(*m.profile, m.sm, grid(-2.0, 1.5, 50));
  REQUIRE(rep.derivative_jump.has_value());
  CHECK(*rep.derivative_jump == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("atomized uniform converges under refinement") {
  const Model m = model({{}, {{-1.0, 1.0, 0.5}}, ""});
  const auto pts = grid(-1.0, 1.0, 101);
  double prev = INFINITY;
  for (std::size_t cells : {32, 64, 128, 256, 512}) {
    const IdentityReport rep = check_main_identity(*m.profile, atomize(m.sm, cells), pts);
    CHECK(rep.max_abs_error < prev);
    prev = rep.max_abs_error;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("errors") {
  const Model m = model({{}, {{-1.0, 1.0, 0.5}}, ""});
  CHECK_THROWS_AS(solve_eigenfunctions(m.sm, 1.0), Error);
  CHECK_THROWS_AS(solve_eigenfunctions(delta0(), 0.0), Error);
  CHECK_THROWS_AS(atomize(m.sm, 0), Error);
}

TEST_CASE("identity csv") {
  IdentityReport rep;
  rep.rows.push_back({0.5, 0.125, 0.125, 0.0});
  std::ostringstream os;
  write_identity_csv(os, rep);
  CHECK(os.str() == "x,g1_x_0,half_U,abs_err\n0.5,0.125,0.125,0\n");
}
