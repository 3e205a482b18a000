#include <doctest.h>

#include <cmath>
#include <sstream>

#include "expembed/error.hpp"
#include "expembed/finance.hpp"
#include "expembed/stats.hpp"

using namespace expembed;

namespace {

Measure mu3() { return Measure::atomic({{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}}); }

}  // namespace

TEST_CASE("pricing at maturity") {
  CHECK(price_at_maturity(mu3(), 0.0) == 0.25);
  CHECK(price_at_maturity(mu3(), -3.0) == doctest::Approx(3.0));
  CHECK(price_at_maturity(mu3(), 2.0) == 0.0);
  const Measure u = Measure::validate({{{0.5, 0.2}}, {{-1.0, 1.0, 0.4}}, ""});
  for (double k = -2.0; k <= 2.0; k += 0.13)
    CHECK(std::abs(price_at_maturity(u, k) - put_at_maturity(u, k) - (u.mean() - k)) < 1e-12);
}

TEST_CASE("implied measure round trip") {
  // strikes extending one gap beyond the support
  const Measure shifted = Measure::atomic({{99.0, 0.25}, {100.0, 0.5}, {101.0, 0.25}});
  const OptionChain chain = make_chain(shifted, {98.0, 99.0, 100.0, 101.0, 102.0}, 0.5);
  CHECK(tv_atomic(implied_measure(chain), shifted) < 1e-10);

  const OptionChain c3 = make_chain(mu3(), {-2.0, -1.0, 0.0, 1.0, 2.0}, 1.0);
  CHECK(tv_atomic(implied_measure(c3), mu3()) < 1e-10);
}

TEST_CASE("linear prices give a two-point law") {
  OptionChain chain{1.0, 0.0, {{-1.0, 1.0}, {0.0, 0.5}, {1.0, 0.0}}};
  // slope -1/2 on both gaps: no interior mass; tails at -2 and 2
  const Measure m = implied_measure(chain);
  REQUIRE(m.atoms().size() == 2);
  CHECK(m.atom_mass(-2.0) == doctest::Approx(0.5));
  CHECK(m.atom_mass(2.0) == doctest::Approx(0.5));
}

TEST_CASE("arbitrage violations") {
  OptionChain chain = make_chain(mu3(), {-2.0, -1.0, 0.0, 1.0, 2.0}, 1.0);
  chain.quotes[2].price += 0.3;
  try {
    implied_measure(chain);
    FAIL("expected a violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ArbitrageViolation);
    CHECK(std::string(e.what()).find("strike") != std::string::npos);
  }
  OptionChain small{1.0, 0.0, {{0.0, 0.2}, {1.0, 0.0}}};
  CHECK_THROWS_AS(implied_measure(small), Error);
}

TEST_CASE("gamma clock") {
  const GammaClock clock{2.0};
  CHECK(clock.shape(1.0) == 0.5);
  auto eng = rng::make_engine(1, rng::Stream::Test, 0);
  std::vector<double> g(20000);
  for (auto& v : g) v = clock.sample({0.5, 1.0, 2.0}, eng).back();
  CHECK(ks_distance(EmpiricalLaw(g), [](double t) { return t <= 0 ? 0.0 : -std::expm1(-t); }) < 0.02);
  CHECK(clock.sample({0.0}, eng).front() == 0.0);
}

TEST_CASE("price paths") {
  const GammaClock clock{1.0};
  const auto path = simulate_price_path(mu3(), clock, {0.0, 0.5, 1.0}, 3);
  CHECK(path.front() == 0.0);
  for (double s : path) CHECK((s == -1.0 || s == 0.0 || s == 1.0));

  const std::size_t n = 50000;
  const auto st = simulate_terminal_prices(mu3(), clock, n, 4, Execution::Parallel);
  for (double k : {-0.5, 0.0, 0.5}) {
    std::vector<double> pay(n);
    for (std::size_t i = 0; i < n; ++i) pay[i] = std::max(st[i] - k, 0.0);
    const auto e = estimate_mean(pay);
    CHECK(std::abs(e.mean - price_at_maturity(mu3(), k)) < 3.0 * e.std_error);
  }
  const auto mid = estimate_mean(simulate_terminal_prices(mu3(), GammaClock{2.0}, n, 5, Execution::Parallel));
  CHECK(std::abs(mid.mean) < 3.0 * mid.std_error);
  CHECK(simulate_terminal_prices(mu3(), clock, 200, 4, Execution::Serial) ==
        simulate_terminal_prices(mu3(), clock, 200, 4, Execution::Parallel));
}

TEST_CASE("option csv round trip") {
  std::istringstream in("# quotes\nt_star,forward\n1,0\nstrike,price\n-2,2\n-1,1\n0,0.25\n1,0\n2,0\n");
  const OptionChain chain = read_option_csv(in);
  CHECK(chain.t_star == 1.0);
  REQUIRE(chain.quotes.size() == 5);
  CHECK(chain.quotes[2].price == 0.25);
  std::ostringstream os;
  write_price_csv(os, chain, {2.0, 1.0, 0.25, 0.0, 0.0});
  CHECK(os.str().rfind("strike,input_price,repriced,abs_err\n-2,2,2,0\n", 0) == 0);
  std::istringstream bad("t_star,forward\n1,0\nstrike,price\n1;2\n");
  CHECK_THROWS_AS(read_option_csv(bad), Error);
}
