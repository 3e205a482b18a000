#include <doctest.h>

#include <cmath>
#include <set>

#include "expembed/rng.hpp"
#include "expembed/stats.hpp"

using namespace expembed;

TEST_CASE("seed derivation is deterministic and separates streams") {
  CHECK(rng::derive_seed(1, rng::Stream::Chain, 0) == rng::derive_seed(1, rng::Stream::Chain, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t root : {0ULL, 1ULL, 2ULL})
    for (auto s : {rng::Stream::Chain, rng::Stream::Sde, rng::Stream::Poisson})
      for (std::uint64_t p = 0; p < 100; ++p) seen.insert(rng::derive_seed(root, s, p));
  CHECK(seen.size() == 900);
  auto a = rng::make_engine(5, rng::Stream::Test, 3), b = rng::make_engine(5, rng::Stream::Test, 3);
  CHECK(a() == b());
}

TEST_CASE("variates") {
  auto eng = rng::make_engine(1, rng::Stream::Test, 0);
  std::vector<double> e(50000), n(50000), u(50000);
  rng::Gaussian gauss(eng);
  for (std::size_t i = 0; i < e.size(); ++i) {
    e[i] = rng::exponential(eng, 2.0);
    n[i] = gauss.next();
    u[i] = rng::uniform_left_open(eng);
    CHECK(u[i] > 0.0);
    CHECK(u[i] <= 1.0);
  }
  CHECK(ks_distance(EmpiricalLaw(e), [](double t) { return t <= 0 ? 0.0 : -std::expm1(-2.0 * t); }) < 0.01);
  CHECK(ks_distance(EmpiricalLaw(n), [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }) < 0.01);
  CHECK(std::abs(rng::standard_normal(eng)) < 10.0);

  rng::CoinFlips coin(eng);
  int heads = 0;
  for (int i = 0; i < 100000; ++i) heads += coin.next();
  CHECK(std::abs(heads - 50000) < 5.0 * std::sqrt(25000.0));
}
