#include "expembed/rng.hpp"

#include <cmath>

namespace expembed::rng {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t path) noexcept {
  const std::uint64_t s = splitmix64(splitmix64(root) ^ static_cast<std::uint64_t>(stream));
  return splitmix64(s ^ path);
}

Engine make_engine(std::uint64_t root, Stream stream, std::uint64_t path) {
  return Engine(derive_seed(root, stream, path));
}

double exponential(Engine& eng, double rate) { return -std::log(uniform_left_open(eng)) / rate; }

double standard_normal(Engine& eng) {
  // Marsaglia polar method; the spare variate is discarded so each call
  // consumes engine output independently of call history.
  double u, v, s;
  do {
    u = 2.0 * uniform01(eng) - 1.0;
    v = 2.0 * uniform01(eng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double Gaussian::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01(eng_) - 1.0;
    v = 2.0 * uniform01(eng_) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double gamma(Engine& eng, double shape, double scale) {
  std::gamma_distribution<double> dist(shape, scale);
  return dist(eng);
}

}  // namespace expembed::rng
