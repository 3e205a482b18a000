#pragma once

#include <cstdint>
#include <random>

namespace expembed::rng {

using Engine = std::mt19937_64;

// Independent sub-streams per experiment. Part of the seed-derivation contract:
// changing a value changes every artifact produced by that experiment.
enum class Stream : std::uint64_t {
  Chain = 1,
  Sde = 2,
  TimeChange = 3,
  Poisson = 4,
  LocalTime = 5,
  Price = 6,
  Clock = 7,
  Holding = 8,
  Test = 99,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// seed(root, stream, path) = splitmix64(splitmix64(splitmix64(root) ^ stream) ^ path)
std::uint64_t derive_seed(std::uint64_t root, Stream stream, std::uint64_t path) noexcept;

Engine make_engine(std::uint64_t root, Stream stream, std::uint64_t path);

// [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

// (0, 1]
inline double uniform_left_open(Engine& eng) { return 1.0 - uniform01(eng); }

double exponential(Engine& eng, double rate);

double standard_normal(Engine& eng);

// Marsaglia polar pairs; keeps the spare variate. One per path.
class Gaussian {
 public:
  explicit Gaussian(Engine& eng) : eng_(eng) {}
  double next();

 private:
  Engine& eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double gamma(Engine& eng, double shape, double scale);

// Fair coin flips drawn 64 at a time.
class CoinFlips {
 public:
  explicit CoinFlips(Engine& eng) : eng_(eng) {}

  bool next() {
    if (left_ == 0) {
      word_ = eng_();
      left_ = 64;
    }
    const bool bit = word_ & 1U;
    word_ >>= 1;
    --left_;
    return bit;
  }

 private:
  Engine& eng_;
  std::uint64_t word_ = 0;
  int left_ = 0;
};

}  // namespace expembed::rng
