#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace sqf {

/// Philox4x32-10 counter-based generator.
///
/// The 64-bit key is the experiment seed (xor'ed with the trial index for
/// per-trial streams); the 128-bit counter is split into a 64-bit stream id
/// and a 64-bit block index. Every output is a pure function of
/// (key, stream, index), so results do not depend on thread scheduling or on
/// the standard library's distribution implementations.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t key = 0, std::uint64_t stream = 0) noexcept
      : key_(key), stream_(stream) {}

  /// Generator for trial `trial` of an experiment seeded with `seed`.
  static Philox for_trial(std::uint64_t seed, std::uint64_t trial) noexcept {
    return Philox(seed ^ trial);
  }

  /// Independent substream sharing this generator's key.
  [[nodiscard]] Philox substream(std::uint64_t stream) const noexcept {
    return Philox(key_, stream);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    if (have_ == 0) {
      refill();
    }
    return buffer_[--have_];
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  void refill() noexcept {
    std::array<std::uint32_t, 4> c = {
        static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = static_cast<std::uint32_t>(key_);
    std::uint32_t k1 = static_cast<std::uint32_t>(key_ >> 32);
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
      k0 += kW0;
      k1 += kW1;
    }
    ++index_;
    // Consumed from the back; element order is fixed so streams are reproducible.
    buffer_[1] = (std::uint64_t{c[1]} << 32) | c[0];
    buffer_[0] = (std::uint64_t{c[3]} << 32) | c[2];
    have_ = 2;
  }

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int have_ = 0;
};

/// Uniform double in [0, 1) with 53 random bits.
template <class Rng>
double uniform_real(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Lemire's multiply-and-reject; n must be > 0.
template <class Rng>
std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(rng()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Poisson variate. Inversion for small means, Hormann's PTRS otherwise.
template <class Rng>
std::uint64_t sample_poisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) {
    return 0;
  }
  if (mean < 10.0) {
    const double u = uniform_real(rng);
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t x = 0;
    while (u >= cdf) {
      ++x;
      p *= mean / static_cast<double>(x);
      const double next = cdf + p;
      if (next == cdf) {
        break;  // remaining mass below double resolution
      }
      cdf = next;
    }
    return x;
  }
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform_real(rng) - 0.5;
    const double v = uniform_real(rng);
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) {
      return static_cast<std::uint64_t>(k);
    }
    if (k < 0.0 || (us < 0.013 && v > us)) {
      continue;
    }
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

/// `count` distinct values from [0, n), sorted ascending (Floyd's algorithm).
template <class Rng>
std::vector<std::uint32_t> sample_distinct(Rng& rng, std::uint32_t n, std::uint32_t count) {
  std::vector<std::uint32_t> out;
  out.reserve(count);
  if (count == 0) {
    return out;
  }
  if (count <= 64) {
    for (std::uint32_t j = n - count; j < n; ++j) {
      const auto t = static_cast<std::uint32_t>(uniform_below(rng, std::uint64_t{j} + 1));
      bool seen = false;
      for (auto v : out) {
        if (v == t) {
          seen = true;
          break;
        }
      }
      out.push_back(seen ? j : t);
    }
  } else {
    std::vector<bool> taken(n, false);
    for (std::uint32_t j = n - count; j < n; ++j) {
      const auto t = static_cast<std::uint32_t>(uniform_below(rng, std::uint64_t{j} + 1));
      const std::uint32_t pick = taken[t] ? j : t;
      taken[pick] = true;
      out.push_back(pick);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace sqf
