#ifndef CBO_RNG_HPP
#define CBO_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

// Counter-based random numbers (Philox4x64-10, Salmon et al. 2011).
// Every draw is a pure function of (seed, stream, two context indices, block),
// so results do not depend on evaluation order or thread count.

namespace cbo::rng {

// Distinct sub-streams so, e.g., batch selection never perturbs particle noise.
enum class Stream : std::uint64_t {
  ParticleNoise = 1,
  Init = 2,
  AgentBatch = 3,
  DataShuffle = 4,
  Reduction = 5,
  Probe = 6,
  Misc = 7,
};

using Block = std::array<std::uint64_t, 4>;

namespace detail {

inline constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
inline constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
inline constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

inline Block philox_round(const Block& c, std::uint64_t k0, std::uint64_t k1) {
  std::uint64_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, c[0], hi0, lo0);
  mulhilo(kPhiloxM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace detail

// 10-round Philox4x64 block function; matches the reference implementation
// (numpy's bit generator of the same name).
inline Block philox4x64(Block counter, std::uint64_t key0, std::uint64_t key1) {
  for (int round = 0; round < 9; ++round) {
    counter = detail::philox_round(counter, key0, key1);
    key0 += detail::kWeyl0;
    key1 += detail::kWeyl1;
  }
  return detail::philox_round(counter, key0, key1);
}

// Uniform double in [0, 1) from the top 53 bits.
inline double u01(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1]; safe as a log argument.
inline double u01_open(std::uint64_t bits) {
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Sequential draws from the keyed stream (seed, stream, a, b). The block
// counter advances internally; two streams with different keys never collide.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0)
      : key0_(seed), key1_(static_cast<std::uint64_t>(stream)), a_(a), b_(b) {}

  std::uint64_t next_u64() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  double next_u01() { return u01(next_u64()); }

  // Box-Muller pair; the spare value is returned on the following call.
  double next_gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = u01_open(next_u64());
    const double u2 = u01(next_u64());
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
  }

  // Uniform integer in [0, n). Modulo bias is ~n/2^64, irrelevant here.
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  void refill() {
    buf_ = philox4x64({block_++, a_, b_, 0}, key0_, key1_);
    pos_ = 0;
  }

  std::uint64_t key0_, key1_, a_, b_;
  std::uint64_t block_ = 0;
  Block buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Fills out with i.i.d. standard normals for context (a, b) = e.g. (step, particle).
inline void fill_gaussian(std::span<double> out, std::uint64_t seed, Stream stream,
                          std::uint64_t a, std::uint64_t b) {
  CounterStream cs(seed, stream, a, b);
  for (double& x : out) x = cs.next_gauss();
}

}  // namespace cbo::rng

#endif
