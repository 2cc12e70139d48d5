#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace serw {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A block of four 32-bit words is a pure function of a 128-bit counter and a
/// 64-bit key, so any walker can jump to any step without touching shared
/// state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Top 53 bits of a 64-bit word mapped to [0, 1).
constexpr double to_unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// The two uniforms consumed by one walk step: one for the move, one for the
/// perturbation variate xi_n (ignored by deterministic models).
struct StepDraw {
  double move = 0.0;
  double xi = 0.0;
};

/// Keyed by the master seed; a (stream, counter) pair addresses one block.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr StepDraw draw(std::uint64_t stream, std::uint64_t counter) const noexcept {
    const auto block = Philox4x32::generate(
        {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
         static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)},
        key_);
    const std::uint64_t w0 = (std::uint64_t{block[1]} << 32) | block[0];
    const std::uint64_t w1 = (std::uint64_t{block[3]} << 32) | block[2];
    return {to_unit_interval(w0), to_unit_interval(w1)};
  }

  constexpr const Philox4x32::Key& key() const noexcept { return key_; }

 private:
  Philox4x32::Key key_;
};

/// Sequential view of one stream: step n of walker w always reads block
/// (w, n), whatever else is running.
class WalkerStream {
 public:
  constexpr WalkerStream(std::uint64_t seed, std::uint64_t stream,
                         std::uint64_t counter = 0) noexcept
      : rng_(seed), stream_(stream), counter_(counter) {}

  constexpr StepDraw next_draw() noexcept { return rng_.draw(stream_, counter_++); }
  constexpr double uniform() noexcept { return next_draw().move; }
  constexpr std::uint64_t position() const noexcept { return counter_; }

 private:
  CounterRng rng_;
  std::uint64_t stream_;
  std::uint64_t counter_;
};

/// draw(stream, first + i) for i < count, split into the two uniforms.
/// Uses AVX-512 or AVX2 when the CPU has them; the values are identical to
/// the scalar path.
void fill_uniforms(const CounterRng& rng, std::uint64_t stream, std::uint64_t first,
                   std::size_t count, double* move, double* xi);

/// Scalar reference for fill_uniforms.
void fill_uniforms_portable(const CounterRng& rng, std::uint64_t stream, std::uint64_t first,
                            std::size_t count, double* move, double* xi);

/// WalkerStream that generates draws in batches of kBatch.
class BufferedWalkerStream {
 public:
  static constexpr std::size_t kBatch = 256;

  BufferedWalkerStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : rng_(seed), stream_(stream) {}

  StepDraw next_draw() noexcept {
    if (pos_ == kBatch) refill();
    const StepDraw d{move_[pos_], xi_[pos_]};
    ++pos_;
    return d;
  }
  double uniform() noexcept { return next_draw().move; }
  std::uint64_t position() const noexcept { return next_counter_ - (kBatch - pos_); }

 private:
  void refill() noexcept {
    fill_uniforms(rng_, stream_, next_counter_, kBatch, move_.data(), xi_.data());
    next_counter_ += kBatch;
    pos_ = 0;
  }

  CounterRng rng_;
  std::uint64_t stream_;
  std::uint64_t next_counter_ = 0;
  std::size_t pos_ = kBatch;
  std::array<double, kBatch> move_{};
  std::array<double, kBatch> xi_{};
};

}  // namespace serw
