#pragma once

#include <array>
#include <cstdint>

namespace demux {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Every draw is a pure function of (key, counter), so any pulse can be
/// simulated independently of every other one.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) : key_(key) {}
  explicit constexpr Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] Counter operator()(Counter ctr) const;

 private:
  Key key_;
};

/// Labels for the independent random draws made for one pump pulse.
enum class DrawPurpose : std::uint32_t {
  emission = 0,
  // photon i uses route(i), transmit(i), detect(i)
  photon_base = 1,
  dark_count_base = 64,
};

/// Uniform doubles in [0, 1) addressed by (pulse index, purpose).
class PulseRandom {
 public:
  explicit constexpr PulseRandom(std::uint64_t seed) : philox_(seed) {}

  [[nodiscard]] double uniform(std::uint64_t pulse, std::uint32_t purpose) const;

  [[nodiscard]] static constexpr std::uint32_t route(unsigned photon) {
    return static_cast<std::uint32_t>(DrawPurpose::photon_base) + 3 * photon;
  }
  [[nodiscard]] static constexpr std::uint32_t transmit(unsigned photon) {
    return route(photon) + 1;
  }
  [[nodiscard]] static constexpr std::uint32_t detect(unsigned photon) {
    return route(photon) + 2;
  }
  [[nodiscard]] static constexpr std::uint32_t dark_count(std::uint32_t channel) {
    return static_cast<std::uint32_t>(DrawPurpose::dark_count_base) + channel;
  }

 private:
  Philox4x32 philox_;
};

}  // namespace demux
