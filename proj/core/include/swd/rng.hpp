#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace swd {

/// Identifies a reproducible random stream: a 64-bit master seed plus a
/// hierarchical stream name. Two seeds with equal (master, stream) produce
/// identical draws.
struct Seed {
  std::uint64_t master = 0;
  std::string stream;

  /// Child stream "<stream>/<name>".
  [[nodiscard]] Seed derive(std::string_view name) const;
  [[nodiscard]] Seed derive(std::string_view name, std::uint64_t index) const;

  /// 128-bit key used to initialise the counter-based generator.
  [[nodiscard]] std::array<std::uint32_t, 2> key() const;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Philox4x32-10 counter-based generator with a 64-bit key.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;

  Philox4x32() = default;
  explicit Philox4x32(std::array<std::uint32_t, 2> key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  result_type operator()();

  /// Raw block function; exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key);

 private:
  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
};

/// Platform-independent sampling on top of Philox. The standard library
/// distributions are implementation-defined, so none of them are used here.
class RandomStream {
 public:
  explicit RandomStream(const Seed& seed) : engine_(seed.key()) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n); unbiased (Lemire's method).
  std::uint64_t below(std::uint64_t n);

 private:
  Philox4x32 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Seed from the operating system entropy source; used when the user does
/// not supply one (the value is always reported back).
std::uint64_t random_master_seed();

}  // namespace swd
