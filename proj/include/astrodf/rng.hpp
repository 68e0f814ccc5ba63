#pragma once

// MRG32k3a combined multiple recursive generator with keyed substreams.
//
// Every random draw in the library comes from a state produced by
// stream_for(), so any oracle replication can be replayed from its key and
// the master seed alone. Distinct keys are at least 2^76 steps apart.

#include <array>
#include <cstdint>

namespace astrodf::rng {

inline constexpr std::uint64_t kM1 = 4294967087ULL;
inline constexpr std::uint64_t kM2 = 4294944443ULL;

/// log2 of the spacing between consecutive streams and substreams.
inline constexpr unsigned kStreamJumpLog2 = 127;
inline constexpr unsigned kSubstreamJumpLog2 = 76;

struct RngState {
  std::array<std::uint64_t, 3> s1{12345, 12345, 12345};
  std::array<std::uint64_t, 3> s2{12345, 12345, 12345};

  /// Components inside [0, m-1] and neither component all-zero.
  bool valid() const noexcept;

  friend bool operator==(const RngState&, const RngState&) = default;
};

enum class Purpose : std::uint8_t {
  oracle = 0,
  tuning = 1,
  post_replication = 2,
  harness = 3,
};

inline constexpr std::uint64_t kPurposeCount = 4;

struct StreamKey {
  std::uint64_t macro_rep = 0;
  Purpose purpose = Purpose::oracle;
  std::uint64_t point_serial = 0;

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

using Matrix3 = std::array<std::array<std::uint64_t, 3>, 3>;

/// One-step transition matrix of component 1 or 2.
Matrix3 transition_matrix(int component);
/// Transition matrix raised to 2^e, by repeated squaring mod m.
Matrix3 transition_power_of_two(int component, unsigned e);
Matrix3 mat_mul(const Matrix3& a, const Matrix3& b, std::uint64_t m);
Matrix3 mat_pow(Matrix3 a, std::uint64_t n, std::uint64_t m);

/// Advance the state by exactly n steps.
RngState advance(const RngState& state, std::uint64_t n);
/// Advance the state by 2^e steps.
RngState jump_pow2(const RngState& state, unsigned e);

/// Uniform in the open interval (0,1); advances both recurrences one step.
double next_uniform(RngState& state) noexcept;

/// Standard normal quantile (Wichura AS241, relative accuracy ~1e-16).
/// p must lie in (0,1).
double normal_quantile(double p);

/// Normal variate by inversion; consumes exactly one uniform.
/// Throws ParameterError for negative variance.
double next_normal(RngState& state, double mean, double variance);

/// Exponential variate with the given mean by inversion; one uniform.
double next_exponential(RngState& state, double mean) noexcept;

/// Valid starting state derived from a 64-bit master seed.
RngState seed_state(std::uint64_t master_seed) noexcept;

/// Pure map from (key, seed) to a substream start state. Stream index is
/// macro_rep * kPurposeCount + purpose (spaced 2^127 apart), and
/// point_serial selects a 2^76-spaced substream within it.
RngState stream_for(const StreamKey& key, std::uint64_t master_seed);

}  // namespace astrodf::rng
