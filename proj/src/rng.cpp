#include "astrodf/rng.hpp"

#include <cmath>

#include "astrodf/errors.hpp"

namespace astrodf::rng {

namespace {

constexpr std::int64_t kA12 = 1403580;
constexpr std::int64_t kA13n = 810728;
constexpr std::int64_t kA21 = 527612;
constexpr std::int64_t kA23n = 1370589;
constexpr double kNorm = 1.0 / (static_cast<double>(kM1) + 1.0);

std::uint64_t modulus(int component) { return component == 1 ? kM1 : kM2; }

std::array<std::uint64_t, 3> mat_vec(const Matrix3& a, const std::array<std::uint64_t, 3>& v,
                                     std::uint64_t m) {
  std::array<std::uint64_t, 3> out{};
  for (int i = 0; i < 3; ++i) {
    unsigned __int128 acc = 0;
    for (int j = 0; j < 3; ++j) acc += static_cast<unsigned __int128>(a[i][j]) * v[j];
    out[i] = static_cast<std::uint64_t>(acc % m);
  }
  return out;
}

RngState apply(const Matrix3& a1, const Matrix3& a2, const RngState& s) {
  return RngState{mat_vec(a1, s.s1, kM1), mat_vec(a2, s.s2, kM2)};
}

struct JumpTables {
  Matrix3 stream1, stream2;
  Matrix3 sub1, sub2;
};

const JumpTables& jump_tables() {
  static const JumpTables tables{
      transition_power_of_two(1, kStreamJumpLog2), transition_power_of_two(2, kStreamJumpLog2),
      transition_power_of_two(1, kSubstreamJumpLog2), transition_power_of_two(2, kSubstreamJumpLog2)};
  return tables;
}

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

bool RngState::valid() const noexcept {
  bool nonzero1 = false, nonzero2 = false;
  for (int i = 0; i < 3; ++i) {
    if (s1[i] >= kM1 || s2[i] >= kM2) return false;
    nonzero1 |= s1[i] != 0;
    nonzero2 |= s2[i] != 0;
  }
  return nonzero1 && nonzero2;
}

Matrix3 transition_matrix(int component) {
  if (component == 1) {
    return Matrix3{{{0, 1, 0}, {0, 0, 1}, {kM1 - kA13n, kA12, 0}}};
  }
  return Matrix3{{{0, 1, 0}, {0, 0, 1}, {kM2 - kA23n, 0, kA21}}};
}

Matrix3 mat_mul(const Matrix3& a, const Matrix3& b, std::uint64_t m) {
  Matrix3 c{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      unsigned __int128 acc = 0;
      for (int k = 0; k < 3; ++k) acc += static_cast<unsigned __int128>(a[i][k]) * b[k][j];
      c[i][j] = static_cast<std::uint64_t>(acc % m);
    }
  }
  return c;
}

Matrix3 mat_pow(Matrix3 a, std::uint64_t n, std::uint64_t m) {
  Matrix3 result{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  while (n > 0) {
    if (n & 1U) result = mat_mul(result, a, m);
    a = mat_mul(a, a, m);
    n >>= 1U;
  }
  return result;
}

Matrix3 transition_power_of_two(int component, unsigned e) {
  const std::uint64_t m = modulus(component);
  Matrix3 a = transition_matrix(component);
  for (unsigned i = 0; i < e; ++i) a = mat_mul(a, a, m);
  return a;
}

RngState advance(const RngState& state, std::uint64_t n) {
  return apply(mat_pow(transition_matrix(1), n, kM1), mat_pow(transition_matrix(2), n, kM2), state);
}

RngState jump_pow2(const RngState& state, unsigned e) {
  return apply(transition_power_of_two(1, e), transition_power_of_two(2, e), state);
}

double next_uniform(RngState& state) noexcept {
  auto& a = state.s1;
  std::int64_t p1 = kA12 * static_cast<std::int64_t>(a[1]) - kA13n * static_cast<std::int64_t>(a[0]);
  p1 %= static_cast<std::int64_t>(kM1);
  if (p1 < 0) p1 += static_cast<std::int64_t>(kM1);
  a = {a[1], a[2], static_cast<std::uint64_t>(p1)};

  auto& b = state.s2;
  std::int64_t p2 = kA21 * static_cast<std::int64_t>(b[2]) - kA23n * static_cast<std::int64_t>(b[0]);
  p2 %= static_cast<std::int64_t>(kM2);
  if (p2 < 0) p2 += static_cast<std::int64_t>(kM2);
  b = {b[1], b[2], static_cast<std::uint64_t>(p2)};

  const std::int64_t diff = p1 > p2 ? p1 - p2 : p1 - p2 + static_cast<std::int64_t>(kM1);
  return static_cast<double>(diff) * kNorm;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("normal_quantile: p must lie in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        ((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
             6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
           1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
         1.3314166789178437745e+2) * r + 3.3871328727963666080e0;
    const double den =
        ((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
             3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
           5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
         4.2313330701600911252e+1) * r + 1.0;
    return q * num / den;
  }
  double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
             2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
           3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
         4.63033784615654529590e0) * r + 1.42343711074968357734e0;
    const double den =
        ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
             1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
           6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
         2.05319162663775882187e0) * r + 1.0;
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
             1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
           2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
         5.46378491116411436990e0) * r + 6.65790464350110377720e0;
    const double den =
        ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
             1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
           1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
         5.99832206555887937690e-1) * r + 1.0;
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

double next_normal(RngState& state, double mean, double variance) {
  if (variance < 0.0 || std::isnan(variance)) {
    throw ParameterError("next_normal: variance must be >= 0");
  }
  const double u = next_uniform(state);
  if (variance == 0.0) return mean;
  return mean + std::sqrt(variance) * normal_quantile(u);
}

double next_exponential(RngState& state, double mean) noexcept {
  return -mean * std::log(next_uniform(state));
}

RngState seed_state(std::uint64_t master_seed) noexcept {
  std::uint64_t x = master_seed;
  RngState s;
  for (auto& v : s.s1) v = splitmix64(x) % kM1;
  for (auto& v : s.s2) v = splitmix64(x) % kM2;
  if (s.s1 == std::array<std::uint64_t, 3>{0, 0, 0}) s.s1[0] = 1;
  if (s.s2 == std::array<std::uint64_t, 3>{0, 0, 0}) s.s2[0] = 1;
  return s;
}

RngState stream_for(const StreamKey& key, std::uint64_t master_seed) {
  const auto& t = jump_tables();
  const std::uint64_t stream_index =
      key.macro_rep * kPurposeCount + static_cast<std::uint64_t>(key.purpose);
  RngState s = seed_state(master_seed);
  if (stream_index != 0) {
    s = apply(mat_pow(t.stream1, stream_index, kM1), mat_pow(t.stream2, stream_index, kM2), s);
  }
  if (key.point_serial != 0) {
    s = apply(mat_pow(t.sub1, key.point_serial, kM1), mat_pow(t.sub2, key.point_serial, kM2), s);
  }
  return s;
}

}  // namespace astrodf::rng
