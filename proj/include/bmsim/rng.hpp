#pragma once

#include <cmath>
#include <cstdint>

namespace bmsim {

/// Identifies one reproducible random stream: the ensemble's master seed plus
/// the path index within it.
struct StreamKey {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

/// SplitMix64 finalizer (Steele, Lea, Flood: "Fast splittable pseudorandom
/// number generators").
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

enum class VariateFamily : std::uint64_t {
    kGaussian = 0x6a09e667f3bcc908ull,
    kUniform = 0xbb67ae8584caa73bull,
};

/// Counter origin of a stream. Variate p of the stream is mix64(origin + (p+1)*golden),
/// i.e. SplitMix64 in counter mode; (seed, stream, family) only pick the origin.
constexpr std::uint64_t stream_origin(const StreamKey& key, VariateFamily family) noexcept
{
    const std::uint64_t seed_state = mix64(key.master_seed ^ static_cast<std::uint64_t>(family));
    return mix64(seed_state ^ mix64(key.stream_index * 0xd1b54a32d192ed03ull + kGolden));
}

constexpr std::uint64_t bits_at(std::uint64_t origin, std::uint64_t position) noexcept
{
    return mix64(origin + (position + 1) * kGolden);
}

/// Top 52 bits mapped to the open unit interval with a half-ulp offset:
/// the smallest value is 2^-53 and the largest 1 - 2^-53.
constexpr double bits_to_open_unit(std::uint64_t bits) noexcept
{
    constexpr double kScale = 0x1.0p-52;
    return (static_cast<double>(bits >> 12) + 0.5) * kScale;
}

}  // namespace detail

/// Inverse of the standard normal CDF for p in (0, 1). Rational approximation
/// (Acklam), relative error below 1.2e-9; stateless, no rejection.
inline double inverse_normal_cdf(double p) noexcept
{
    constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                            -2.759285104469687e+02, 1.383577518672690e+02,
                            -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                            -1.556989798598866e+02, 6.680131188771972e+01,
                            -1.328068155288572e+01};
    constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                            -2.400758277161838e+00, -2.549732539343734e+00,
                            4.374664141464968e+00,  2.938163982698783e+00};
    constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                            2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double kLow = 0.02425;
    constexpr double kHigh = 1.0 - kLow;

    if (p < kLow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > kHigh) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

/// Uniform(0,1) variate at an absolute stream position.
inline double uniform_at(const StreamKey& key, std::uint64_t position) noexcept
{
    const auto origin = detail::stream_origin(key, detail::VariateFamily::kUniform);
    return detail::bits_to_open_unit(detail::bits_at(origin, position));
}

/// Standard normal variate at an absolute stream position.
inline double gaussian_at(const StreamKey& key, std::uint64_t position) noexcept
{
    const auto origin = detail::stream_origin(key, detail::VariateFamily::kGaussian);
    return inverse_normal_cdf(detail::bits_to_open_unit(detail::bits_at(origin, position)));
}

namespace detail {

template <VariateFamily Family>
class CounterStream {
  public:
    explicit CounterStream(StreamKey key, std::uint64_t start = 0) noexcept
        : key_(key), origin_(stream_origin(key, Family)), position_(start)
    {
    }

    [[nodiscard]] const StreamKey& key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t position() const noexcept { return position_; }
    void seek(std::uint64_t position) noexcept { position_ = position; }

  protected:
    [[nodiscard]] std::uint64_t next_bits() noexcept { return bits_at(origin_, position_++); }
    [[nodiscard]] std::uint64_t bits(std::uint64_t position) const noexcept
    {
        return bits_at(origin_, position);
    }

  private:
    StreamKey key_;
    std::uint64_t origin_;
    std::uint64_t position_;
};

}  // namespace detail

/// Sequential reader over the Gaussian stream of a key. Element i equals
/// gaussian_at(key, i) regardless of how the stream was advanced.
class GaussianStream : public detail::CounterStream<detail::VariateFamily::kGaussian> {
  public:
    using CounterStream::CounterStream;
    double operator()() noexcept { return inverse_normal_cdf(detail::bits_to_open_unit(next_bits())); }
    [[nodiscard]] double at(std::uint64_t position) const noexcept
    {
        return inverse_normal_cdf(detail::bits_to_open_unit(bits(position)));
    }
};

/// Sequential reader over the uniform stream of a key; never yields 0 or 1.
class UniformStream : public detail::CounterStream<detail::VariateFamily::kUniform> {
  public:
    using CounterStream::CounterStream;
    double operator()() noexcept { return detail::bits_to_open_unit(next_bits()); }
    [[nodiscard]] double at(std::uint64_t position) const noexcept
    {
        return detail::bits_to_open_unit(bits(position));
    }
};

inline GaussianStream gaussian_stream(StreamKey key) noexcept { return GaussianStream(key); }
inline UniformStream uniform_stream(StreamKey key) noexcept { return UniformStream(key); }

}  // namespace bmsim
