#pragma once

#include <cmath>
#include <cstdint>

namespace mobimetrics {

// SplitMix64 (Steele, Lea, Flood 2014). Chosen for the generator because its
// state is a single 64-bit word, the algorithm is fixed by four constants, and
// independent sub-streams fall out of re-mixing the seed with a stream key.
// Adding entities to a world never perturbs the streams of existing entities.
struct SplitMix64 {
    std::uint64_t state = 0;

    constexpr explicit SplitMix64(std::uint64_t s = 0) : state(s) {}

    constexpr std::uint64_t next() noexcept {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept { return n ? next() % n : 0; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    double normal(double mean = 0.0, double sd = 1.0) noexcept;
};

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic sub-stream keyed by (seed, domain tag, entity id). The three
// inputs pass through the SplitMix64 finalizer in sequence, so streams for
// distinct keys are decorrelated.
constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t entity = 0) noexcept {
    std::uint64_t s = mix64(seed + 0x9E3779B97F4A7C15ULL);
    s = mix64(s ^ (tag * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL));
    s = mix64(s ^ (entity * 0x9E3779B97F4A7C15ULL + 0x853C49E6748FEA9BULL));
    return SplitMix64(s);
}

// Acklam's rational approximation to the inverse normal CDF (|rel err| < 1.15e-9).
// Preferred over Box-Muller: no trigonometry, one uniform per variate, and the
// variate is a pure function of the stream position.
inline double inverse_normal_cdf(double p) noexcept {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double plow = 0.02425;

    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

inline double SplitMix64::normal(double mean, double sd) noexcept {
    // Shift into (0, 1) so the inverse CDF never sees an endpoint.
    double u = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    return mean + sd * inverse_normal_cdf(u);
}

}  // namespace mobimetrics
