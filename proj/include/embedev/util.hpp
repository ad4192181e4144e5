#ifndef EMBEDEV_UTIL_HPP
#define EMBEDEV_UTIL_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <string_view>

namespace embedev {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr double kPi = 3.14159265358979323846;

// Fractional part mapped to [0, 1).
inline double frac(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f = 0.0;  // guard against floor rounding at the boundary
    return f;
}

// Circle distance between a and b taken mod 1, result in [0, 1/2].
inline double circle_dist(double a, double b) {
    double d = frac(a - b);
    return d > 0.5 ? 1.0 - d : d;
}

// Exact fractional part of k*n for integer n (|n| < 2^53). The fma
// recovers the rounding error of the product, so the reduced phase keeps
// full double precision even when k*n is ~1e9.
inline double frac_mul(double k, std::int64_t n) {
    double hi = k * static_cast<double>(n);
    double lo = std::fma(k, static_cast<double>(n), -hi);
    double f = frac(hi) + lo;
    return frac(f);
}

std::int64_t gcd64(std::int64_t a, std::int64_t b);

// Modular inverse of a mod m (gcd(a, m) must be 1).
std::int64_t mod_inverse(std::int64_t a, std::int64_t m);

// Chunked parallel loop over [0, n). Runs inline when n is small or only
// one worker is available. fn must be safe to call concurrently for
// distinct indices.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  unsigned max_threads = 0);

}  // namespace embedev

#endif  // EMBEDEV_UTIL_HPP
