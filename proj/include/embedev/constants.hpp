#ifndef EMBEDEV_CONSTANTS_HPP
#define EMBEDEV_CONSTANTS_HPP

#include <cstdint>
#include <optional>

namespace embedev {

// Sharp transition constants for the coupling threshold at quasi-momentum
// denominator q:
//
//   q even:  A_q = 2 / (q sin(pi/q))
//   q odd :  A_q = 2 cos(pi/2q) / (q sin(pi/q)),
//            B_q = (1 + cos(pi/q)) / (q sin(pi/q))
//   q = 0 (irrational): A_0 = 2/pi
//
// A_q <= 1 for every admissible q; B_q > 1/2; both tend to 2/pi.
struct SharpConstants {
    std::int64_t q = 0;
    double A = 0.0;
    std::optional<double> B;  // odd q only
};

// q = 0 or q >= 2; q = 1 is rejected (no such constant exists).
double sharp_A(std::int64_t q);

// Odd q >= 3 only.
double sharp_B(std::int64_t q);

SharpConstants sharp_constants(std::int64_t q);

enum class ExtremumMode { Max, Min };

struct PhaseExtremum {
    double value = 0.0;
    double phi = 0.0;  // an attaining phase in [0, 2 pi / q)
};

// Brute-force extremum of f(phi) = (1/q) sum_{j=0}^{q-1} |sin(2 pi j/q + phi)|
// over phi in [0, 2 pi / q) (f has period 2 pi / q): uniform grid of
// grid_points evaluations refined by ternary search inside the bracketing
// smooth piece (f has a kink at phi = pi/q when q is odd).
PhaseExtremum phase_extremum(std::int64_t q, ExtremumMode mode,
                             std::int64_t grid_points = 100000);

// Direct O(q) evaluation of f(phi) above; the oracle the extremizer is
// tested against.
double phase_average_abs_sin(std::int64_t q, double phi);

// sum_{j=0}^{n-1} sin(a + j x). Uses the closed form
// [cos(a - x/2) - cos(a + (n - 1/2) x)] / (2 sin(x/2)) and falls back to
// direct summation when sin(x/2) is too small for it.
double sine_sum(double a, double x, std::int64_t n);

// E_q = 2 sqrt(1 - a^2 A_q^2); requires a A_q < 1.
double critical_energy_A(double a, std::int64_t q);

// Variant with B_q (odd q); requires a B_q < 1.
double critical_energy_B(double a, std::int64_t q);

}  // namespace embedev

#endif  // EMBEDEV_CONSTANTS_HPP
