#ifndef EMBEDEV_ENERGY_HPP
#define EMBEDEV_ENERGY_HPP

#include <cstdint>
#include <string>

namespace embedev {

// Arithmetic classification of the quasi-momentum k = arccos(E/2)/pi.
// q == 0 means "irrational at the configured resolution (q_max, tol)";
// otherwise k is within tol of the reduced fraction p/q, q >= 2. q = 1
// is never produced.
struct KClass {
    std::int64_t p = 0;
    std::int64_t q = 0;

    bool rational() const { return q != 0; }
    bool even_q() const { return q != 0 && q % 2 == 0; }
    bool odd_q() const { return q != 0 && q % 2 != 0; }
    std::string describe() const;
};

inline constexpr std::int64_t kDefaultQMax = 1'000'000;
inline constexpr double kDefaultClassifyTol = 1e-10;

// k = arccos(E/2)/pi for E in (-2, 2); throws DomainError outside.
double k_of_energy(double E);

// E = 2 cos(pi k). Round-trips with k_of_energy to a few ulp.
double energy_of_k(double k);

// Finds the smallest q in [2, q_max] such that |k - p/q| <= tol for a
// reduced fraction p/q, walking the Stern-Brocot tree of k (equivalently
// its continued-fraction convergents, with runs of same-direction steps
// taken in one jump). Returns q = 0 when no such fraction exists.
KClass classify_k(double k, std::int64_t q_max = kDefaultQMax,
                  double tol = kDefaultClassifyTol);

// An energy point E in (-2, 2) together with k and its classification.
struct Energy {
    double value = 0.0;
    double k = 0.5;
    KClass cls;

    static Energy from_value(double E, std::int64_t q_max = kDefaultQMax,
                             double tol = kDefaultClassifyTol);
    static Energy from_k(double k, std::int64_t q_max = kDefaultQMax,
                         double tol = kDefaultClassifyTol);
};

// Half-line boundary condition u(1)/u(0) = tan(theta0), theta0 in [0, pi).
// theta0 = pi/2 is the vertical case u(0) = 0.
struct BoundaryCondition {
    double theta0 = 0.0;

    double u0() const;
    double u1() const;
};

}  // namespace embedev

#endif  // EMBEDEV_ENERGY_HPP
