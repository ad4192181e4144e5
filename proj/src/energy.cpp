#include "embedev/energy.hpp"

#include <cmath>

#include "embedev/errors.hpp"
#include "embedev/util.hpp"

namespace embedev {

std::string KClass::describe() const {
    if (!rational()) return "irrational";
    return std::to_string(p) + "/" + std::to_string(q) + (even_q() ? " (even)" : " (odd)");
}

double k_of_energy(double E) {
    if (!(E > -2.0 && E < 2.0)) {
        throw DomainError("energy must lie in the open interval (-2, 2), got " +
                          std::to_string(E));
    }
    return std::acos(E / 2.0) / kPi;
}

double energy_of_k(double k) {
    if (!(k > 0.0 && k < 1.0)) {
        throw DomainError("quasi-momentum must lie in (0, 1), got " + std::to_string(k));
    }
    return 2.0 * std::cos(kPi * k);
}

// Stern-Brocot walk toward k with same-direction runs taken in one jump
// (each run corresponds to one continued-fraction partial quotient). The
// first mediant inside [k - tol, k + tol] is the fraction of smallest
// denominator in that interval; every mediant is already reduced.
KClass classify_k(double k, std::int64_t q_max, double tol) {
    if (!(k > 0.0 && k < 1.0)) {
        throw DomainError("classify_k: k must lie in (0, 1)");
    }
    if (q_max < 2) throw DomainError("classify_k: q_max must be >= 2");
    if (!(tol > 0.0)) throw DomainError("classify_k: tol must be positive");

    double lo_t = k - tol, hi_t = k + tol;
    // bracket lo = a/b < k < c/d = hi
    std::int64_t a = 0, b = 1, c = 1, d = 1;
    auto value = [](std::int64_t p, std::int64_t q) {
        return static_cast<double>(p) / static_cast<double>(q);
    };
    while (true) {
        if (b + d > q_max) return KClass{};  // everything closer needs q > q_max
        double med = value(a + c, b + d);
        if (med >= lo_t && med <= hi_t) return KClass{a + c, b + d};
        if (med < k) {
            // run of lo-updates: mediant_t = (a + t c) / (b + t d), increasing
            double coef = static_cast<double>(c) - lo_t * static_cast<double>(d);
            double need = lo_t * static_cast<double>(b) - static_cast<double>(a);
            std::int64_t t = 1;
            if (coef > 0.0 && need > 0.0) {
                t = static_cast<std::int64_t>(std::ceil(need / coef));
                if (t < 1) t = 1;
            }
            std::int64_t t_cap = (q_max - b) / d;
            if (t > t_cap) return KClass{};
            double cand = value(a + t * c, b + t * d);
            if (cand >= lo_t && cand <= hi_t) return KClass{a + t * c, b + t * d};
            if (cand <= hi_t) {
                // still below the interval (ceil undershot by rounding): single step
                a += t * c;
                b += t * d;
            } else {
                // jumped across: [lo_t, hi_t] sits between mediants t-1 and t
                a += (t - 1) * c;
                b += (t - 1) * d;
                c += a;  // mediant t becomes the new upper bracket
                d += b;
                if (d > q_max || b > q_max) return KClass{};
            }
        } else {
            // run of hi-updates: mediant_t = (c + t a) / (d + t b), decreasing
            double coef = hi_t * static_cast<double>(b) - static_cast<double>(a);
            double need = static_cast<double>(c) - hi_t * static_cast<double>(d);
            std::int64_t t = 1;
            if (coef > 0.0 && need > 0.0) {
                t = static_cast<std::int64_t>(std::ceil(need / coef));
                if (t < 1) t = 1;
            }
            std::int64_t t_cap = (q_max - d) / b;
            if (t > t_cap) return KClass{};
            double cand = value(c + t * a, d + t * b);
            if (cand >= lo_t && cand <= hi_t) return KClass{c + t * a, d + t * b};
            if (cand >= lo_t) {
                c += t * a;
                d += t * b;
            } else {
                c += (t - 1) * a;
                d += (t - 1) * b;
                a += c;
                b += d;
                if (d > q_max || b > q_max) return KClass{};
            }
        }
    }
}

Energy Energy::from_value(double E, std::int64_t q_max, double tol) {
    Energy e;
    e.value = E;
    e.k = k_of_energy(E);
    e.cls = classify_k(e.k, q_max, tol);
    return e;
}

Energy Energy::from_k(double k, std::int64_t q_max, double tol) {
    Energy e;
    e.value = energy_of_k(k);
    e.k = k;
    e.cls = classify_k(k, q_max, tol);
    return e;
}

double BoundaryCondition::u0() const { return std::cos(theta0); }
double BoundaryCondition::u1() const { return std::sin(theta0); }

}  // namespace embedev
