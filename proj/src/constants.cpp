#include "embedev/constants.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "embedev/errors.hpp"
#include "embedev/util.hpp"

namespace embedev {

namespace {

void require_valid_q(std::int64_t q) {
    if (q == 1) {
        throw DomainError("q = 1 is excluded: no sharp constant is defined there");
    }
    if (q < 0 || (q != 0 && q < 2)) {
        throw DomainError("q must be 0 (irrational) or >= 2");
    }
}

// Evaluates f(phi) = (1/q) sum_j |sin(2 pi j / q + phi)| through
// precomputed tables: |sin(2 pi j/q + phi)| = |s_j cos(phi) + c_j sin(phi)|.
// The inner loop is a pure fma/abs reduction, which is what lets the
// 1e5-point grid stay inside the runtime budget.
struct PhaseAverager {
    std::vector<double> sj, cj;
    std::int64_t q;

    explicit PhaseAverager(std::int64_t q_) : q(q_) {
        sj.resize(static_cast<size_t>(q));
        cj.resize(static_cast<size_t>(q));
        for (std::int64_t j = 0; j < q; ++j) {
            double ang = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(q);
            sj[static_cast<size_t>(j)] = std::sin(ang);
            cj[static_cast<size_t>(j)] = std::cos(ang);
        }
    }

    double operator()(double cos_phi, double sin_phi) const {
        double sum = 0.0;
        const double* s = sj.data();
        const double* c = cj.data();
        for (std::int64_t j = 0; j < q; ++j) {
            sum += std::abs(s[j] * cos_phi + c[j] * sin_phi);
        }
        return sum / static_cast<double>(q);
    }

    double at(double phi) const { return (*this)(std::cos(phi), std::sin(phi)); }
};

// Ternary search for the extremum of f on [lo, hi]; f restricted to a
// smooth piece is C sin(phi + psi), hence unimodal there.
double ternary(const PhaseAverager& f, double lo, double hi, bool maximize, int iters,
               double* arg) {
    for (int i = 0; i < iters; ++i) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        double f1 = f.at(m1), f2 = f.at(m2);
        bool keep_right = maximize ? (f1 < f2) : (f1 > f2);
        if (keep_right)
            lo = m1;
        else
            hi = m2;
    }
    double mid = 0.5 * (lo + hi);
    if (arg) *arg = mid;
    return f.at(mid);
}

}  // namespace

double sharp_A(std::int64_t q) {
    require_valid_q(q);
    if (q == 0) return 2.0 / kPi;
    double sq = std::sin(kPi / static_cast<double>(q));
    if (q % 2 == 0) {
        return 2.0 / (static_cast<double>(q) * sq);
    }
    return 2.0 * std::cos(kPi / (2.0 * static_cast<double>(q))) /
           (static_cast<double>(q) * sq);
}

double sharp_B(std::int64_t q) {
    if (q < 3 || q % 2 == 0) {
        throw DomainError("B_q is defined for odd q >= 3 only");
    }
    double sq = std::sin(kPi / static_cast<double>(q));
    return (1.0 + std::cos(kPi / static_cast<double>(q))) /
           (static_cast<double>(q) * sq);
}

SharpConstants sharp_constants(std::int64_t q) {
    SharpConstants out;
    out.q = q;
    out.A = sharp_A(q);
    if (q >= 3 && q % 2 != 0) out.B = sharp_B(q);
    return out;
}

double phase_average_abs_sin(std::int64_t q, double phi) {
    if (q < 2) throw DomainError("phase average needs q >= 2");
    double sum = 0.0;
    for (std::int64_t j = 0; j < q; ++j) {
        sum += std::abs(std::sin(2.0 * kPi * static_cast<double>(j) /
                                     static_cast<double>(q) +
                                 phi));
    }
    return sum / static_cast<double>(q);
}

PhaseExtremum phase_extremum(std::int64_t q, ExtremumMode mode, std::int64_t grid_points) {
    if (q < 2) throw DomainError("phase_extremum needs q >= 2");
    if (grid_points < 8) grid_points = 8;

    PhaseAverager f(q);
    const double period = 2.0 * kPi / static_cast<double>(q);
    const double h = period / static_cast<double>(grid_points);
    const bool maximize = (mode == ExtremumMode::Max);

    // Incremental rotation over the grid (resynced periodically) avoids a
    // sincos per grid point.
    double best = maximize ? -1.0 : 2.0;
    std::int64_t best_i = 0;
    double ch = std::cos(h), sh = std::sin(h);
    double cphi = 1.0, sphi = 0.0;
    for (std::int64_t i = 0; i < grid_points; ++i) {
        if ((i & 4095) == 0) {
            double phi = h * static_cast<double>(i);
            cphi = std::cos(phi);
            sphi = std::sin(phi);
        }
        double val = f(cphi, sphi);
        if (maximize ? (val > best) : (val < best)) {
            best = val;
            best_i = i;
        }
        double cn = cphi * ch - sphi * sh;
        sphi = sphi * ch + cphi * sh;
        cphi = cn;
    }

    // Refine inside the bracketing interval, splitting at the interior
    // kink phi = pi/q (odd q) so each ternary search sees one smooth piece.
    double lo = h * static_cast<double>(best_i - 1);
    double hi = h * static_cast<double>(best_i + 1);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, period);

    std::vector<std::pair<double, double>> candidates;  // (value, phi)
    candidates.emplace_back(best, h * static_cast<double>(best_i));
    double kink = kPi / static_cast<double>(q);
    auto refine_piece = [&](double a, double b) {
        if (b - a < 1e-18) return;
        double arg = 0.0;
        double val = ternary(f, a, b, maximize, 200, &arg);
        candidates.emplace_back(val, arg);
    };
    if (q % 2 != 0 && kink > lo && kink < hi) {
        refine_piece(lo, kink);
        refine_piece(kink, hi);
        candidates.emplace_back(f.at(kink), kink);
    } else {
        refine_piece(lo, hi);
    }
    // Domain endpoints are kinks of the periodized function.
    candidates.emplace_back(f.at(0.0), 0.0);

    PhaseExtremum out;
    out.value = candidates.front().first;
    out.phi = candidates.front().second;
    for (const auto& [val, phi] : candidates) {
        if (maximize ? (val > out.value) : (val < out.value)) {
            out.value = val;
            out.phi = phi;
        }
    }
    return out;
}

double sine_sum(double a, double x, std::int64_t n) {
    if (n < 1) throw DomainError("sine_sum needs n >= 1");
    double sh = std::sin(x / 2.0);
    if (std::abs(sh) < 1e-3) {
        double sum = 0.0;
        for (std::int64_t j = 0; j < n; ++j) {
            sum += std::sin(a + static_cast<double>(j) * x);
        }
        return sum;
    }
    double num = std::cos(a - x / 2.0) -
                 std::cos(a + (static_cast<double>(n) - 0.5) * x);
    return num / (2.0 * sh);
}

namespace {

double critical_energy_impl(double a, double constant, const char* name) {
    if (!(a > 0.0)) throw DomainError("critical energy needs a > 0");
    double prod = a * constant;
    if (!(prod < 1.0)) {
        throw DomainError(std::string("no forbidden window: a * ") + name +
                          " = " + std::to_string(prod) + " >= 1");
    }
    return 2.0 * std::sqrt(1.0 - prod * prod);
}

}  // namespace

double critical_energy_A(double a, std::int64_t q) {
    return critical_energy_impl(a, sharp_A(q), "A_q");
}

double critical_energy_B(double a, std::int64_t q) {
    return critical_energy_impl(a, sharp_B(q), "B_q");
}

}  // namespace embedev
