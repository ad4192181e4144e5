#ifndef EMBEDEV_SOLVER_HPP
#define EMBEDEV_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "embedev/energy.hpp"
#include "embedev/prufer.hpp"

namespace embedev {

// Site potential accessor. Must be defined for every site the solver
// visits; sites outside a construction's support return 0.
using PotentialFn = std::function<double(std::int64_t)>;

PotentialFn potential_from_vector(std::vector<double> values);

struct TrajectorySample {
    std::int64_t n = 0;
    double V = 0.0;        // potential at site n (used for the step n -> n+1)
    double u_prev = 0.0;   // normalized pair (u(n-1), u(n)) / R~(n)
    double u_cur = 0.0;
    double log_r2 = 0.0;   // ln R(n)^2 (Pruefer channel; NaN when invalid)
    double theta = 0.0;    // unwrapped Pruefer angle (frac-only when unknown)
    double log_rt2 = 0.0;  // ln(u(n-1)^2 + u(n)^2)
    double l2_prefix = 0.0;  // sum_{t<=n} R~(t)^2 (bookkeeping for verdicts)
};

struct Trajectory {
    double E = 0.0;
    double k = 0.5;
    double theta0 = 0.0;  // boundary angle (radians), when applicable
    std::int64_t n_first = 1;
    std::int64_t n_last = 1;
    bool prufer_valid = true;
    bool backward = false;
    std::vector<TrajectorySample> samples;
    // Per-site theta mod 1 for n in [n_first, n_last], filled only when
    // requested (oscillatory-sum diagnostics need every site).
    std::vector<double> theta_dense;

    const TrajectorySample* sample_at_or_below(std::int64_t n) const;
};

struct IntegrateOptions {
    // Geometric sampling: records site n_first, then each n that advances
    // the previous recorded n by at least the given factor, then n_last.
    double sample_ratio = 1.05;
    bool record_theta_dense = false;
    bool accumulate_l2 = true;
};

// Evolves u(n+1) = (E - V(n)) u(n) - u(n-1) from (u(0), u(1)) =
// (cos theta0, sin theta0), renormalizing the working pair to unit norm at
// every step and accumulating the log scale. The Pruefer channel runs in
// parallel via prufer_step while |V/sin(pi k)| < 1/2; if that bound is hit
// the channel is marked invalid for the rest of the run and integration
// continues on the direct recursion alone.
Trajectory integrate(const PotentialFn& V, double E, BoundaryCondition bc,
                     std::int64_t n_max, const IntegrateOptions& opt = {});

// Same recursion run downward from a seed pair (u(n_hi - 1), u(n_hi)).
// Backward integration is the stable way to realize a subordinate
// solution: the forward-decaying branch grows in this direction, so any
// seed converges onto it. The returned samples are in forward order with
// the log scale anchored to R~(n_hi) = 1; the Pruefer channel is not run
// (theta is recovered per sample from the pair, mod 1).
Trajectory integrate_backward(const PotentialFn& V, double E, double seed_u_prev,
                              double seed_u_cur, std::int64_t n_hi, std::int64_t n_lo,
                              const IntegrateOptions& opt = {});

// Direction (as a boundary-style angle in [0, pi)) of the pair
// (u_prev, u_cur): theta with u_cur/u_prev = tan(theta).
double pair_direction(double u_prev, double u_cur);

}  // namespace embedev

#endif  // EMBEDEV_SOLVER_HPP
