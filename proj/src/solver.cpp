#include "embedev/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "embedev/errors.hpp"
#include "embedev/util.hpp"

namespace embedev {

PotentialFn potential_from_vector(std::vector<double> values) {
    auto data = std::make_shared<std::vector<double>>(std::move(values));
    return [data](std::int64_t n) -> double {
        if (n < 0 || n >= static_cast<std::int64_t>(data->size())) return 0.0;
        return (*data)[static_cast<size_t>(n)];
    };
}

const TrajectorySample* Trajectory::sample_at_or_below(std::int64_t n) const {
    const TrajectorySample* best = nullptr;
    for (const auto& s : samples) {
        if (s.n <= n && (!best || s.n > best->n)) best = &s;
    }
    return best;
}

double pair_direction(double u_prev, double u_cur) {
    double th = std::atan2(u_cur, u_prev);
    if (th < 0.0) th += kPi;
    if (th >= kPi) th -= kPi;
    return th;
}

namespace {

struct Sampler {
    double ratio;
    std::int64_t next = 1;

    explicit Sampler(double r, std::int64_t first) : ratio(r), next(first) {}

    bool due(std::int64_t n) const { return n >= next; }
    void advance(std::int64_t n) {
        std::int64_t stepped =
            static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * ratio));
        next = std::max(n + 1, stepped);
    }
};

}  // namespace

Trajectory integrate(const PotentialFn& V, double E, BoundaryCondition bc,
                     std::int64_t n_max, const IntegrateOptions& opt) {
    if (n_max < 2) throw DomainError("integrate: n_max must be >= 2");
    double k = k_of_energy(E);

    Trajectory traj;
    traj.E = E;
    traj.k = k;
    traj.theta0 = bc.theta0;
    traj.n_first = 1;
    traj.n_last = n_max;

    double u_prev = bc.u0();
    double u_cur = bc.u1();
    double norm = std::hypot(u_prev, u_cur);
    if (norm == 0.0) throw DomainError("integrate: zero boundary pair");
    double log_scale = std::log(norm);
    u_prev /= norm;
    u_cur /= norm;

    double rt2 = norm * norm;  // un-logged R~^2, tracked multiplicatively
    double l2_sum = rt2;
    bool l2_saturated = false;

    const double sk = std::sin(kPi * k);
    bool prufer_ok = true;
    PruferPoint start = prufer_from_solution(u_prev, u_cur, k);
    detail::PruferEvolver ev(k, start.theta_frac, 1);
    double prufer_log_offset = 2.0 * (std::log(start.r) + log_scale);

    if (opt.record_theta_dense) {
        traj.theta_dense.reserve(static_cast<size_t>(n_max));
        traj.theta_dense.push_back(ev.theta_frac());
    }

    Sampler sampler(opt.sample_ratio, 1);
    auto record = [&](std::int64_t n, double Vn) {
        TrajectorySample s;
        s.n = n;
        s.V = Vn;
        s.u_prev = u_prev;
        s.u_cur = u_cur;
        s.log_rt2 = 2.0 * log_scale;
        s.theta = prufer_ok ? ev.state().theta() : std::nan("");
        s.log_r2 = prufer_ok ? prufer_log_offset + ev.log_r2() : std::nan("");
        s.l2_prefix = l2_sum;
        traj.samples.push_back(s);
    };

    for (std::int64_t n = 1; n <= n_max; ++n) {
        double Vn = V(n);
        if (sampler.due(n)) {
            record(n, Vn);
            sampler.advance(n);
        }
        if (n == n_max) break;

        double u_next = (E - Vn) * u_cur - u_prev;
        if (!std::isfinite(u_next)) {
            throw NumericFailure(n, "non-finite value in the direct recursion");
        }
        double m = std::hypot(u_cur, u_next);
        if (m == 0.0 || !std::isfinite(m)) {
            throw NumericFailure(n, "solution pair collapsed or overflowed");
        }
        log_scale += std::log(m);
        u_prev = u_cur / m;
        u_cur = u_next / m;

        if (prufer_ok) {
            if (std::abs(Vn / sk) < 0.5) {
                ev.step(Vn / sk);
            } else {
                prufer_ok = false;  // channel invalid from here on
            }
        }
        if (opt.record_theta_dense) {
            traj.theta_dense.push_back(
                prufer_ok ? ev.theta_frac()
                          : prufer_from_solution(u_prev, u_cur, k).theta_frac);
        }

        if (opt.accumulate_l2 && !l2_saturated) {
            rt2 *= m * m;
            if (rt2 > 1e250) {
                l2_saturated = true;
                l2_sum = std::numeric_limits<double>::infinity();
            } else {
                l2_sum += rt2;
            }
        }
    }
    if (traj.samples.empty() || traj.samples.back().n != n_max) {
        record(n_max, V(n_max));
    }
    traj.prufer_valid = prufer_ok;
    return traj;
}

Trajectory integrate_backward(const PotentialFn& V, double E, double seed_u_prev,
                              double seed_u_cur, std::int64_t n_hi, std::int64_t n_lo,
                              const IntegrateOptions& opt) {
    if (n_lo < 1 || n_hi <= n_lo) {
        throw DomainError("integrate_backward: need 1 <= n_lo < n_hi");
    }
    double k = k_of_energy(E);

    double u_prev = seed_u_prev;  // u(n-1)
    double u_cur = seed_u_cur;    // u(n)
    double norm = std::hypot(u_prev, u_cur);
    if (norm == 0.0) throw DomainError("integrate_backward: zero seed pair");
    u_prev /= norm;
    u_cur /= norm;
    double log_scale = 0.0;  // anchored: R~(n_hi) = 1

    Trajectory traj;
    traj.E = E;
    traj.k = k;
    traj.n_first = n_lo;
    traj.n_last = n_hi;
    traj.prufer_valid = false;
    traj.backward = true;

    auto record = [&](std::int64_t n) {
        TrajectorySample s;
        s.n = n;
        s.V = V(n);
        s.u_prev = u_prev;
        s.u_cur = u_cur;
        s.log_rt2 = 2.0 * log_scale;
        s.theta = prufer_from_solution(u_prev, u_cur, k).theta_frac;
        s.log_r2 = std::nan("");
        s.l2_prefix = 0.0;
        traj.samples.push_back(s);
    };

    // Sample spots chosen on the way down; samples reversed at the end.
    std::vector<std::int64_t> marks;
    for (std::int64_t n = n_lo; n <= n_hi;) {
        marks.push_back(n);
        std::int64_t stepped =
            static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * opt.sample_ratio));
        n = std::max(n + 1, stepped);
    }
    if (marks.back() != n_hi) marks.push_back(n_hi);

    auto next_mark = marks.rbegin();
    record(n_hi);
    if (*next_mark == n_hi) ++next_mark;

    for (std::int64_t n = n_hi; n > n_lo; --n) {
        // u(n-2) = (E - V(n-1)) u(n-1) - u(n)
        double Vn = V(n - 1);
        double u_prev2 = (E - Vn) * u_prev - u_cur;
        if (!std::isfinite(u_prev2)) {
            throw NumericFailure(n - 1, "non-finite value in the backward recursion");
        }
        double m = std::hypot(u_prev2, u_prev);
        if (m == 0.0 || !std::isfinite(m)) {
            throw NumericFailure(n - 1, "solution pair collapsed or overflowed");
        }
        log_scale += std::log(m);
        u_cur = u_prev / m;
        u_prev = u_prev2 / m;
        if (next_mark != marks.rend() && n - 1 == *next_mark) {
            record(n - 1);
            ++next_mark;
        }
    }
    std::reverse(traj.samples.begin(), traj.samples.end());
    return traj;
}

}  // namespace embedev
