#include "embedev/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "embedev/constants.hpp"
#include "embedev/errors.hpp"
#include "embedev/util.hpp"

namespace embedev {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Ell2: return "ell2";
        case Verdict::NotEll2: return "not_ell2";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

DecayReport fit_decay(const Trajectory& traj, std::int64_t n_min, std::int64_t n_max,
                      FitChannel channel, const VerdictPolicy& policy) {
    if (n_min < 1 || n_max < 10 * n_min) {
        throw DomainError("fit_decay: require n_max >= 10 * n_min");
    }
    if (channel == FitChannel::LogR2 && !traj.prufer_valid) {
        throw DomainError("fit_decay: Pruefer channel invalid for this trajectory");
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : traj.samples) {
        if (s.n < n_min || s.n > n_max) continue;
        double y = (channel == FitChannel::LogR2) ? s.log_r2 : s.log_rt2;
        if (!std::isfinite(y)) continue;
        double x = std::log(static_cast<double>(s.n));
        pts.emplace_back(x, y);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 50) {
        throw DomainError("fit_decay: fewer than 50 samples in range (" +
                          std::to_string(m) + ")");
    }

    double denom = m * sxx - sx * sx;
    double beta = (m * sxy - sx * sy) / denom;
    double intercept = (sy - beta * sx) / m;
    double ss_res = 0.0;
    for (const auto& [x, y] : pts) {
        double r = y - (intercept + beta * x);
        ss_res += r * r;
    }
    double var_beta = (m > 2) ? (ss_res / (m - 2)) * (m / denom) : 0.0;

    DecayReport rep;
    rep.beta = beta;
    rep.stderr_beta = std::sqrt(std::max(0.0, var_beta));
    rep.n_min = n_min;
    rep.n_max = n_max;
    rep.n_samples = m;
    rep.channel = channel;
    rep.policy = policy;

    // Partial sums of R~^2 at the samples in range (running bookkeeping
    // kept by the solver).
    for (const auto& s : traj.samples) {
        if (s.n > n_max) break;
        rep.l2_partial.emplace_back(s.n, s.l2_prefix);
    }

    // Tail signal: share of the last decade in the partial sums.
    rep.tail_fraction = 1.0;
    const TrajectorySample* tip = traj.sample_at_or_below(n_max);
    const TrajectorySample* dec = traj.sample_at_or_below(n_max / 10);
    if (tip && dec && std::isfinite(tip->l2_prefix) && tip->l2_prefix > 0.0) {
        rep.tail_fraction = (tip->l2_prefix - dec->l2_prefix) / tip->l2_prefix;
    }

    if (beta + policy.sigma_guard * rep.stderr_beta < policy.ell2_cut &&
        rep.tail_fraction < policy.tail_max) {
        rep.verdict = Verdict::Ell2;
    } else if (beta - policy.sigma_guard * rep.stderr_beta > policy.ell2_cut) {
        rep.verdict = Verdict::NotEll2;
    } else {
        rep.verdict = Verdict::Inconclusive;
    }
    return rep;
}

AbsenceReport absence_check(const PotentialFn& V, double E, double a, int n_angles,
                            std::int64_t n_max, std::int64_t fit_min,
                            const VerdictPolicy& policy) {
    Energy en = Energy::from_value(E);
    double Aq = sharp_A(en.cls.q);  // q = 0 handles the irrational case
    double sk = std::sin(kPi * en.k);

    AbsenceReport rep;
    rep.beta_bound = -(a * Aq / sk) - 0.1;
    rep.angles.resize(static_cast<size_t>(n_angles));

    parallel_for(n_angles, [&](std::int64_t i) {
        BoundaryCondition bc{kPi * static_cast<double>(i) / static_cast<double>(n_angles)};
        Trajectory traj = integrate(V, E, bc, n_max);
        DecayReport r = fit_decay(traj, fit_min, n_max, FitChannel::LogR2, policy);
        rep.angles[static_cast<size_t>(i)] = AngleResult{bc.theta0, r.beta, r.verdict};
    });

    rep.all_not_ell2 = true;
    rep.worst_beta = 0.0;
    for (const auto& ar : rep.angles) {
        if (ar.verdict != Verdict::NotEll2) rep.all_not_ell2 = false;
        rep.worst_beta = std::min(rep.worst_beta, ar.beta);
    }
    rep.worst_beta_ok = rep.worst_beta >= rep.beta_bound;
    return rep;
}

SumRuleResult sum_rule_check(const std::vector<double>& energies, double a) {
    SumRuleResult res;
    for (double E : energies) {
        if (!(E > -2.0 && E < 2.0)) {
            throw DomainError("sum_rule_check: every energy must lie in (-2, 2)");
        }
        res.lhs += 4.0 - E * E;
    }
    res.rhs = 4.0 * a * a + 4.0 * std::min(1.0, a);
    res.pass = res.lhs <= res.rhs;
    return res;
}

OscillatorySums oscillatory_sums(const Trajectory& t1, const Trajectory* t2,
                                 std::int64_t n_max) {
    if (t1.theta_dense.empty() || (t2 && t2->theta_dense.empty())) {
        throw DomainError("oscillatory_sums: trajectories need dense theta records");
    }
    if (t2) {
        if (std::abs(t1.k - t2->k) < 1e-9) {
            throw DomainError("oscillatory_sums: k(E1) = k(E2) violates the hypotheses");
        }
        if (std::abs(t1.k + t2->k - 1.0) < 1e-9) {
            throw DomainError("oscillatory_sums: k(E1) + k(E2) = 1 violates the hypotheses");
        }
    }
    std::int64_t avail = t1.n_first + static_cast<std::int64_t>(t1.theta_dense.size()) - 1;
    if (t2) {
        avail = std::min(avail,
                         t2->n_first + static_cast<std::int64_t>(t2->theta_dense.size()) - 1);
    }
    n_max = std::min(n_max, avail);

    OscillatorySums out;
    double S1 = 0.0, S2 = 0.0;
    std::int64_t next_mark = 1;
    for (std::int64_t n = t1.n_first; n <= n_max; ++n) {
        double th1 = t1.theta_dense[static_cast<size_t>(n - t1.n_first)];
        S1 += std::cos(4.0 * kPi * th1) / (1.0 + static_cast<double>(n));
        if (t2) {
            double th2 = t2->theta_dense[static_cast<size_t>(n - t2->n_first)];
            S2 += std::sin(2.0 * kPi * th1) * std::sin(2.0 * kPi * th2) /
                  (1.0 + static_cast<double>(n));
        }
        if (n >= next_mark) {
            out.S1.emplace_back(n, S1);
            if (t2) out.S2.emplace_back(n, S2);
            next_mark = std::max(next_mark + 1,
                                 static_cast<std::int64_t>(std::ceil(1.05 * next_mark)));
        }
    }
    // Sublogarithmic-growth diagnostic: the endpoint ratio. (A sup over all
    // n would be pinned by the constant-sized head terms and could never
    // shrink as the range grows.)
    double scale = std::max(1.0, std::log(static_cast<double>(n_max)));
    out.diag1 = std::abs(S1) / scale;
    if (t2) out.diag2 = std::abs(S2) / scale;
    return out;
}

}  // namespace embedev
