#include "embedev/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "embedev/constants.hpp"
#include "embedev/errors.hpp"
#include "embedev/util.hpp"

namespace embedev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Geometric sampler shared by the feedback constructions.
struct GeoSampler {
    double ratio;
    std::int64_t next;

    GeoSampler(double r, std::int64_t first) : ratio(r), next(first) {}
    bool due(std::int64_t n) const { return n >= next; }
    void advance(std::int64_t n) {
        next = std::max(n + 1,
                        static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * ratio)));
    }
};

// Records a Pruefer-channel feedback run: log R^2, theta, and the derived
// pair norm R~^2 = R^2 (sin^2(pi theta - pi k) + sin^2 pi theta), with
// running l2 partial sums. Amplitudes are anchored to the stated start.
struct FeedbackRecorder {
    Trajectory traj;
    GeoSampler sampler;
    double log_r2_offset;
    double r2_offset_lin;
    double r2_lin = 1.0;       // R^2(n) relative to the anchor, linear scale
    double l2_sum = 0.0;
    bool l2_saturated = false;
    double k;

    FeedbackRecorder(double E, double k_, double theta0, std::int64_t n_first,
                     double sample_ratio, double log_r2_offset_)
        : sampler(sample_ratio, n_first), log_r2_offset(log_r2_offset_),
          r2_offset_lin(std::exp(log_r2_offset_)), k(k_) {
        traj.E = E;
        traj.k = k_;
        traj.theta0 = theta0;
        traj.n_first = n_first;
        traj.prufer_valid = true;
    }

    // Call once per site with the evolver positioned at n (before stepping).
    void on_site(detail::PruferEvolver& ev, double V_n) {
        double ang = ev.angular_factor();
        if (!l2_saturated) {
            double rt2 = r2_lin * ang * r2_offset_lin;
            l2_sum += rt2;
            if (!(l2_sum < 1e250)) {
                l2_saturated = true;
                l2_sum = kInf;
            }
        }
        if (sampler.due(ev.n())) {
            TrajectorySample s;
            s.n = ev.n();
            s.V = V_n;
            double inv = 1.0 / std::sqrt(ang);
            double smk = ev.sin_pi_theta() * std::cos(kPi * k) -
                         ev.cos_pi_theta() * std::sin(kPi * k);
            s.u_prev = smk * inv;
            s.u_cur = ev.sin_pi_theta() * inv;
            s.log_r2 = log_r2_offset + ev.log_r2();
            s.theta = ev.state().theta();
            s.log_rt2 = s.log_r2 + std::log(ang);
            s.l2_prefix = l2_sum;
            traj.samples.push_back(s);
            sampler.advance(ev.n());
        }
    }

    void after_step(detail::PruferEvolver& ev) { r2_lin *= ev.last_ratio(); }

    Trajectory finish(detail::PruferEvolver& ev, double V_last) {
        if (traj.samples.empty() || traj.samples.back().n != ev.n()) {
            sampler.next = ev.n();
            on_site(ev, V_last);
        }
        traj.n_last = ev.n();
        return std::move(traj);
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Wigner-von Neumann values
// ---------------------------------------------------------------------------

double wvn_value(double c, double k, double phi, std::int64_t b, std::int64_t n) {
    if (n <= b) {
        throw DomainError("wvn_value: n must exceed the shift b");
    }
    double arg = 2.0 * kPi * frac_mul(k, n) + phi;
    return c * std::sin(arg) / static_cast<double>(n - b);
}

// ---------------------------------------------------------------------------
// Sign-type feedback potentials
// ---------------------------------------------------------------------------

SignTypeRun sign_type_run(double a, double k, double theta_start, std::int64_t n_start,
                          std::int64_t n_steps, const SignTypeOptions& opt) {
    if (!(a > 0.0)) throw DomainError("sign_type_run: a must be positive");
    if (!(k > 0.0 && k < 1.0)) throw DomainError("sign_type_run: k must lie in (0,1)");
    if (n_start < 1 || n_steps < 1) {
        throw DomainError("sign_type_run: need n_start >= 1 and n_steps >= 1");
    }
    double sk = std::sin(kPi * k);
    if (!(a / (sk * (1.0 + static_cast<double>(n_start))) < 0.5)) {
        throw StepTooLarge(n_start, a / (sk * (1.0 + static_cast<double>(n_start))));
    }

    SignTypeRun run;
    run.a = a;
    run.k = k;
    run.n_start = n_start;
    std::int64_t n_end = n_start + n_steps;
    if (opt.store_potential) {
        run.potential.assign(static_cast<size_t>(n_end + 1), 0.0);
    }

    detail::PruferEvolver ev(k, theta_start, n_start);
    FeedbackRecorder rec(energy_of_k(k), k, theta_start, n_start, opt.sample_ratio, 0.0);

    for (std::int64_t n = n_start; n < n_end; ++n) {
        double s2t = ev.sin_2pi_theta();
        double sgn = (s2t > 0.0) ? 1.0 : (s2t < 0.0 ? -1.0 : 0.0);
        double V = a * sgn / (1.0 + static_cast<double>(n));
        if (opt.store_potential) run.potential[static_cast<size_t>(n)] = V;
        rec.on_site(ev, V);
        // With this V the one-step amplitude identity reads
        // dlog R^2 = ln(1 - (a/sk)|sin 2pi theta|/(1+n) + v^2 sin^2 pi theta):
        // V sin(2 pi theta) = a |sin 2 pi theta| / (1+n) >= 0 by construction.
        ev.step(V / sk);
        rec.after_step(ev);
    }
    run.traj = rec.finish(ev, 0.0);
    return run;
}

// ---------------------------------------------------------------------------
// Even-denominator almost-sign-type construction
// ---------------------------------------------------------------------------

EvenQPermutation even_q_permutation(std::int64_t p, std::int64_t q) {
    if (q < 2 || q % 2 != 0) throw DomainError("even_q_permutation: q must be even >= 2");
    if (p < 1 || p >= q || gcd64(p, q) != 1) {
        throw DomainError("even_q_permutation: p/q must be a reduced fraction, 1 <= p < q");
    }
    std::int64_t pinv = mod_inverse(p, q);
    EvenQPermutation perm;
    perm.plus.resize(static_cast<size_t>(q / 2));
    perm.minus.resize(static_cast<size_t>(q / 2));
    for (std::int64_t j = 1; j <= q / 2; ++j) {
        perm.plus[static_cast<size_t>(j - 1)] = ((j - 1) % q) * pinv % q;
        perm.minus[static_cast<size_t>(j - 1)] = ((q / 2 + j - 1) % q) * pinv % q;
    }
    return perm;
}

double even_q_phase_setter(double theta_current, double theta_target, double k,
                           double margin) {
    double sk = std::sin(kPi * k);
    double f_cur = frac(theta_current);
    double f_tgt = frac(theta_target - k);
    double s_cur = std::sin(kPi * f_cur);
    double s_tgt = std::sin(kPi * f_tgt);
    if (std::abs(s_cur) < margin || std::abs(s_tgt) < margin) {
        throw PhaseSetterSingular(
            "phase setter too close to a cot pole (shift the anchor site and retry)");
    }
    double cot_cur = std::cos(kPi * f_cur) / s_cur;
    double cot_tgt = std::cos(kPi * f_tgt) / s_tgt;
    return sk * (cot_cur - cot_tgt);
}

namespace {

// Shared per-period solve. Site phases use the exact congruences
// p_j^+ p/q = (j-1)/q and p_j^- p/q = 1/2 + (j-1)/q (mod 1), evaluated in
// integer arithmetic, so the cancellation residual is machine zero.
struct PeriodSolve {
    std::vector<double> a_signed;  // numerators by site offset 0..q-1
    double a_minus = 0.0;
    double residual = 0.0;
};

PeriodSolve solve_period(double a, std::int64_t p, std::int64_t q,
                         const EvenQPermutation& perm, double theta_in,
                         std::int64_t n_abs) {
    auto sin2 = [&](double phase_frac) {
        double s = std::sin(kPi * frac(phase_frac));
        return s * s;
    };
    std::int64_t half = q / 2;
    double splus = 0.0;
    for (std::int64_t j = 1; j <= half; ++j) {
        splus += sin2(theta_in + static_cast<double>(j - 1) / static_cast<double>(q));
    }
    double sminus = 0.0;
    for (std::int64_t j = 1; j < half; ++j) {
        sminus += sin2(theta_in + 0.5 + static_cast<double>(j - 1) / static_cast<double>(q));
    }
    double denom = sin2(theta_in + 0.5 + static_cast<double>(half - 1) / static_cast<double>(q));
    if (denom <= 0.0) {
        throw DegeneratePeriod("cancellation solve hit a vanishing coefficient");
    }
    PeriodSolve out;
    out.a_minus = a * (splus - sminus) / denom;
    if (!(out.a_minus > 0.0) || std::abs(out.a_minus - a) > 0.5 * a) {
        throw DegeneratePeriod("solved numerator out of range: a-=" +
                               std::to_string(out.a_minus) + " vs a=" + std::to_string(a));
    }
    out.a_signed.assign(static_cast<size_t>(q), 0.0);
    for (std::int64_t j = 1; j <= half; ++j) {
        out.a_signed[static_cast<size_t>(perm.plus[static_cast<size_t>(j - 1)])] = a;
        double am = (j < half) ? a : out.a_minus;
        out.a_signed[static_cast<size_t>(perm.minus[static_cast<size_t>(j - 1)])] = -am;
    }
    // Residual of sum_j sin^2(pi(theta_in + j k)) V(n_abs + j); j k is
    // reduced through (j p mod q)/q.
    double res = 0.0;
    for (std::int64_t j = 0; j < q; ++j) {
        double phase = theta_in + static_cast<double>((j * p) % q) / static_cast<double>(q);
        res += sin2(phase) * out.a_signed[static_cast<size_t>(j)] /
               (1.0 + static_cast<double>(n_abs));
    }
    out.residual = res;
    return out;
}

double default_delta(std::int64_t q) { return 1.0 / (8.0 * static_cast<double>(q)); }

}  // namespace

PeriodBlock even_q_period(double a, std::int64_t p, std::int64_t q, std::int64_t n_abs,
                          double theta_in, const EvenQOptions& opt) {
    if (!(a > 0.0)) throw DomainError("even_q_period: a must be positive");
    EvenQPermutation perm = even_q_permutation(p, q);
    double delta = opt.delta > 0.0 ? opt.delta : default_delta(q);
    double target = 1.0 / (2.0 * static_cast<double>(q));
    if (circle_dist(theta_in, target) > delta) {
        throw PhaseLockLost(0, theta_in);
    }
    double k = static_cast<double>(p) / static_cast<double>(q);
    double sk = std::sin(kPi * k);

    PeriodSolve solve = solve_period(a, p, q, perm, theta_in, n_abs);

    PeriodBlock block;
    block.n_abs = n_abs;
    block.theta_in = frac(theta_in);
    block.a_minus_last = solve.a_minus;
    block.a_signed = solve.a_signed;
    block.residual = solve.residual;

    detail::PruferEvolver ev(k, theta_in, n_abs);
    for (std::int64_t j = 0; j < q; ++j) {
        double V = solve.a_signed[static_cast<size_t>(j)] /
                   (1.0 + static_cast<double>(n_abs));
        double s2t = ev.sin_2pi_theta();
        if (V * s2t < -std::abs(V) * 1e-9) {
            throw DegeneratePeriod("sign alignment violated inside the period at offset " +
                                   std::to_string(j));
        }
        ev.step(V / sk);
    }
    block.theta_out = ev.theta_frac();
    block.dlog_r2 = ev.log_r2();
    return block;
}

EvenQBuild even_q_build(double a, std::int64_t p, std::int64_t q, std::int64_t n0,
                        std::int64_t n_periods, BoundaryCondition bc,
                        const EvenQOptions& opt) {
    if (!(a > 0.0)) throw DomainError("even_q_build: a must be positive");
    if (n_periods < 1) throw DomainError("even_q_build: need at least one period");
    EvenQPermutation perm = even_q_permutation(p, q);
    double k = static_cast<double>(p) / static_cast<double>(q);
    double sk = std::sin(kPi * k);
    double delta = opt.delta > 0.0 ? opt.delta : default_delta(q);
    double target = 1.0 / (2.0 * static_cast<double>(q));
    int max_shifts = opt.max_setter_shifts > 0 ? opt.max_setter_shifts
                                               : static_cast<int>(q) + 4;

    if (n0 <= 0) {
        n0 = std::max(100 * q, static_cast<std::int64_t>(std::ceil(8.0 * a / sk)));
    }
    if (n0 < 3) n0 = 3;
    if (!(a / (sk * (1.0 + static_cast<double>(n0))) < 0.5)) {
        throw StepTooLarge(n0, a / (sk * (1.0 + static_cast<double>(n0))));
    }

    EvenQBuild out;
    out.a = a;
    out.p = p;
    out.q = q;

    // Pruefer state at n = 1 from the boundary pair.
    double u0 = bc.u0(), u1 = bc.u1();
    PruferPoint start = prufer_from_solution(u0, u1, k);
    detail::PruferEvolver ev(k, start.theta_frac, 1);
    double log_off = 2.0 * std::log(start.r);
    FeedbackRecorder rec(energy_of_k(k), k, bc.theta0, 1, opt.sample_ratio, log_off);

    std::int64_t n_end = 0;  // filled below
    auto emit = [&](std::int64_t n, double V, bool period_site) {
        if (opt.store_potential && n < static_cast<std::int64_t>(out.potential.size())) {
            out.potential[static_cast<size_t>(n)] = V;
        }
        out.envelope_C = std::max(out.envelope_C, std::abs(V) * (1.0 + static_cast<double>(n)));
        if (period_site) {
            out.max_nV = std::max(out.max_nV, std::abs(V) * static_cast<double>(n));
        }
    };

    // Free evolution, then the phase setter; shift the anchor forward when
    // the setter sits too close to a pole.
    double setter = 0.0;
    {
        int shifts = 0;
        std::int64_t anchor = n0 - 1;
        // advance freely to the first candidate anchor
        while (ev.n() < anchor) {
            rec.on_site(ev, 0.0);
            ev.step(0.0);
            rec.after_step(ev);
        }
        while (true) {
            try {
                setter = even_q_phase_setter(ev.theta_frac(), target, k, opt.setter_margin);
                break;
            } catch (const PhaseSetterSingular&) {
                if (++shifts > max_shifts) throw;
                rec.on_site(ev, 0.0);
                ev.step(0.0);
                rec.after_step(ev);
                anchor += 1;
            }
        }
        n0 = anchor + 1;
    }
    out.n0 = n0;
    out.setter_value = setter;
    n_end = n0 + n_periods * q;
    if (opt.store_potential) out.potential.assign(static_cast<size_t>(n_end), 0.0);

    // Apply the setter site.
    emit(n0 - 1, setter, false);
    rec.on_site(ev, setter);
    if (std::abs(setter / sk) < 0.5) {
        ev.step(setter / sk);
    } else {
        ev.step_to_target(setter / sk, target);
    }
    rec.after_step(ev);

    out.a_minus_min = a;
    out.a_minus_max = a;

    for (std::int64_t m = 0; m < n_periods; ++m) {
        std::int64_t n_b = n0 + m * q;
        double theta_in = ev.theta_frac();
        double lock_err = circle_dist(theta_in, target);
        out.max_lock_err = std::max(out.max_lock_err, lock_err);
        if (lock_err > delta) {
            throw PhaseLockLost(m, theta_in);
        }
        PeriodSolve solve = solve_period(a, p, q, perm, theta_in, n_b);
        out.a_minus_min = std::min(out.a_minus_min, solve.a_minus);
        out.a_minus_max = std::max(out.a_minus_max, solve.a_minus);
        double rel_res = std::abs(solve.residual) * (1.0 + static_cast<double>(n_b)) / a;
        out.max_residual = std::max(out.max_residual, rel_res);

        for (std::int64_t j = 0; j < q; ++j) {
            double V = solve.a_signed[static_cast<size_t>(j)] /
                       (1.0 + static_cast<double>(n_b));
            emit(n_b + j, V, true);
            double s2t = ev.sin_2pi_theta();
            if (V * s2t < -std::abs(V) * 1e-9) {
                throw DegeneratePeriod("sign alignment violated at site " +
                                       std::to_string(n_b + j));
            }
            rec.on_site(ev, V);
            ev.step(V / sk);
            rec.after_step(ev);
        }
        if (opt.store_blocks) {
            PeriodBlock block;
            block.m = m;
            block.n_abs = n_b;
            block.theta_in = theta_in;
            block.theta_out = ev.theta_frac();
            block.a_minus_last = solve.a_minus;
            block.a_signed = solve.a_signed;
            block.residual = solve.residual;
            out.blocks.push_back(std::move(block));
        }
    }
    out.traj = rec.finish(ev, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Piecewise Wigner-von Neumann segments
// ---------------------------------------------------------------------------

double TwocaseSegment::value(std::int64_t n) const {
    if (n <= n0 || n >= n1) return 0.0;
    return wvn_value(amp, k, phi, b, n);
}

namespace {

// Scan helper: raw three-term recursion over [n0, n1] with the segment
// potential expressed through per-site tables, so a phi evaluation is a
// pure fma loop. Rescales only on overflow risk. Returns
// log R~(n1) - log R~(n0).
struct SegmentScanner {
    std::int64_t n0, n1, b;
    double E, amp;
    std::vector<double> sinb, cosb, w;

    SegmentScanner(double E_, double k, double amp_, std::int64_t n0_, std::int64_t n1_,
                   std::int64_t b_)
        : n0(n0_), n1(n1_), b(b_), E(E_), amp(amp_) {
        std::int64_t len = n1 - n0 + 1;
        sinb.resize(static_cast<size_t>(len));
        cosb.resize(static_cast<size_t>(len));
        w.resize(static_cast<size_t>(len));
        for (std::int64_t i = 0; i < len; ++i) {
            std::int64_t n = n0 + i;
            double base = 2.0 * kPi * frac_mul(k, n);
            sinb[static_cast<size_t>(i)] = std::sin(base);
            cosb[static_cast<size_t>(i)] = std::cos(base);
            w[static_cast<size_t>(i)] =
                (n > n0 && n < n1) ? amp / static_cast<double>(n - b) : 0.0;
        }
    }

    double log_ratio(double phi, double theta0) const {
        double cphi = std::cos(phi), sphi = std::sin(phi);
        double u_prev = std::cos(theta0), u_cur = std::sin(theta0);
        double log_scale = 0.0;
        std::int64_t len = n1 - n0;
        for (std::int64_t i = 0; i < len; ++i) {
            double V = w[static_cast<size_t>(i)] *
                       (sinb[static_cast<size_t>(i)] * cphi +
                        cosb[static_cast<size_t>(i)] * sphi);
            double u_next = (E - V) * u_cur - u_prev;
            u_prev = u_cur;
            u_cur = u_next;
            double a2 = u_prev * u_prev + u_cur * u_cur;
            if (a2 > 1e160 || a2 < 1e-160) {
                double m = std::sqrt(a2);
                log_scale += std::log(m);
                u_prev /= m;
                u_cur /= m;
            }
        }
        return log_scale + 0.5 * std::log(u_prev * u_prev + u_cur * u_cur);
    }
};

}  // namespace

TwocaseSegment twocase_segment(double E, const std::vector<double>& avoid,
                               std::int64_t n0, std::int64_t n1, std::int64_t b,
                               double theta0, const TwocaseOptions& opt) {
    if (std::abs(E) < 1e-12) {
        throw ConstructionImpossible("twocase_segment: E = 0 (k = 1/2) is excluded");
    }
    for (double Et : avoid) {
        if (std::abs(Et - E) < 1e-9 || std::abs(Et + E) < 1e-9) {
            throw ConstructionImpossible("twocase_segment: resonance clash with " +
                                         std::to_string(Et));
        }
    }
    if (!(n1 > n0 && n0 > b)) {
        throw DomainError("twocase_segment: need n1 > n0 > b");
    }
    if (n0 - b < opt.gate_K) {
        throw DomainError("twocase_segment: n0 - b below the gate constant");
    }
    double k = k_of_energy(E);
    double sk = std::sin(kPi * k);
    double amp = opt.M / sk;

    SegmentScanner scan(E, k, amp, n0, n1, b);

    // Uniform scan over phi, then golden-section refinement of the
    // forward contraction.
    int G = std::max(8, opt.phi_grid);
    double best_phi = 0.0, best_val = kInf;
    for (int i = 0; i < G; ++i) {
        double phi = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(G);
        double val = scan.log_ratio(phi, theta0);
        if (val < best_val) {
            best_val = val;
            best_phi = phi;
        }
    }
    {
        const double gr = 0.6180339887498949;
        double lo = best_phi - 2.0 * kPi / G;
        double hi = best_phi + 2.0 * kPi / G;
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = scan.log_ratio(x1, theta0), f2 = scan.log_ratio(x2, theta0);
        for (int it = 0; it < opt.refine_iters; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = scan.log_ratio(x1, theta0);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = scan.log_ratio(x2, theta0);
            }
        }
        double mid = 0.5 * (lo + hi);
        double fm = scan.log_ratio(mid, theta0);
        if (fm < best_val) {
            best_val = fm;
            best_phi = frac(mid / (2.0 * kPi)) * 2.0 * kPi;
        }
    }

    TwocaseSegment seg;
    seg.E = E;
    seg.k = k;
    seg.amp = amp;
    seg.phi = best_phi;
    seg.n0 = n0;
    seg.n1 = n1;
    seg.b = b;
    seg.log_contraction_fwd = scan.log_ratio(best_phi, theta0);

    // Subordinate branch measured on the backward integration (stable even
    // when the contrast exceeds what forward doubles can follow). Seeded
    // with the resonant asymptotic form to shorten the transient.
    {
        auto Vfn = [&seg](std::int64_t n) { return seg.value(n); };
        double beta_nom = opt.M / (4.0 * sk * sk);
        double seed_prev = std::sin(kPi * k * static_cast<double>(n1 - 1) + best_phi / 2.0);
        double seed_cur = std::sin(kPi * k * static_cast<double>(n1) + best_phi / 2.0);
        if (std::hypot(seed_prev, seed_cur) < 1e-3) {
            seed_prev = 1.0;
            seed_cur = 0.0;
        }
        Trajectory back = integrate_backward(Vfn, E, seed_prev, seed_cur, n1, n0);
        seg.log_contraction_sub = -0.5 * back.samples.front().log_rt2;
        double dir = pair_direction(back.samples.front().u_prev, back.samples.front().u_cur);
        double mism = std::abs(dir - theta0);
        mism = std::min(mism, kPi - mism);
        seg.sub_dir_mismatch = mism;

        if (opt.check_contract) {
            double ratio_b = static_cast<double>(n1 - b) / static_cast<double>(n0 - b);
            double bound = std::log(opt.contraction_C) - (opt.M / 4.0) * std::log(ratio_b);
            if (!(seg.log_contraction_sub <= bound)) {
                throw SegmentTooShort(
                    "subordinate contraction " + std::to_string(seg.log_contraction_sub) +
                    " misses the contract bound " + std::to_string(bound));
            }
            double dir_tol = std::max(1e-6, 10.0 * (std::pow(ratio_b, -2.0 * beta_nom) +
                                                    4.0 / static_cast<double>(n1)));
            if (!(seg.sub_dir_mismatch <= dir_tol)) {
                throw SegmentTooShort("subordinate direction missed the boundary by " +
                                      std::to_string(seg.sub_dir_mismatch));
            }
        }
    }

    // Growth bookkeeping for the avoided energies (both basis directions).
    for (double Et : avoid) {
        auto Vfn = [&seg](std::int64_t n) { return seg.value(n); };
        double worst = -kInf;
        for (double th : {0.0, 0.5 * kPi}) {
            double u_prev = std::cos(th), u_cur = std::sin(th);
            double r0 = 1.0;
            double log_scale = 0.0, peak = 0.0;
            for (std::int64_t n = n0; n < n1; ++n) {
                double u_next = (Et - Vfn(n)) * u_cur - u_prev;
                u_prev = u_cur;
                u_cur = u_next;
                double m = std::hypot(u_prev, u_cur);
                log_scale += std::log(m);
                u_prev /= m;
                u_cur /= m;
                peak = std::max(peak, log_scale - std::log(r0));
            }
            worst = std::max(worst, peak);
        }
        seg.avoid_growth_log.push_back(worst);
    }
    return seg;
}

// ---------------------------------------------------------------------------
// Gluing
// ---------------------------------------------------------------------------

double HSpec::eval(std::int64_t n) const {
    switch (kind) {
        case Kind::None: return kInf;
        case Kind::Constant: return c0;
        case Kind::Log: return std::log(10.0 + static_cast<double>(n));
    }
    return kInf;
}

HSpec HSpec::none() { return HSpec{}; }
HSpec HSpec::constant(double c) { return HSpec{Kind::Constant, c}; }
HSpec HSpec::log_growth() { return HSpec{Kind::Log, 0.0}; }

namespace {

// Direct-channel walker used to stream every target through the glued
// potential (renormalized each step, geometric samples, l2 bookkeeping).
struct DirectWalker {
    double E, k;
    double u_prev, u_cur;
    double log_scale = 0.0;
    double rt2 = 1.0;
    double l2 = 0.0;
    bool saturated = false;
    Trajectory traj;
    GeoSampler sampler;

    DirectWalker(double E_, double theta0, double sample_ratio)
        : E(E_), k(k_of_energy(E_)), u_prev(std::cos(theta0)), u_cur(std::sin(theta0)),
          sampler(sample_ratio, 1) {
        traj.E = E_;
        traj.k = k;
        traj.theta0 = theta0;
        traj.n_first = 1;
        traj.prufer_valid = false;
        rt2 = u_prev * u_prev + u_cur * u_cur;
        l2 = rt2;
    }

    void on_site(std::int64_t n, double V) {
        if (sampler.due(n)) {
            TrajectorySample s;
            s.n = n;
            s.V = V;
            s.u_prev = u_prev;
            s.u_cur = u_cur;
            s.log_r2 = std::nan("");
            s.theta = prufer_from_solution(u_prev, u_cur, k).theta_frac;
            s.log_rt2 = 2.0 * log_scale;
            s.l2_prefix = l2;
            traj.samples.push_back(s);
            sampler.advance(n);
        }
    }

    void step(std::int64_t n, double V) {
        double u_next = (E - V) * u_cur - u_prev;
        if (!std::isfinite(u_next)) {
            throw NumericFailure(n, "non-finite value while gluing");
        }
        double m = std::hypot(u_cur, u_next);
        log_scale += std::log(m);
        u_prev = u_cur / m;
        u_cur = u_next / m;
        if (!saturated) {
            rt2 *= m * m;
            l2 += rt2;
            if (!(l2 < 1e250)) {
                saturated = true;
                l2 = kInf;
            }
        }
    }

    double direction() const { return pair_direction(u_prev, u_cur); }
};

}  // namespace

GlueResult glue_multi(const std::vector<GlueTarget>& targets, const HSpec& h,
                      std::int64_t n_max, const GlueOptions& opt) {
    if (targets.empty()) throw DomainError("glue_multi: no targets");
    for (size_t i = 0; i < targets.size(); ++i) {
        for (size_t j = i; j < targets.size(); ++j) {
            if (std::abs(targets[i].E + targets[j].E) < 1e-9) {
                throw DomainError("glue_multi: 0 in A + A (targets " + std::to_string(i) +
                                  ", " + std::to_string(j) + ")");
            }
        }
        if (!(targets[i].E > -2.0 && targets[i].E < 2.0)) {
            throw DomainError("glue_multi: target energy outside (-2, 2)");
        }
    }
    for (size_t i = 0; i < targets.size(); ++i) {
        for (size_t j = i + 1; j < targets.size(); ++j) {
            if (std::abs(targets[i].E - targets[j].E) < 1e-9) {
                throw DomainError("glue_multi: duplicate target energies");
            }
        }
    }

    const size_t m = targets.size();
    GlueResult res;
    res.targets = targets;

    // Per-target segment coupling: M_j = 4 beta_target sin^2(pi k_j), so the
    // served subordinate exponent is beta_target for every target and the
    // amplitude M_j / sin(pi k_j) stays bounded by 4 beta_target.
    std::vector<double> K(m), M(m), amp(m);
    for (size_t j = 0; j < m; ++j) {
        K[j] = k_of_energy(targets[j].E);
        double skj = std::sin(kPi * K[j]);
        M[j] = 4.0 * opt.beta_target * skj * skj;
        amp[j] = M[j] / skj;
    }

    std::int64_t n_start = opt.n_start;
    if (n_start <= 0) n_start = 64;

    std::vector<DirectWalker> walkers;
    walkers.reserve(m);
    for (size_t j = 0; j < m; ++j) {
        walkers.emplace_back(targets[j].E, targets[j].theta0, opt.sample_ratio);
    }

    bool h_mode = h.kind != HSpec::Kind::None;
    std::vector<bool> active(m, !h_mode);
    std::vector<bool> served_once(m, false);
    std::vector<double> last_serve_log(m, kInf);

    if (opt.store_potential) res.potential.assign(static_cast<size_t>(n_max) + 1, 0.0);
    res.n_start = n_start;

    // advances every walker over [from, to) with the given potential
    auto run_all = [&](std::int64_t from, std::int64_t to, const auto& Vfn) {
        for (std::int64_t n = from; n < to; ++n) {
            double V = Vfn(n);
            if (opt.store_potential && n <= n_max) {
                res.potential[static_cast<size_t>(n)] = V;
            }
            if (V != 0.0) {
                double env = std::abs(V) * (1.0 + static_cast<double>(n));
                res.max_envelope = std::max(res.max_envelope, env);
                if (h_mode) {
                    res.max_envelope_over_h =
                        std::max(res.max_envelope_over_h, env / h.eval(n));
                }
            }
            for (auto& w : walkers) {
                w.on_site(n, V);
                w.step(n, V);
            }
        }
    };

    auto zero_fn = [](std::int64_t) { return 0.0; };

    // free evolution up to the schedule start
    run_all(1, n_start, zero_fn);

    std::int64_t n_cur = n_start;
    std::int64_t seg_count = 0;
    size_t rr = 0;  // round-robin cursor

    while (n_cur * 2 <= n_max) {
        if (static_cast<std::int64_t>(res.schedule.size()) >= opt.max_segments) {
            throw ConstructionFailed("glue_multi: segment cap reached at n=" +
                                     std::to_string(n_cur));
        }
        // activations at this boundary
        if (h_mode) {
            for (size_t j = 0; j < m; ++j) {
                if (!active[j] &&
                    amp[j] * (1.0 + 1.0 / static_cast<double>(n_cur)) <= h.eval(n_cur)) {
                    active[j] = true;
                }
            }
        }
        // pick the least-recently-served active target
        int pick = -1;
        for (size_t step = 0; step < m; ++step) {
            size_t j = (rr + step) % m;
            if (active[j]) {
                pick = static_cast<int>(j);
                break;
            }
        }
        if (pick < 0) {
            // nothing active yet: drift forward with V = 0
            std::int64_t to = std::min(n_max, n_cur * 2);
            run_all(n_cur, to, zero_fn);
            n_cur = to;
            continue;
        }
        rr = (static_cast<size_t>(pick) + 1) % m;

        std::vector<double> avoid;
        for (size_t j = 0; j < m; ++j) {
            if (static_cast<int>(j) != pick) avoid.push_back(targets[j].E);
        }

        bool committed = false;
        for (int d = 0; d <= opt.max_doublings && !committed; ++d) {
            std::int64_t n1 = n_cur * (2LL << d);
            bool truncated = false;
            if (n1 > n_max) {
                n1 = n_max;
                truncated = true;
            }
            TwocaseOptions topt;
            topt.M = M[static_cast<size_t>(pick)];
            topt.phi_grid = opt.phi_grid;
            topt.check_contract = false;  // gated below on the measured values
            TwocaseSegment seg = twocase_segment(targets[static_cast<size_t>(pick)].E,
                                                 avoid, n_cur, n1, 0,
                                                 walkers[static_cast<size_t>(pick)].direction(),
                                                 topt);

            // gate (i): served contraction must beat the others' growth by
            // the configured margin
            double max_growth = 0.0;
            for (double g : seg.avoid_growth_log) max_growth = std::max(max_growth, g);
            bool gate_contraction =
                seg.log_contraction_fwd <= -(std::log(opt.growth_margin) + max_growth);
            // gate (ii): monotone R~ at this target's own servings
            double projected =
                2.0 * walkers[static_cast<size_t>(pick)].log_scale + seg.log_contraction_fwd * 2.0;
            bool gate_monotone = !served_once[static_cast<size_t>(pick)] ||
                                 projected < last_serve_log[static_cast<size_t>(pick)];

            if ((gate_contraction && gate_monotone) || truncated) {
                auto Vfn = [&seg](std::int64_t n) { return seg.value(n); };
                run_all(n_cur, n1, Vfn);

                GlueSegmentRecord recd;
                recd.target = pick;
                recd.n0 = n_cur;
                recd.n1 = n1;
                recd.b = 0;
                recd.phi = seg.phi;
                recd.amp = seg.amp;
                recd.k = seg.k;
                recd.M = topt.M;
                recd.served_log_contraction = seg.log_contraction_fwd;
                recd.max_other_log_growth = max_growth;
                res.schedule.push_back(recd);

                GlueCheckpoint cp;
                cp.segment = seg_count++;
                cp.n = n1;
                for (auto& w : walkers) cp.log_rt2.push_back(2.0 * w.log_scale);
                res.checkpoints.push_back(cp);

                served_once[static_cast<size_t>(pick)] = true;
                last_serve_log[static_cast<size_t>(pick)] =
                    2.0 * walkers[static_cast<size_t>(pick)].log_scale;
                n_cur = n1;
                committed = true;
            } else if (d == opt.max_doublings) {
                throw ConstructionFailed(
                    "glue_multi: no segment length met the contraction gates at n=" +
                    std::to_string(n_cur) + " for target " + std::to_string(pick));
            }
        }
        if (n_cur >= n_max) break;
    }
    // trailing free run
    run_all(n_cur, n_max, zero_fn);
    for (auto& w : walkers) {
        if (w.traj.samples.empty() || w.traj.samples.back().n != n_max) {
            w.sampler.next = n_max;
            w.on_site(n_max, 0.0);
        }
        w.traj.n_last = n_max;
        res.trajectories.push_back(std::move(w.traj));
    }
    res.n_end = n_max;
    return res;
}

// ---------------------------------------------------------------------------
// Declarative spec realization
// ---------------------------------------------------------------------------

std::vector<double> PotentialSpec::realize(std::int64_t n_max) const {
    std::vector<double> V(static_cast<size_t>(n_max) + 1, 0.0);
    switch (variant) {
        case Variant::Zero:
            break;
        case Variant::WignerVonNeumann: {
            for (std::int64_t n = std::max<std::int64_t>(1, b + 1); n <= n_max; ++n) {
                V[static_cast<size_t>(n)] = wvn_value(c, k, phi, b, n);
            }
            break;
        }
        case Variant::SignType: {
            SignTypeOptions so;
            so.store_potential = true;
            std::int64_t steps = n_max - n_start;
            if (steps > 0) {
                SignTypeRun run = sign_type_run(a, k, theta_start, n_start, steps, so);
                for (std::int64_t n = 0; n <= n_max &&
                                         n < static_cast<std::int64_t>(run.potential.size());
                     ++n) {
                    V[static_cast<size_t>(n)] = run.potential[static_cast<size_t>(n)];
                }
            }
            break;
        }
        case Variant::EvenQ: {
            EvenQOptions eo;
            eo.delta = delta;
            eo.store_potential = true;
            std::int64_t periods = (n_max - n0) / q;
            if (periods > 0) {
                EvenQBuild build =
                    even_q_build(a, p, q, n0, periods, BoundaryCondition{theta0}, eo);
                for (std::int64_t n = 0; n <= n_max &&
                                         n < static_cast<std::int64_t>(build.potential.size());
                     ++n) {
                    V[static_cast<size_t>(n)] = build.potential[static_cast<size_t>(n)];
                }
            }
            break;
        }
        case Variant::MultiSegment: {
            for (const auto& s : segments) {
                for (std::int64_t n = s.n0 + 1; n < s.n1 && n <= n_max; ++n) {
                    V[static_cast<size_t>(n)] = wvn_value(s.amp, s.k, s.phi, s.b, n);
                }
            }
            break;
        }
    }
    return V;
}

}  // namespace embedev
