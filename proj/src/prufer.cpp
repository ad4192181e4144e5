#include "embedev/prufer.hpp"

#include <cmath>

#include "embedev/errors.hpp"

namespace embedev {

namespace {

// Angle increment minus the free drift k, in theta units:
//   delta = atan2(v s^2, 1 - v s c) / pi,  s = sin(pi theta), c = cos(pi theta).
// Algebraically identical to the cot recursion; defined for all theta.
// Both arguments are even under (s, c) -> (-s, -c), so evaluating the trig
// at theta mod 1 instead of theta mod 2 is exact.
inline double angle_delta(double v, double s, double c) {
    return std::atan2(v * s * s, 1.0 - v * s * c) / kPi;
}

// ln of the amplitude ratio R(n+1)^2 / R(n)^2 = 1 - 2 v s c + v^2 s^2.
inline double log_amp_ratio(double v, double s, double c) {
    return std::log1p(v * s * (v * s - 2.0 * c));
}

inline void check_lemma_bound(double delta, double v, std::int64_t site) {
    // |theta' - k - theta| <= |V / sin(pi k)| whenever the step is
    // admissible; the rotation form satisfies it with a 2x margin, so a
    // violation means a genuine bug, not rounding.
    if (std::abs(delta) > std::abs(v)) {
        throw NumericFailure(site, "angle-step bound |delta| <= |v| violated: delta=" +
                                       std::to_string(delta) + " v=" + std::to_string(v));
    }
}

}  // namespace

PruferState PruferState::from_theta(std::int64_t n, double log_r2, double theta) {
    PruferState st;
    st.n = n;
    st.log_r2 = log_r2;
    st.theta_wraps = static_cast<std::int64_t>(std::floor(theta));
    st.theta_frac = theta - std::floor(theta);
    if (st.theta_frac >= 1.0) {
        st.theta_frac = 0.0;
        st.theta_wraps += 1;
    }
    return st;
}

PruferState prufer_step(const PruferState& state, double V_n, double k) {
    double sk = std::sin(kPi * k);
    double v = V_n / sk;
    if (!(std::abs(v) < 0.5)) {
        throw StepTooLarge(state.n, std::abs(v));
    }
    double s = std::sin(kPi * state.theta_frac);
    double c = std::cos(kPi * state.theta_frac);
    double delta = angle_delta(v, s, c);
    check_lemma_bound(delta, v, state.n);

    PruferState next;
    next.n = state.n + 1;
    next.log_r2 = state.log_r2 + log_amp_ratio(v, s, c);
    double t = state.theta_frac + k + delta;
    double fl = std::floor(t);
    next.theta_frac = t - fl;
    next.theta_wraps = state.theta_wraps + static_cast<std::int64_t>(fl);
    if (next.theta_frac >= 1.0) {
        next.theta_frac = 0.0;
        next.theta_wraps += 1;
    }
    return next;
}

PruferState prufer_step_to_target(const PruferState& state, double V_n, double k,
                                  double theta_target_frac) {
    double sk = std::sin(kPi * k);
    double v = V_n / sk;
    double s = std::sin(kPi * state.theta_frac);
    double c = std::cos(kPi * state.theta_frac);

    // Land on the representative of theta_target (mod 1) nearest theta + k.
    double free = state.theta_frac + k;
    double offset = theta_target_frac - free;
    double delta = offset - std::round(offset);  // in [-1/2, 1/2]

    // The rotation form must agree with the cot algebra mod 1.
    double delta_atan = angle_delta(v, s, c);
    if (circle_dist(free + delta_atan, theta_target_frac) > 1e-9) {
        throw NumericFailure(state.n, "phase-setter step did not land on its target");
    }

    PruferState next;
    next.n = state.n + 1;
    next.log_r2 = state.log_r2 + log_amp_ratio(v, s, c);
    double t = free + delta;
    double fl = std::floor(t);
    next.theta_frac = t - fl;
    next.theta_wraps = state.theta_wraps + static_cast<std::int64_t>(fl);
    if (next.theta_frac >= 1.0) {
        next.theta_frac = 0.0;
        next.theta_wraps += 1;
    }
    return next;
}

PruferPoint prufer_from_solution(double u_prev, double u_cur, double k) {
    if (u_prev == 0.0 && u_cur == 0.0) {
        throw DomainError("prufer_from_solution: zero solution pair");
    }
    double sk = std::sin(kPi * k);
    double ck = std::cos(kPi * k);
    double y1 = u_prev;
    double y2 = (u_cur - ck * u_prev) / sk;
    PruferPoint p;
    p.r = std::hypot(y1, y2);
    // Y = R (sin(pi theta - pi k), cos(pi theta - pi k))
    p.theta_frac = frac(k + std::atan2(y1, y2) / kPi);
    return p;
}

std::pair<double, double> solution_from_prufer(double r, double theta, double k) {
    if (!(r > 0.0)) throw DomainError("solution_from_prufer: R must be positive");
    double sk = std::sin(kPi * k);
    double ck = std::cos(kPi * k);
    double ang = kPi * (theta - k);
    double y1 = r * std::sin(ang);
    double y2 = r * std::cos(ang);
    double u_prev = y1;
    double u_cur = sk * y2 + ck * y1;
    return {u_prev, u_cur};
}

namespace detail {

PruferEvolver::PruferEvolver(double k, double theta_frac, std::int64_t n)
    : k_(k), theta_frac_(frac(theta_frac)), n_(n) {
    sin_pi_k_ = std::sin(kPi * k);
    cos_pi_k_ = std::cos(kPi * k);
    refresh_trig();
}

void PruferEvolver::refresh_trig() {
    s_ = std::sin(kPi * theta_frac_);
    c_ = std::cos(kPi * theta_frac_);
}

void PruferEvolver::collapse_window() {
    log_r2_base_ += std::log(r2_window_);
    r2_window_ = 1.0;
}

void PruferEvolver::step(double v) {
    if (!(std::abs(v) < 0.5)) {
        throw StepTooLarge(n_, std::abs(v));
    }
    double delta = angle_delta(v, s_, c_);
    check_lemma_bound(delta, v, n_);
    last_ratio_ = 1.0 + v * s_ * (v * s_ - 2.0 * c_);
    r2_window_ *= last_ratio_;
    if (r2_window_ < 1e-280 || r2_window_ > 1e280) collapse_window();

    double t = theta_frac_ + k_ + delta;
    double fl = std::floor(t);
    theta_frac_ = t - fl;
    wraps_ += static_cast<std::int64_t>(fl);
    if (theta_frac_ >= 1.0) {
        theta_frac_ = 0.0;
        wraps_ += 1;
    }
    n_ += 1;
    refresh_trig();
}

void PruferEvolver::step_to_target(double v, double target_frac) {
    double delta_atan = angle_delta(v, s_, c_);
    double free = theta_frac_ + k_;
    if (circle_dist(free + delta_atan, target_frac) > 1e-9) {
        throw NumericFailure(n_, "phase-setter step did not land on its target");
    }
    double offset = target_frac - free;
    double delta = offset - std::round(offset);
    last_ratio_ = 1.0 + v * s_ * (v * s_ - 2.0 * c_);
    r2_window_ *= last_ratio_;
    if (r2_window_ < 1e-280 || r2_window_ > 1e280) collapse_window();

    double t = free + delta;
    double fl = std::floor(t);
    theta_frac_ = t - fl;
    wraps_ += static_cast<std::int64_t>(fl);
    if (theta_frac_ >= 1.0) {
        theta_frac_ = 0.0;
        wraps_ += 1;
    }
    n_ += 1;
    refresh_trig();
}

double PruferEvolver::log_r2() {
    collapse_window();
    return log_r2_base_;
}

double PruferEvolver::angular_factor() const {
    // sin(pi theta - pi k) from the cached trig of theta and k
    double smk = s_ * cos_pi_k_ - c_ * sin_pi_k_;
    return smk * smk + s_ * s_;
}

double PruferEvolver::log_rt2() {
    return log_r2() + std::log(angular_factor());
}

PruferState PruferEvolver::state() {
    PruferState st;
    st.n = n_;
    st.log_r2 = log_r2();
    st.theta_frac = theta_frac_;
    st.theta_wraps = wraps_;
    return st;
}

}  // namespace detail

}  // namespace embedev
