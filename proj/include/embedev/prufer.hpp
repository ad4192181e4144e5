#ifndef EMBEDEV_PRUFER_HPP
#define EMBEDEV_PRUFER_HPP

#include <cstdint>
#include <utility>

#include "embedev/util.hpp"

namespace embedev {

// Pruefer variables (R, theta) of a solution pair (u(n-1), u(n)):
//
//   Y(n) = (1/sin pi k) [ sin pi k   0 ] (u(n-1))
//                       [ -cos pi k  1 ] (u(n)  )
//        = R(n) (sin(pi theta(n) - pi k), cos(pi theta(n) - pi k)),
//
// equivalently u(n-1) = R sin(pi theta - pi k), u(n) = R sin(pi theta).
//
// theta is tracked unwrapped in units of half-turns (physical angle =
// pi * theta). The state splits theta into wraps + frac so the
// fractional part keeps full precision over 1e9+ sites; all dynamics
// depend on frac only.
struct PruferState {
    std::int64_t n = 0;
    double log_r2 = 0.0;
    double theta_frac = 0.0;        // theta mod 1, in [0, 1)
    std::int64_t theta_wraps = 0;   // integer part of the unwrapped theta

    double theta() const { return static_cast<double>(theta_wraps) + theta_frac; }

    static PruferState from_theta(std::int64_t n, double log_r2, double theta);
};

// One step of the exact Pruefer recursion for site potential V_n:
//
//   R(n+1)^2 / R(n)^2 = 1 - v sin(2 pi theta) + v^2 sin^2(pi theta),
//   cot(pi theta(n+1) - pi k) = cot(pi theta(n)) - v,     v = V_n / sin(pi k),
//
// with the angle update evaluated as a rotation of (sin pi theta,
// cos pi theta) followed by atan2 (never via cot, which has poles):
//
//   theta(n+1) = theta(n) + k + atan2(v s^2, 1 - v s c) / pi.
//
// Requires |v| < 1/2 (throws StepTooLarge otherwise); under that bound the
// branch with |theta(n+1) - k - theta(n)| < 1/2 is unique and the step
// checks |theta(n+1) - k - theta(n)| <= |v| on every call.
PruferState prufer_step(const PruferState& state, double V_n, double k);

// Variant used by the phase setter: no bound on |v|. The angle lands on
// the representative of theta_target (mod 1) nearest theta + k; the
// amplitude update is the same exact formula. The rotation/atan2 angle is
// cross-checked against the target to ~1e-9.
PruferState prufer_step_to_target(const PruferState& state, double V_n, double k,
                                  double theta_target_frac);

// (R, theta mod 1) of a solution pair. R carries the 1/sin(pi k) scale of
// the shear above; theta_frac in [0,1) determines the pair up to overall
// sign (the lost integer part of theta carries the sign).
struct PruferPoint {
    double r = 1.0;
    double theta_frac = 0.0;
};

PruferPoint prufer_from_solution(double u_prev, double u_cur, double k);

// Inverse of the shear: (u_prev, u_cur) of the state (R, theta).
std::pair<double, double> solution_from_prufer(double r, double theta, double k);

namespace detail {

// Streaming Pruefer evolver for hot loops. Keeps the running R^2 as a
// window product (no per-step log) and exposes the per-step quantities
// needed by feedback potentials. Bit-compatible with prufer_step up to
// the usual rounding of reassociated products.
class PruferEvolver {
  public:
    PruferEvolver(double k, double theta_frac, std::int64_t n);

    // Advances one site; v = V(n)/sin(pi k) with |v| < 1/2 enforced.
    void step(double v);

    // Phase-setter step: lands on the representative of target_frac (mod 1)
    // nearest theta + k; no bound on |v|.
    void step_to_target(double v, double target_frac);

    std::int64_t n() const { return n_; }
    double theta_frac() const { return theta_frac_; }
    std::int64_t theta_wraps() const { return wraps_; }
    double k() const { return k_; }

    // sin/cos of pi*theta_frac at the current site.
    double sin_pi_theta() const { return s_; }
    double cos_pi_theta() const { return c_; }
    // sin(2 pi theta) at the current site.
    double sin_2pi_theta() const { return 2.0 * s_ * c_; }

    // Accumulated ln R^2 (collapses the open window product).
    double log_r2();
    // R(n+1)^2 / R(n)^2 of the most recent step.
    double last_ratio() const { return last_ratio_; }
    // sin^2(pi theta - pi k) + sin^2(pi theta): R~^2 = R^2 * this factor.
    double angular_factor() const;
    double log_rt2();

    PruferState state();

  private:
    void refresh_trig();
    void collapse_window();

    double k_;
    double sin_pi_k_, cos_pi_k_;
    double theta_frac_;
    std::int64_t wraps_ = 0;
    std::int64_t n_ = 0;
    double s_ = 0.0, c_ = 1.0;
    double log_r2_base_ = 0.0;
    double r2_window_ = 1.0;  // product of step ratios since last collapse
    double last_ratio_ = 1.0;
};

}  // namespace detail

}  // namespace embedev

#endif  // EMBEDEV_PRUFER_HPP
