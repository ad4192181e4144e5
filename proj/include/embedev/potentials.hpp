#ifndef EMBEDEV_POTENTIALS_HPP
#define EMBEDEV_POTENTIALS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "embedev/energy.hpp"
#include "embedev/solver.hpp"

namespace embedev {

// ---------------------------------------------------------------------------
// Wigner-von Neumann values
// ---------------------------------------------------------------------------

// c sin(2 pi k n + phi) / (n - b) for n > b. The argument convention is
// 2 pi k n + phi so that resonance occurs at E = 2 cos(pi k); this is the
// repository-wide convention. The phase k*n is reduced mod 1 exactly
// before the sine so values stay accurate at n ~ 1e9.
double wvn_value(double c, double k, double phi, std::int64_t b, std::int64_t n);

// ---------------------------------------------------------------------------
// Sign-type feedback potentials, V(n) = a sgn(sin 2 pi theta(n,k)) / (1+n)
// ---------------------------------------------------------------------------

struct SignTypeOptions {
    double sample_ratio = 1.05;
    bool store_potential = true;  // keep the full V sequence (desk scale only)
};

struct SignTypeRun {
    double a = 0.0;
    double k = 0.5;
    std::int64_t n_start = 1;
    Trajectory traj;
    std::vector<double> potential;  // V(0..n_last), zeros outside the support
};

// Co-evolves the potential with the Pruefer trajectory from theta(n_start)
// = theta_start for n_steps sites. sgn(0) := 0 (no potential at a node).
// Requires a / (sin(pi k) (1 + n_start)) < 1/2.
SignTypeRun sign_type_run(double a, double k, double theta_start, std::int64_t n_start,
                          std::int64_t n_steps, const SignTypeOptions& opt = {});

// ---------------------------------------------------------------------------
// Even-denominator almost-sign-type construction
// ---------------------------------------------------------------------------

// Site permutations p_j^+ = (j-1) p^{-1} mod q and
// p_j^- = (q/2 + j - 1) p^{-1} mod q, j = 1..q/2, so that
// p_j^+ p/q = (j-1)/q and p_j^- p/q = 1/2 + (j-1)/q (mod 1). Their union
// is a permutation of {0, ..., q-1}.
struct EvenQPermutation {
    std::vector<std::int64_t> plus;
    std::vector<std::int64_t> minus;
};

EvenQPermutation even_q_permutation(std::int64_t p, std::int64_t q);

// The single potential value V = sin(pi k) (cot(pi theta_cur) -
// cot(pi theta_target - pi k)) that moves the Pruefer angle exactly onto
// theta_target (mod 1). Both sines must stay at least `margin` away from
// zero; otherwise the caller shifts its anchor site by one and retries.
double even_q_phase_setter(double theta_current, double theta_target, double k,
                           double margin = 1e-3);

struct EvenQOptions {
    double delta = 0.0;          // phase window; 0 = default 1/(8q)
    double setter_margin = 1e-3;
    double sample_ratio = 1.05;
    bool store_potential = true;
    bool store_blocks = false;
    int max_setter_shifts = 0;   // 0 = default q + 4
};

// One period of the construction: a_{m,j}^+ = a (j = 1..q/2),
// a_{m,j}^- = a (j = 1..q/2-1), and a_{m,q/2}^- solved from the linear
// cancellation equation
//   sum_{j=0}^{q-1} sin^2(pi (theta_in + j k)) V(n_abs + j) = 0
// using the actual theta_in. V(n_abs + p_j^{+-}) = +- a_j / (1 + n_abs).
struct PeriodBlock {
    std::int64_t m = 0;
    std::int64_t n_abs = 0;
    double theta_in = 0.0;   // mod 1
    double theta_out = 0.0;  // mod 1
    double a_minus_last = 0.0;
    std::vector<double> a_signed;  // signed numerators in site order (j = 0..q-1)
    double residual = 0.0;         // cancellation residual of the solve
    double dlog_r2 = 0.0;
};

PeriodBlock even_q_period(double a, std::int64_t p, std::int64_t q, std::int64_t n_abs,
                          double theta_in, const EvenQOptions& opt = {});

struct EvenQBuild {
    double a = 0.0;
    std::int64_t p = 1, q = 2;
    std::int64_t n0 = 0;          // first period site actually used
    double setter_value = 0.0;    // V(n0 - 1)
    Trajectory traj;
    std::vector<double> potential;
    std::vector<PeriodBlock> blocks;
    // diagnostics
    double max_lock_err = 0.0;    // max over periods of |frac(theta) - 1/(2q)|
    double max_residual = 0.0;    // worst relative cancellation residual
    double a_minus_min = 0.0, a_minus_max = 0.0;
    double max_nV = 0.0;          // max over period sites of |n V(n)|
    double envelope_C = 0.0;      // max over all sites (setter included) of |V(n)| (1+n)
};

// Full construction: V = 0 up to n0-2, one phase-setter site at n0-1
// targeting theta(n0) = 1/(2q), then n_periods chained blocks. n0 = 0
// selects the default max(100 q, ceil(8 a / sin(pi k))); the anchor is
// shifted forward when the setter is singular at the requested site.
EvenQBuild even_q_build(double a, std::int64_t p, std::int64_t q, std::int64_t n0,
                        std::int64_t n_periods, BoundaryCondition bc,
                        const EvenQOptions& opt = {});

// ---------------------------------------------------------------------------
// Piecewise Wigner-von Neumann segments and gluing
// ---------------------------------------------------------------------------

struct TwocaseOptions {
    double M = 400.0;        // V = (M / sin pi k) sin(2 pi k n + phi) / (n - b)
    int phi_grid = 720;
    int refine_iters = 80;
    double growth_cap = 10.0;      // allowed R~ growth factor at avoided energies
    std::int64_t gate_K = 50;      // require n0 - b >= gate_K
    double contraction_C = 10.0;   // constant in the contraction contract
    bool check_contract = true;
};

struct TwocaseSegment {
    double E = 0.0;
    double k = 0.0;
    double amp = 0.0;   // M / sin(pi k)
    double phi = 0.0;
    std::int64_t n0 = 0, n1 = 0, b = 0;
    // log R~(n1) - log R~(n0) of the forward solution with boundary theta0
    double log_contraction_fwd = 0.0;
    // same quantity measured on the backward-integrated subordinate branch
    double log_contraction_sub = 0.0;
    // angular mismatch (radians, mod pi) between the subordinate direction
    // at n0 and the requested boundary theta0
    double sub_dir_mismatch = 0.0;
    std::vector<double> avoid_growth_log;  // per avoided energy: max log growth

    double value(std::int64_t n) const;  // V(n), zero outside (n0, n1)
};

// Selects phi so that the solution with boundary ratio tan(theta0) at n0
// is the subordinate branch: scans a uniform phi grid, then golden-section
// refines the minimizer of R~(n1)/R~(n0). The contraction contract
// R~(n1) <= C ((n1-b)/(n0-b))^(-M/4) R~(n0) (exponent -100 at the default
// M = 400) is verified on the backward-integrated subordinate branch.
TwocaseSegment twocase_segment(double E, const std::vector<double>& avoid,
                               std::int64_t n0, std::int64_t n1, std::int64_t b,
                               double theta0, const TwocaseOptions& opt = {});

struct GlueTarget {
    double E = 0.0;
    double theta0 = 0.0;  // boundary angle at n = 0, radians
};

// Envelope h(n) for the streamed (countable-set) variant: |V(n)| <= h(n)/(1+n).
struct HSpec {
    enum class Kind { None, Constant, Log } kind = Kind::None;
    double c0 = 0.0;  // constant value for Kind::Constant

    double eval(std::int64_t n) const;
    static HSpec none();
    static HSpec constant(double c);
    static HSpec log_growth();  // h(n) = ln(10 + n)
};

struct GlueOptions {
    double beta_target = 4.0;   // per-segment subordinate exponent
    double growth_margin = 2.0; // served contraction >= margin * max other growth
    int max_doublings = 8;
    std::int64_t max_segments = 400;
    std::int64_t n_start = 0;   // 0 = auto
    int phi_grid = 720;
    double sample_ratio = 1.05;
    bool store_potential = true;
};

struct GlueSegmentRecord {
    int target = -1;
    std::int64_t n0 = 0, n1 = 0, b = 0;
    double phi = 0.0, amp = 0.0, k = 0.0, M = 0.0;
    double served_log_contraction = 0.0;
    double max_other_log_growth = 0.0;
};

struct GlueCheckpoint {
    std::int64_t segment = 0;
    std::int64_t n = 0;
    std::vector<double> log_rt2;  // per target, anchored to R~(start) = 1
};

struct GlueResult {
    std::vector<GlueTarget> targets;
    std::vector<GlueSegmentRecord> schedule;
    std::vector<GlueCheckpoint> checkpoints;
    std::vector<Trajectory> trajectories;  // one per target, full run
    std::vector<double> potential;         // realized V (when stored)
    std::int64_t n_start = 0, n_end = 0;
    double max_envelope = 0.0;        // max over support of |V(n)| (1+n)
    double max_envelope_over_h = 0.0; // max |V(n)| (1+n) / h(n) (h mode)
};

// Round-robin gluing over the targets: each segment serves one target via
// twocase_segment and is extended (doubling n1) until the served solution
// contracts by at least growth_margin times the worst growth incurred by
// the other active targets, and every previously served target's R~ keeps
// decreasing between its own servings. With an HSpec, target j activates
// once h(n) covers its amplitude, keeping |V(n)| <= h(n)/(1+n).
GlueResult glue_multi(const std::vector<GlueTarget>& targets, const HSpec& h,
                      std::int64_t n_max, const GlueOptions& opt = {});

// ---------------------------------------------------------------------------
// Declarative potential description (JSON-exportable, regenerable)
// ---------------------------------------------------------------------------

struct MultiSegmentParam {
    double E = 0.0, theta0 = 0.0, phi = 0.0, amp = 0.0, k = 0.0;
    std::int64_t n0 = 0, n1 = 0, b = 0;
};

struct PotentialSpec {
    enum class Variant { Zero, WignerVonNeumann, SignType, EvenQ, MultiSegment };
    Variant variant = Variant::Zero;
    std::uint64_t seed = 0;

    // WignerVonNeumann
    double c = 0.0, k = 0.5, phi = 0.0;
    std::int64_t b = -1;
    // SignType
    double a = 0.0;
    double theta_start = 0.0;
    std::int64_t n_start = 0;
    // EvenQ
    std::int64_t p = 1, q = 2, n0 = 0;
    double delta = 0.0, theta0 = 0.0;
    // MultiSegment
    std::vector<MultiSegmentParam> segments;

    // Regenerates the potential on [0, n_max]; deterministic.
    std::vector<double> realize(std::int64_t n_max) const;
};

}  // namespace embedev

#endif  // EMBEDEV_POTENTIALS_HPP
