#ifndef EMBEDEV_ANALYSIS_HPP
#define EMBEDEV_ANALYSIS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "embedev/solver.hpp"

namespace embedev {

enum class Verdict { Ell2, NotEll2, Inconclusive };

std::string to_string(Verdict v);

// Numerical policy behind the l2 verdict; the -1 cutoff is the power-law
// convergence threshold for sum R^2 ~ sum n^beta.
struct VerdictPolicy {
    double ell2_cut = -1.0;
    double sigma_guard = 2.0;   // beta +/- sigma_guard * stderr
    double tail_max = 0.01;     // last-decade share of the partial sums
};

enum class FitChannel { LogR2, LogRt2 };

struct DecayReport {
    double beta = 0.0;
    double stderr_beta = 0.0;
    std::int64_t n_min = 0;
    std::int64_t n_max = 0;
    int n_samples = 0;
    FitChannel channel = FitChannel::LogR2;
    Verdict verdict = Verdict::Inconclusive;
    double tail_fraction = 1.0;  // (S(n_max) - S(n_max/10)) / S(n_max)
    VerdictPolicy policy;
    std::vector<std::pair<std::int64_t, double>> l2_partial;
};

// Ordinary least squares of the chosen log channel against ln n over the
// trajectory samples with n in [n_min, n_max]. Requires n_max >= 10 n_min
// and at least 50 samples in range.
DecayReport fit_decay(const Trajectory& traj, std::int64_t n_min, std::int64_t n_max,
                      FitChannel channel = FitChannel::LogR2,
                      const VerdictPolicy& policy = {});

struct AngleResult {
    double theta0 = 0.0;
    double beta = 0.0;
    Verdict verdict = Verdict::Inconclusive;
};

struct AbsenceReport {
    bool all_not_ell2 = false;
    double worst_beta = 0.0;      // most negative fitted slope over the grid
    double beta_bound = 0.0;      // -(a A_q / sin pi k) - 0.1
    bool worst_beta_ok = false;   // worst_beta >= beta_bound
    std::vector<AngleResult> angles;
};

// Integrates the fixed potential for a grid of boundary angles and fits
// each run; confirms no angle produces an l2 verdict in the predicted
// absence window.
AbsenceReport absence_check(const PotentialFn& V, double E, double a,
                            int n_angles = 64, std::int64_t n_max = 100000,
                            std::int64_t fit_min = 1000,
                            const VerdictPolicy& policy = {});

struct SumRuleResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

// sum (4 - E_i^2) <= 4 a^2 + 4 min{1, a} over detected eigenvalues.
SumRuleResult sum_rule_check(const std::vector<double>& energies, double a);

struct OscillatorySums {
    std::vector<std::pair<std::int64_t, double>> S1;  // sum cos(4 pi theta(t,E1))/(1+t)
    std::vector<std::pair<std::int64_t, double>> S2;  // sum sin(2 pi theta1) sin(2 pi theta2)/(1+t)
    double diag1 = 0.0;  // |S1(n_max)| / max(1, ln n_max)
    double diag2 = 0.0;
};

// Requires trajectories recorded with dense per-site theta. When both are
// given, checks the hypotheses k1 != k2 and k1 + k2 != 1.
OscillatorySums oscillatory_sums(const Trajectory& t1, const Trajectory* t2,
                                 std::int64_t n_max);

}  // namespace embedev

#endif  // EMBEDEV_ANALYSIS_HPP
