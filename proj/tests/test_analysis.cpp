#include <doctest.h>

#include <cmath>
#include <random>

#include "embedev/analysis.hpp"
#include "embedev/errors.hpp"
#include "embedev/potentials.hpp"
#include "embedev/solver.hpp"
#include "embedev/util.hpp"

using namespace embedev;

namespace {

// Synthetic trajectory with log R^2 = beta ln n + noise and matching
// partial sums of R~^2 = n^beta.
Trajectory synthetic(double beta, double noise_sigma, std::int64_t n_max, unsigned seed) {
    Trajectory traj;
    traj.E = 0.0;
    traj.k = 0.5;
    traj.n_first = 1;
    traj.n_last = n_max;
    traj.prufer_valid = true;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    double l2 = 0.0;
    std::int64_t next = 1;
    double prev_n = 1;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        double rt2 = std::pow(static_cast<double>(n), beta);
        l2 += rt2;
        if (n >= next) {
            TrajectorySample s;
            s.n = n;
            s.V = 0.0;
            s.log_r2 = beta * std::log(static_cast<double>(n)) + gauss(rng);
            s.log_rt2 = s.log_r2;
            s.theta = 0.0;
            s.l2_prefix = l2;
            traj.samples.push_back(s);
            next = std::max(n + 1, static_cast<std::int64_t>(std::ceil(n * 1.05)));
        }
        prev_n = static_cast<double>(n);
    }
    (void)prev_n;
    return traj;
}

}  // namespace

TEST_CASE("fit recovers a synthetic slope") {
    Trajectory traj = synthetic(-3.0, 0.01, 100000, 77);
    DecayReport rep = fit_decay(traj, 100, 100000);
    CHECK(std::abs(rep.beta + 3.0) <= 0.01);
    CHECK(rep.verdict == Verdict::Ell2);
}

TEST_CASE("flat trajectory fits zero slope") {
    auto V = [](std::int64_t) { return 0.0; };
    Trajectory traj = integrate(V, 0.7, BoundaryCondition{0.8}, 200000);
    DecayReport rep = fit_decay(traj, 1000, 200000);
    CHECK(std::abs(rep.beta) <= 0.05);
    CHECK(rep.verdict == Verdict::NotEll2);
}

TEST_CASE("fit is shift equivariant") {
    Trajectory traj = synthetic(-1.7, 0.05, 50000, 78);
    DecayReport a = fit_decay(traj, 100, 50000);
    for (auto& s : traj.samples) s.log_r2 += 42.0;
    DecayReport b = fit_decay(traj, 100, 50000);
    CHECK(std::abs(a.beta - b.beta) <= 1e-12);
}

TEST_CASE("fit preconditions") {
    Trajectory traj = synthetic(-1.0, 0.0, 2000, 79);
    CHECK_THROWS_AS(fit_decay(traj, 1000, 2000), DomainError);  // range too narrow
}

TEST_CASE("verdict trichotomy") {
    // decisive decay
    CHECK(fit_decay(synthetic(-2.0, 0.02, 200000, 80), 100, 200000).verdict ==
          Verdict::Ell2);
    // decisive non-decay
    CHECK(fit_decay(synthetic(-0.5, 0.02, 200000, 81), 100, 200000).verdict ==
          Verdict::NotEll2);
    // borderline slope: slow partial sums keep it inconclusive
    Trajectory mid = synthetic(-1.05, 0.02, 200000, 82);
    DecayReport rep = fit_decay(mid, 100, 200000);
    CHECK(rep.verdict == Verdict::Inconclusive);
}

TEST_CASE("sum rule") {
    SumRuleResult empty = sum_rule_check({}, 1.0);
    CHECK(empty.pass);
    CHECK(empty.lhs == 0.0);

    SumRuleResult near_edge = sum_rule_check({1.9999}, 0.1);
    CHECK(near_edge.pass);

    // monotone: adding an energy only grows the lhs
    SumRuleResult one = sum_rule_check({1.0}, 2.0);
    SumRuleResult two = sum_rule_check({1.0, -0.6}, 2.0);
    CHECK(two.lhs > one.lhs);
    CHECK(one.rhs == two.rhs);

    CHECK_THROWS_AS(sum_rule_check({2.5}, 1.0), DomainError);
}

TEST_CASE("oscillatory sums on free evolution") {
    double k = (std::sqrt(5.0) - 1.0) / 2.0;
    double E = energy_of_k(k);
    auto V = [](std::int64_t) { return 0.0; };
    IntegrateOptions opt;
    opt.record_theta_dense = true;
    Trajectory traj = integrate(V, E, BoundaryCondition{0.4}, 200000, opt);
    OscillatorySums sums = oscillatory_sums(traj, nullptr, 200000);
    double supS1 = 0.0;
    for (const auto& [n, s] : sums.S1) supS1 = std::max(supS1, std::abs(s));
    CHECK(supS1 <= 2.0);
    CHECK(sums.diag1 <= 0.2);
}

TEST_CASE("oscillatory sums hypothesis gates") {
    double k1 = 0.3;
    double E1 = energy_of_k(k1);
    auto V = [](std::int64_t) { return 0.0; };
    IntegrateOptions opt;
    opt.record_theta_dense = true;
    Trajectory t1 = integrate(V, E1, BoundaryCondition{0.4}, 1000, opt);
    Trajectory t2 = integrate(V, -E1, BoundaryCondition{0.4}, 1000, opt);  // k2 = 1 - k1
    CHECK_THROWS_AS(oscillatory_sums(t1, &t2, 1000), DomainError);
    Trajectory t3 = integrate(V, E1, BoundaryCondition{0.9}, 1000, opt);
    CHECK_THROWS_AS(oscillatory_sums(t1, &t3, 1000), DomainError);  // same k

    Trajectory undense = integrate(V, E1, BoundaryCondition{0.4}, 1000);
    CHECK_THROWS_AS(oscillatory_sums(undense, nullptr, 1000), DomainError);
}

TEST_CASE("oscillatory sums under a WvN potential at two energies") {
    // potential resonant at k = 0.37; probe two non-resonant energies
    auto V = [](std::int64_t n) {
        return n >= 1 ? wvn_value(2.0, 0.37, 0.5, 0, n) : 0.0;
    };
    IntegrateOptions opt;
    opt.record_theta_dense = true;
    double E1 = energy_of_k(0.3), E2 = energy_of_k(0.41);
    Trajectory t1 = integrate(V, E1, BoundaryCondition{0.4}, 1000000, opt);
    Trajectory t2 = integrate(V, E2, BoundaryCondition{1.0}, 1000000, opt);
    OscillatorySums sums = oscillatory_sums(t1, &t2, 1000000);
    CHECK(sums.diag1 <= 0.2);
    CHECK(sums.diag2 <= 0.2);
}
