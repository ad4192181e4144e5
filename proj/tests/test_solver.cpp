#include <doctest.h>

#include <cmath>
#include <random>

#include "embedev/errors.hpp"
#include "embedev/potentials.hpp"
#include "embedev/solver.hpp"
#include "embedev/util.hpp"

using namespace embedev;

TEST_CASE("free evolution is bounded") {
    auto V = [](std::int64_t) { return 0.0; };
    double E = 2.0 * std::cos(kPi * 0.37);
    Trajectory traj = integrate(V, E, BoundaryCondition{0.4}, 100000);
    double lo = 1e300, hi = -1e300;
    for (const auto& s : traj.samples) {
        lo = std::min(lo, s.log_rt2);
        hi = std::max(hi, s.log_rt2);
    }
    CHECK(hi - lo <= 6.0);
    CHECK(traj.prufer_valid);
}

TEST_CASE("Pruefer channel vs direct recursion") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> kd(0.15, 0.85), ud(-1.0, 1.0), td(0.0, kPi);
    for (int rep = 0; rep < 10; ++rep) {
        double k = kd(rng);
        double E = energy_of_k(k);
        std::vector<double> V(10001, 0.0);
        for (size_t n = 1; n < V.size(); ++n) {
            V[n] = 0.1 * ud(rng) / (1.0 + static_cast<double>(n));
        }
        Trajectory traj = integrate(potential_from_vector(V), E, BoundaryCondition{td(rng)},
                                    10000);
        REQUIRE(traj.prufer_valid);
        for (const auto& s : traj.samples) {
            // the two channels measure the same solution
            PruferPoint p = prufer_from_solution(s.u_prev, s.u_cur, k);
            double log_r2_direct = s.log_rt2 + 2.0 * std::log(p.r);
            CHECK(std::abs(log_r2_direct - s.log_r2) <= 1e-8);
            CHECK(circle_dist(p.theta_frac, frac(s.theta)) <= 1e-8);
        }
    }
}

TEST_CASE("renormalized and raw recursions agree on ratios") {
    double k = 0.29;
    double E = energy_of_k(k);
    std::vector<double> V(1001, 0.0);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (size_t n = 1; n < V.size(); ++n) V[n] = 0.2 * ud(rng) / (1.0 + n);

    BoundaryCondition bc{0.7};
    IntegrateOptions opt;
    opt.sample_ratio = 1.0;  // dense samples
    Trajectory traj = integrate(potential_from_vector(V), E, bc, 1000, opt);

    double u0 = bc.u0(), u1 = bc.u1();
    std::vector<double> u(1001);
    u[0] = u0;
    u[1] = u1;
    for (std::int64_t n = 1; n < 1000; ++n) {
        u[n + 1] = (E - V[n]) * u[n] - u[n - 1];
    }
    for (const auto& s : traj.samples) {
        if (s.n < 2) continue;
        // scale-free comparison: sine of the angle between the two pairs
        double norm = std::hypot(u[s.n - 1], u[s.n]);
        double cross = (u[s.n - 1] * s.u_cur - u[s.n] * s.u_prev) / norm;
        CHECK(std::abs(cross) <= 1e-12);
    }
}

TEST_CASE("Wronskian is conserved") {
    double k = 0.37;
    double E = energy_of_k(k);
    auto V = [](std::int64_t n) {
        return n >= 1 ? wvn_value(0.3, 0.61, 0.2, 0, n) : 0.0;
    };
    double u0 = std::cos(0.3), u1 = std::sin(0.3);
    double w0 = std::cos(1.2), w1 = std::sin(1.2);
    double W0 = 0.0;
    bool first = true;
    double worst = 0.0;
    for (std::int64_t n = 1; n < 100000; ++n) {
        double u2 = (E - V(n)) * u1 - u0;
        double w2 = (E - V(n)) * w1 - w0;
        double W = u2 * w1 - u1 * w2;
        if (first) {
            W0 = W;
            first = false;
        } else {
            worst = std::max(worst, std::abs(W - W0) / std::abs(W0));
        }
        u0 = u1;
        u1 = u2;
        w0 = w1;
        w1 = w2;
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("forward-backward round trip") {
    double k = 0.41;
    double E = energy_of_k(k);
    std::vector<double> V(10002, 0.0);
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (size_t n = 1; n < V.size(); ++n) V[n] = 0.3 * ud(rng) / (1.0 + n);
    auto Vfn = potential_from_vector(V);

    BoundaryCondition bc{0.9};
    double u_prev = bc.u0(), u_cur = bc.u1();
    // forward raw to n = 10001 while tracking the normalized pair scale
    double log_scale = 0.0;
    for (std::int64_t n = 1; n <= 10000; ++n) {
        double u_next = (E - Vfn(n)) * u_cur - u_prev;
        double m = std::hypot(u_cur, u_next);
        log_scale += std::log(m);
        u_prev = u_cur / m;
        u_cur = u_next / m;
    }
    // integrate back down and compare the recovered boundary direction
    Trajectory back = integrate_backward(Vfn, E, u_prev, u_cur, 10001, 1);
    const auto& s = back.samples.front();
    REQUIRE(s.n == 1);
    double want = pair_direction(bc.u0(), bc.u1());
    double got = pair_direction(s.u_prev, s.u_cur);
    double d = std::abs(want - got);
    d = std::min(d, kPi - d);
    CHECK(d <= 1e-9);
}

TEST_CASE("numeric failure carries the site") {
    std::vector<double> V(100, 0.0);
    V[50] = std::numeric_limits<double>::infinity();
    try {
        integrate(potential_from_vector(V), 1.0, BoundaryCondition{0.4}, 99);
        CHECK(false);
    } catch (const NumericFailure& e) {
        CHECK(e.site == 50);
    }
}
