#include <doctest.h>

#include <cmath>

#include "embedev/analysis.hpp"
#include "embedev/errors.hpp"
#include "embedev/potentials.hpp"
#include "embedev/util.hpp"

using namespace embedev;

TEST_CASE("twocase segment at the paper coupling") {
    // default M = 400: the subordinate branch contracts at least like
    // (n1/n0)^(-100); the forward channel saturates long before that, so
    // the contract is checked on the backward-integrated branch.
    double E = 1.0;
    TwocaseOptions opt;
    std::vector<double> avoid = {-0.6};
    TwocaseSegment seg = twocase_segment(E, avoid, 4000, 16000, 0, 0.7, opt);
    double ratio = std::log(16000.0 / 4000.0);
    CHECK(seg.log_contraction_sub <= std::log(10.0) - 100.0 * ratio);
    CHECK(seg.sub_dir_mismatch <= 1e-3);
    REQUIRE(seg.avoid_growth_log.size() == 1);
    CHECK(seg.avoid_growth_log[0] <= std::log(10.0));
}

TEST_CASE("twocase segment decay exponent at a modest coupling") {
    // with amplitude M/sin(pi k), the subordinate exponent is M/(4 sin^2 pi k)
    double E = 1.0;
    double k = k_of_energy(E);
    double sk = std::sin(kPi * k);
    TwocaseOptions opt;
    opt.M = 10.0 * sk * sk;  // exponent 2.5
    opt.check_contract = false;
    TwocaseSegment seg = twocase_segment(E, {}, 2000, 64000, 0, 0.4, opt);
    double beta = -seg.log_contraction_sub / std::log(64000.0 / 2000.0);
    CHECK(beta == doctest::Approx(2.5).epsilon(0.10));
    // forward channel achieves the same contraction at this contrast
    CHECK(seg.log_contraction_fwd ==
          doctest::Approx(seg.log_contraction_sub).epsilon(0.05));
}

TEST_CASE("twocase rejects resonance clashes") {
    CHECK_THROWS_AS(twocase_segment(0.0, {}, 100, 200, 0, 0.3, {}), ConstructionImpossible);
    CHECK_THROWS_AS(twocase_segment(1.0, {-1.0}, 100, 200, 0, 0.3, {}),
                    ConstructionImpossible);
    CHECK_THROWS_AS(twocase_segment(1.0, {1.0}, 100, 200, 0, 0.3, {}),
                    ConstructionImpossible);
}

TEST_CASE("glue validation") {
    CHECK_THROWS_AS(glue_multi({{1.0, 0.3}, {-1.0, 0.4}}, HSpec::none(), 10000, {}),
                    DomainError);
    // E = 0 puts 0 = E + E into A + A
    CHECK_THROWS_AS(glue_multi({{0.0, 0.3}}, HSpec::none(), 10000, {}), DomainError);
    CHECK_THROWS_AS(glue_multi({}, HSpec::none(), 10000, {}), DomainError);
}

TEST_CASE("glue two targets at desk scale") {
    GlueOptions opt;
    opt.store_potential = true;
    GlueResult res = glue_multi({{1.0, 0.3}, {-0.6, 1.1}}, HSpec::none(), 200000, opt);
    REQUIRE(res.trajectories.size() == 2);
    REQUIRE(!res.schedule.empty());

    // every committed segment beat the growth of the other target
    for (size_t i = 0; i + 1 < res.schedule.size(); ++i) {
        const auto& s = res.schedule[i];
        CHECK(s.served_log_contraction <=
              -(std::log(2.0) + s.max_other_log_growth) + 1e-9);
    }
    // both targets decay over the run
    for (const auto& traj : res.trajectories) {
        DecayReport rep = fit_decay(traj, 1000, 200000, FitChannel::LogRt2);
        CHECK(rep.beta < -1.5);
    }
    // envelope O(1/n): recorded constant is finite and modest
    CHECK(res.max_envelope <= 4.0 * opt.beta_target * 1.05);

    // the potential is reproducible from the schedule
    PotentialSpec spec;
    spec.variant = PotentialSpec::Variant::MultiSegment;
    for (const auto& s : res.schedule) {
        MultiSegmentParam p;
        p.E = res.targets[static_cast<size_t>(s.target)].E;
        p.theta0 = res.targets[static_cast<size_t>(s.target)].theta0;
        p.phi = s.phi;
        p.amp = s.amp;
        p.k = s.k;
        p.n0 = s.n0;
        p.n1 = s.n1;
        p.b = s.b;
        spec.segments.push_back(p);
    }
    std::vector<double> regen = spec.realize(200000);
    REQUIRE(regen.size() == res.potential.size());
    for (size_t n = 0; n < regen.size(); ++n) {
        CHECK(regen[n] == res.potential[n]);
    }
}

TEST_CASE("single glue target degenerates to a segment chain") {
    GlueResult res = glue_multi({{1.0, 0.3}}, HSpec::none(), 100000, {});
    REQUIRE(res.trajectories.size() == 1);
    DecayReport rep = fit_decay(res.trajectories[0], 1000, 100000, FitChannel::LogRt2);
    CHECK(rep.verdict == Verdict::Ell2);
}

TEST_CASE("glue with a slowly growing envelope") {
    GlueOptions opt;
    opt.beta_target = 2.0;
    GlueResult res =
        glue_multi({{1.0, 0.3}, {-0.6, 1.1}, {0.2, 0.7}}, HSpec::log_growth(), 200000, opt);
    CHECK(res.max_envelope_over_h <= 1.0);
    // all three targets eventually activate at this scale
    std::vector<bool> served(3, false);
    for (const auto& s : res.schedule) served[static_cast<size_t>(s.target)] = true;
    CHECK(served[0]);
    CHECK(served[1]);
    CHECK(served[2]);
}
