#include <doctest.h>

#include <cmath>

#include "cc_oracle.hpp"
#include "dartsim/ccalgos.hpp"
#include "dartsim/rng.hpp"

using namespace dartsim;

namespace {
bool close12(double a, double b) {
    double denom = std::max({std::fabs(a), std::fabs(b), 1e-30});
    return std::fabs(a - b) / denom <= 1e-12;
}
}  // namespace

TEST_SUITE("ccalgos") {

TEST_CASE("dcqcn cnp cut at alpha=1 halves the rate") {
    DcqcnParams p;
    DcqcnRpState s{10e9, 10e9, 1.0, 3};
    dcqcn_on_cnp(s, p);
    CHECK(s.rt == 10e9);
    CHECK(s.rc == 5e9);
    CHECK(s.alpha == doctest::Approx(1.0));  // (1-g)*1 + g
    CHECK(s.stage == 0);
}

TEST_CASE("dcqcn cnp cut at alpha=0.5") {
    DcqcnParams p;
    DcqcnRpState s{8e9, 9e9, 0.5, 7};
    dcqcn_on_cnp(s, p);
    CHECK(s.rt == 8e9);
    CHECK(s.rc == doctest::Approx(6e9));
    CHECK(s.alpha == doctest::Approx((1.0 - p.g) * 0.5 + p.g));
}

TEST_CASE("five fast-recovery events walk rc toward rt") {
    DcqcnParams p;
    DcqcnRpState s{5e9, 10e9, 0.5, 0};
    dcqcn_stage_event(s, p);
    CHECK(s.rc == doctest::Approx(7.5e9));
    for (int i = 0; i < 4; ++i) dcqcn_stage_event(s, p);
    CHECK(s.rc == doctest::Approx(9.84375e9));
    CHECK(s.rt == 10e9);  // fast recovery leaves the target alone
    CHECK(s.stage == 5);
}

TEST_CASE("additive then hyper stages raise the target, capped at line") {
    DcqcnParams p;
    DcqcnRpState s{5e9, 6e9, 0.5, 5};
    dcqcn_stage_event(s, p);  // stage 6: additive
    CHECK(s.rt == doctest::Approx(6e9 + 40e6));
    for (int i = 0; i < 5; ++i) dcqcn_stage_event(s, p);  // stages 7..11
    CHECK(s.stage == 11);
    // Stage 11 was hyper: four additive bumps then one hyper bump, capped.
    CHECK(s.rt == doctest::Approx(std::min(10e9, 6e9 + 5 * 40e6 + 400e6)));
    CHECK(s.rc <= 10e9);
}

TEST_CASE("increase events at line rate are no-ops") {
    DcqcnParams p;
    DcqcnRpState s{10e9, 10e9, 0.2, 20};
    for (int i = 0; i < 10; ++i) dcqcn_on_timer(s, p);
    CHECK(s.rc == 10e9);
    CHECK(s.rt == 10e9);
}

TEST_CASE("timer without cnp decays alpha") {
    DcqcnParams p;
    DcqcnRpState s{5e9, 5e9, 0.5, 0};
    dcqcn_on_timer(s, p);
    CHECK(s.alpha == doctest::Approx(0.5 * (1.0 - p.g)));
}

TEST_CASE("cnp floor at min rate") {
    DcqcnParams p;
    DcqcnRpState s{p.min_rate_bps, p.min_rate_bps, 1.0, 0};
    dcqcn_on_cnp(s, p);
    CHECK(s.rc == p.min_rate_bps);
}

TEST_CASE("timely additive step below t_low") {
    TimelyParams p;
    TimelyState s{5e9, 0.0, 40 * kNsPerUs, 0};
    timely_on_completion(s, p, 30 * kNsPerUs);
    CHECK(s.rate == doctest::Approx(5e9 + 1e6));
}

TEST_CASE("timely multiplicative cut above t_high") {
    TimelyParams p;
    TimelyState s{5e9, 0.0, 900 * kNsPerUs, 0};
    timely_on_completion(s, p, 1000 * kNsPerUs);
    // 1 - 0.8 * (1 - 500/1000) = 0.6
    CHECK(s.rate == doctest::Approx(5e9 * 0.6));
}

TEST_CASE("timely gradient branches and hyper increase") {
    TimelyParams p;
    TimelyState s{1e9, 0.0, 0, 0};
    timely_on_completion(s, p, 100 * kNsPerUs);  // anchor only
    CHECK(s.rate == 1e9);
    // Falling RTT: negative gradient, additive; fifth consecutive goes hyper.
    SimTime rtt = 100 * kNsPerUs;
    double expect = 1e9;
    for (int i = 1; i <= 6; ++i) {
        rtt -= 2 * kNsPerUs;
        timely_on_completion(s, p, rtt);
        expect += (i >= p.hai_after ? p.hai_mult : 1) * p.add_step_bps;
        CHECK(s.rate == doctest::Approx(expect));
    }
    // Rising RTT within band: positive gradient, multiplicative decrease.
    timely_on_completion(s, p, rtt + 40 * kNsPerUs);
    CHECK(s.rate < expect);
    CHECK(s.nonpos_gradient == 0);
}

TEST_CASE("timely clamps to [min_rate, line_rate]") {
    TimelyParams p;
    TimelyState hi{p.line_rate_bps, -1000.0, 100 * kNsPerUs, 10};
    timely_on_completion(hi, p, 99 * kNsPerUs);
    CHECK(hi.rate == p.line_rate_bps);
    TimelyState lo{p.min_rate_bps, 0.0, 100 * kNsPerUs, 0};
    timely_on_completion(lo, p, 5000 * kNsPerUs);
    CHECK(lo.rate == p.min_rate_bps);
}

TEST_CASE("dcqcn matches the independent oracle over randomized traces") {
    DcqcnParams p;
    RngStream rng(2024, 77);
    for (int trial = 0; trial < 1000; ++trial) {
        DcqcnRpState s;
        s.rc = 1e8 + rng.next_unit() * 9.9e9;
        s.rt = 1e8 + rng.next_unit() * 9.9e9;
        s.alpha = rng.next_unit();
        s.stage = static_cast<int>(rng.next_below(14));
        oracle::DcqcnVars v{s.rc, s.rt, s.alpha, s.stage};
        for (int step = 0; step < 20; ++step) {
            switch (rng.next_below(3)) {
                case 0:
                    dcqcn_on_cnp(s, p);
                    oracle::dcqcn_cnp(v, p.g, p.min_rate_bps);
                    break;
                case 1:
                    dcqcn_on_timer(s, p);
                    oracle::dcqcn_timer(v, p.g, p.rate_ai_bps, p.rate_hai_bps, p.fr_stages,
                                        p.ai_stages, p.line_rate_bps);
                    break;
                default:
                    dcqcn_on_bytes(s, p);
                    oracle::dcqcn_stage(v, p.rate_ai_bps, p.rate_hai_bps, p.fr_stages,
                                        p.ai_stages, p.line_rate_bps);
            }
            REQUIRE(close12(s.rc, v.rc));
            REQUIRE(close12(s.rt, v.rt));
            REQUIRE(close12(s.alpha, v.alpha));
            REQUIRE(s.stage == v.stage);
        }
    }
}

TEST_CASE("timely matches the independent oracle over randomized traces") {
    TimelyParams p;
    RngStream rng(555, 13);
    for (int trial = 0; trial < 1000; ++trial) {
        TimelyState s;
        s.rate = 1e8 + rng.next_unit() * 9.9e9;
        oracle::TimelyVars v{s.rate, 0.0, 0, 0};
        for (int step = 0; step < 30; ++step) {
            SimTime rtt = 10 * kNsPerUs + static_cast<SimTime>(rng.next_below(990 * kNsPerUs));
            timely_on_completion(s, p, rtt);
            oracle::timely_sample(v, rtt, p.t_low, p.t_high, p.add_step_bps, p.beta,
                                  p.ewma_alpha, p.hai_after, p.hai_mult, p.min_rtt,
                                  p.min_rate_bps, p.line_rate_bps);
            REQUIRE(close12(s.rate, v.rate));
            REQUIRE(close12(s.rtt_diff, v.rtt_diff));
        }
    }
}

TEST_CASE("timely window floors at one packet") {
    TimelyParams p;
    TimelyState s{p.min_rate_bps, 0, 0, 0};
    CHECK(timely_window_bytes(s, p, 1000) >= 1000);
    s.rate = 10e9;
    // 10G * 65us / 8 = 81250 bytes
    CHECK(timely_window_bytes(s, p, 1000) == 81250);
}

}  // TEST_SUITE
