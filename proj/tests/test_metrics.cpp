#include <sstream>

#include "dartsim/config.hpp"
#include "dartsim/metrics.hpp"
#include "doctest.h"

using namespace dartsim;

TEST_SUITE("metrics") {
    TEST_CASE("nearest-rank percentile") {
        CHECK(percentile({}, 0.5) == 0);
        CHECK(percentile({5000}, 0.5) == 5000);
        CHECK(percentile({5000}, 0.99) == 5000);
        // ceil(0.5*4) = 2nd, ceil(0.99*4) = 4th of the sorted values
        CHECK(percentile({4000, 1000, 3000, 2000}, 0.5) == 2000);
        CHECK(percentile({4000, 1000, 3000, 2000}, 0.99) == 4000);
        CHECK(percentile({4000, 1000, 3000, 2000}, 0.25) == 1000);
        std::vector<SimTime> v;
        for (SimTime i = 1; i <= 100; ++i) v.push_back(i);
        CHECK(percentile(v, 0.50) == 50);
        CHECK(percentile(v, 0.99) == 99);
        CHECK(percentile(v, 0.999) == 100);
        CHECK(percentile(v, 1.0) == 100);
    }

    TEST_CASE("summarize aggregates delivery and fct accounting") {
        Metrics m;
        // Four short packets, one marked, one detoured 6 hops vs 4.
        m.on_delivered_data(1000, 1000, 4, 4, FlowClass::kShort, false);
        m.on_delivered_data(1000, 1000, 4, 4, FlowClass::kShort, true);
        m.on_delivered_data(1000, 1000, 6, 4, FlowClass::kShort, false);
        m.on_delivered_data(1000, 1000, 4, 4, FlowClass::kShort, false);
        // One long packet, never counted in the short stats.
        m.on_delivered_data(1000, 1000, 4, 4, FlowClass::kLong, true);

        for (int i = 0; i < 3; ++i) m.on_msg_started();
        m.on_fct({1, 0, 1, 2000, FlowClass::kShort, 0, 10'000, 4, 0});
        m.on_fct({2, 0, 1, 2000, FlowClass::kShort, 600'000, 20'000, 4, 0});
        m.on_fct({3, 2, 1, 8000, FlowClass::kShort, 700'000, 30'000, 6, 1});

        // warmup 500us: msg 1 is excluded from percentiles but not the csv
        const RunSummary s = m.summarize("DART", 9, 1 * kNsPerMs, 500 * kNsPerUs);
        CHECK(s.scheme == "DART");
        CHECK(s.seed == 9);
        CHECK(s.msgs_started == 3);
        CHECK(s.msgs_completed == 3);
        CHECK(s.delivered_pkts == 5);
        // 5000 payload bytes in 1 ms
        CHECK(s.goodput_bps == doctest::Approx(5000.0 * 8e9 / 1e6));
        CHECK(s.ecn_short_frac_pct == doctest::Approx(25.0));
        // one of four shorts took 6/4 - 1 = 50% extra hops
        CHECK(s.path_dilation_pct == doctest::Approx(12.5));
        // byte-hops: 4+4+6+4+4 vs all-shortest 4*5
        CHECK(s.load_increase_pct == doctest::Approx(100.0 * (22.0 / 20.0 - 1.0)));
        REQUIRE(s.fct_short_by_size.count(2000) == 1);
        REQUIRE(s.fct_short_by_size.count(8000) == 1);
        CHECK(s.fct_short_by_size.at(2000).count == 1);
        CHECK(s.fct_short_by_size.at(2000).p50 == 20'000);
        CHECK(s.fct_short_by_size.at(8000).p99 == 30'000);
        CHECK(s.fct_short_all.count == 2);
        CHECK(s.fct_short_all.p50 == 20'000);
        CHECK(s.fct_short_all.p99 == 30'000);
        CHECK(s.audits_ok());

        std::ostringstream os;
        m.write_fct_csv(os);
        CHECK(os.str() ==
              "msg_id,src,dst,size,class,start_ns,fct_ns,hops,deflections\n"
              "1,0,1,2000,short,0,10000,4,0\n"
              "2,0,1,2000,short,600000,20000,4,0\n"
              "3,2,1,8000,short,700000,30000,6,1\n");
    }

    TEST_CASE("audits_ok flags every violation class") {
        Metrics m;
        RunSummary s = m.summarize("DCQCN", 1, 1000, 0);
        CHECK(s.audits_ok());
        m.on_seq_violation();
        CHECK(!m.summarize("DCQCN", 1, 1000, 0).audits_ok());
        Metrics m2;
        m2.on_token_bound_violation();
        CHECK(!m2.summarize("DCQCN", 1, 1000, 0).audits_ok());
        Metrics m3;
        m3.on_deflection(Lane::kEscape);  // escape-lane deflection is forbidden
        RunSummary s3 = m3.summarize("DART", 1, 1000, 0);
        CHECK(s3.escape_deflections == 1);
        CHECK(!s3.audits_ok());
        RunSummary s4;
        s4.conservation_ok = false;
        CHECK(!s4.audits_ok());
    }

    TEST_CASE("rates csv is stable") {
        std::ostringstream os;
        write_rates_csv(os, {{100, 0, 2, 5e9}, {200, 1, 2, 10e9 / 3.0}});
        CHECK(os.str() ==
              "time_ns,src,dst,rate_bps\n"
              "100,0,2,5000000000\n"
              "200,1,2,3333333333\n");
    }

    TEST_CASE("summary json embeds the config echo") {
        Metrics m;
        RunSummary s = m.summarize("TIMELY", 4, 2000, 0);
        ExperimentConfig cfg;
        cfg.scheme = Scheme::kTimely;
        cfg.validate();
        const std::string j = summary_json(s, cfg);
        CHECK(j.find("\"scheme\": \"TIMELY\"") != std::string::npos);
        CHECK(j.find("\"config\"") != std::string::npos);
        CHECK(j.find("\"conservation_ok\": true") != std::string::npos);
        CHECK(j.back() == '\n');
    }
}
