#include <string>

#include "dartsim/config.hpp"
#include "doctest.h"

using namespace dartsim;

TEST_SUITE("config") {
    TEST_CASE("scheme names round-trip") {
        for (Scheme s : {Scheme::kDart, Scheme::kDartNoLookahead, Scheme::kDasrOnly,
                         Scheme::kIofdOnly, Scheme::kDcqcn, Scheme::kTimely,
                         Scheme::kPriqDcqcn})
            CHECK(scheme_from_string(scheme_name(s)) == s);
        CHECK_THROWS_AS(scheme_from_string("bogus"), ConfigError);
    }

    TEST_CASE("traits switch exactly the advertised mechanisms") {
        const SchemeTraits dart = traits_for(Scheme::kDart);
        CHECK(dart.dasr);
        CHECK(dart.lookahead);
        CHECK(dart.deflect);
        CHECK(dart.suppress);
        CHECK(dart.dcqcn);
        CHECK(!dart.timely);
        CHECK(!dart.priq);

        const SchemeTraits nola = traits_for(Scheme::kDartNoLookahead);
        CHECK(nola.dasr);
        CHECK(!nola.lookahead);
        CHECK(nola.deflect);

        const SchemeTraits dasr = traits_for(Scheme::kDasrOnly);
        CHECK(dasr.dasr);
        CHECK(!dasr.deflect);
        CHECK(dasr.suppress);

        const SchemeTraits iofd = traits_for(Scheme::kIofdOnly);
        CHECK(!iofd.dasr);
        CHECK(!iofd.lookahead);
        CHECK(iofd.deflect);
        CHECK(!iofd.suppress);
        CHECK(iofd.dcqcn);

        const SchemeTraits dcqcn = traits_for(Scheme::kDcqcn);
        CHECK(!dcqcn.dasr);
        CHECK(!dcqcn.deflect);
        CHECK(dcqcn.dcqcn);
        CHECK(!dcqcn.priq);

        const SchemeTraits timely = traits_for(Scheme::kTimely);
        CHECK(timely.timely);
        CHECK(!timely.dcqcn);
        CHECK(!timely.dasr);

        const SchemeTraits priq = traits_for(Scheme::kPriqDcqcn);
        CHECK(priq.priq);
        CHECK(priq.dcqcn);
        CHECK(!priq.deflect);
    }

    TEST_CASE("mix keywords map to short-byte fractions") {
        CHECK(mix_short_frac("typical") == doctest::Approx(0.4));
        CHECK(mix_short_frac("light") == doctest::Approx(0.2));
        CHECK(mix_short_frac("heavy") == doctest::Approx(0.6));
        CHECK_THROWS_AS(mix_short_frac("weird"), ConfigError);
    }

    TEST_CASE("defaults validate and sync the governor line rates") {
        ExperimentConfig cfg;
        cfg.topo.link_rate_bps = 25e9;
        cfg.validate();
        CHECK(cfg.dcqcn.line_rate_bps == 25e9);
        CHECK(cfg.timely.line_rate_bps == 25e9);
        CHECK(cfg.timely.min_rtt > 0);
    }

    TEST_CASE("validation names the offending field") {
        auto names = [](ExperimentConfig cfg, const char* needle) {
            try {
                cfg.validate();
            } catch (const ConfigError& e) {
                return std::string(e.what()).find(needle) != std::string::npos;
            }
            return false;
        };
        ExperimentConfig cfg;
        cfg.topo.num_hosts = 1;
        CHECK(names(cfg, "hosts"));

        cfg = ExperimentConfig{};
        cfg.wl.load = 0.0;
        CHECK(names(cfg, "load"));

        cfg = ExperimentConfig{};
        cfg.wl.incast_degree = 200;
        CHECK(names(cfg, "incast_degree"));

        cfg = ExperimentConfig{};
        cfg.sw.deflect_threshold = 30'000;  // must stay below the mark point
        CHECK(names(cfg, "deflect_threshold"));

        cfg = ExperimentConfig{};
        cfg.sw.capacity_bytes = 15'000;
        CHECK(names(cfg, "capacity"));

        cfg = ExperimentConfig{};
        cfg.seeds.clear();
        CHECK(names(cfg, "seeds"));
    }

    TEST_CASE("json text applies on top of defaults") {
        const ExperimentConfig cfg = load_config(R"({
            "scheme": "TIMELY",
            "hosts": 32,
            "oversubscription": 2,
            "load": 0.2,
            "mix": "heavy",
            "duration_ms": 5,
            "seeds": [3, 4],
            "switch": {"ecn_threshold_bytes": 30000},
            "nic": {"fsm_window_us": 50},
            "timely": {"t_high_us": 400}
        })");
        CHECK(cfg.scheme == Scheme::kTimely);
        CHECK(cfg.topo.num_hosts == 32);
        CHECK(cfg.topo.oversubscription == 2.0);
        CHECK(cfg.wl.load == 0.2);
        CHECK(cfg.wl.short_frac == doctest::Approx(0.6));
        CHECK(cfg.wl.duration == 5 * kNsPerMs);
        CHECK(cfg.seeds == std::vector<std::uint64_t>{3, 4});
        CHECK(cfg.sw.ecn_threshold == 30'000);
        CHECK(cfg.sw.capacity_bytes == 225'000);  // untouched default
        CHECK(cfg.nic.fsm_window == 50 * kNsPerUs);
        CHECK(cfg.timely.t_high == 400 * kNsPerUs);

        CHECK_THROWS_AS(load_config("{"), ConfigError);
        CHECK_THROWS_AS(load_config(R"({"mix": "nope"})"), ConfigError);
    }

    TEST_CASE("config echo reproduces the config") {
        ExperimentConfig cfg = load_config(R"({
            "scheme": "DASR_ONLY",
            "hosts": 64,
            "load": 0.6,
            "mix": 0.25,
            "seed": 42,
            "rate_trace": true,
            "dcqcn": {"timer_us": 60},
            "nic": {"rate_tau_us": 20}
        })");
        cfg.validate();
        const std::string echo = config_json(cfg);
        ExperimentConfig back = load_config(echo);
        back.validate();
        CHECK(config_json(back) == echo);
        CHECK(back.scheme == Scheme::kDasrOnly);
        CHECK(back.wl.short_frac == doctest::Approx(0.25));
        CHECK(back.seeds == std::vector<std::uint64_t>{42});
        CHECK(back.rate_trace == true);
        CHECK(back.dcqcn.timer_period == 60 * kNsPerUs);
        CHECK(back.nic.rate_tau == 20 * kNsPerUs);
    }
}
