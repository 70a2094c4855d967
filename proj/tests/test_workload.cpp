#include <algorithm>
#include <cmath>
#include <set>

#include "dartsim/workload.hpp"
#include "doctest.h"

using namespace dartsim;

namespace {

ExperimentConfig base_cfg() {
    ExperimentConfig cfg;
    cfg.topo.num_hosts = 16;
    cfg.topo.oversubscription = 1.0;
    cfg.wl.incast_degree = 8;
    return cfg;
}

}  // namespace

TEST_SUITE("workload") {
    TEST_CASE("offered short bytes track load * mix within noise") {
        ExperimentConfig cfg = base_cfg();
        cfg.wl.load = 0.4;
        cfg.wl.short_frac = 0.4;
        cfg.wl.duration = 200 * kNsPerMs;
        const Schedule s = generate_schedule(cfg, 1);

        // Expected short bytes/ns: load * hosts * rate * mix / 8.
        const double agg = cfg.wl.load * 16 * cfg.topo.link_rate_bps;
        const double want_short =
            agg * cfg.wl.short_frac * static_cast<double>(cfg.wl.duration) / 8e9;
        const auto got = static_cast<double>(s.short_bytes());
        CHECK(std::abs(got - want_short) / want_short < 0.03);
    }

    TEST_CASE("offered long bytes track load * (1 - mix) within noise") {
        ExperimentConfig cfg = base_cfg();
        cfg.wl.load = 0.4;
        cfg.wl.short_frac = 0.2;
        cfg.wl.long_size = 10'000'000;  // small longs: enough arrivals to average
        cfg.wl.duration = 2 * kNsPerSec;
        const Schedule s = generate_schedule(cfg, 1);

        const double agg = cfg.wl.load * 16 * cfg.topo.link_rate_bps;
        const double want_long = agg * (1.0 - cfg.wl.short_frac) *
                                 static_cast<double>(cfg.wl.duration) / 8e9;
        const auto got = static_cast<double>(s.total_bytes() - s.short_bytes());
        // ~1280 expected arrivals: 4 sigma ~= 11%.
        CHECK(std::abs(got - want_long) / want_long < 0.12);
    }

    TEST_CASE("pure-short and pure-long mixes are valid edge cases") {
        ExperimentConfig cfg = base_cfg();
        cfg.wl.duration = 10 * kNsPerMs;
        cfg.wl.short_frac = 1.0;
        Schedule s = generate_schedule(cfg, 3);
        CHECK(!s.msgs.empty());
        CHECK(s.short_bytes() == s.total_bytes());

        cfg.wl.short_frac = 0.0;
        cfg.wl.long_size = 50'000'000;
        s = generate_schedule(cfg, 3);
        CHECK(s.groups.empty());
        CHECK(s.short_bytes() == 0);
    }

    TEST_CASE("groups have the right shape") {
        ExperimentConfig cfg = base_cfg();
        cfg.wl.duration = 20 * kNsPerMs;
        const Schedule s = generate_schedule(cfg, 5);
        REQUIRE(!s.groups.empty());
        for (const auto& g : s.groups) {
            CHECK(g.senders.size() == static_cast<std::size_t>(cfg.wl.incast_degree));
            std::set<NodeId> uniq(g.senders.begin(), g.senders.end());
            CHECK(uniq.size() == g.senders.size());
            CHECK(uniq.count(g.receiver) == 0);
            CHECK(g.receiver >= 0);
            CHECK(g.receiver < 16);
        }
        std::set<std::int64_t> sizes(cfg.wl.short_sizes.begin(), cfg.wl.short_sizes.end());
        for (const auto& m : s.msgs) {
            CHECK(m.src != m.dst);
            CHECK(m.start_time >= 0);
            if (m.group != 0) {
                CHECK(sizes.count(m.size_bytes) == 1);
                CHECK(m.cls == FlowClass::kShort);
                CHECK(m.start_time < cfg.wl.duration + cfg.wl.jitter_max);
                const IncastGroup* g = s.group_of(m.group);
                REQUIRE(g != nullptr);
                CHECK(g->receiver == m.dst);
                CHECK(std::find(g->senders.begin(), g->senders.end(), m.src) !=
                      g->senders.end());
            } else {
                // in-window arrivals are full-size; t=0 carries residues too
                if (m.start_time > 0) CHECK(m.size_bytes == cfg.wl.long_size);
                CHECK(m.size_bytes >= 1);
                CHECK(m.size_bytes <= cfg.wl.long_size);
                CHECK(m.cls == FlowClass::kLong);
                CHECK(m.start_time < cfg.wl.duration);
            }
        }
        // sorted by (start_time, id), ids unique and 1-based
        std::set<MsgId> ids;
        for (std::size_t i = 0; i < s.msgs.size(); ++i) {
            CHECK(ids.insert(s.msgs[i].id).second);
            CHECK(s.msgs[i].id >= 1);
            if (i > 0) {
                const Message &a = s.msgs[i - 1], &b = s.msgs[i];
                CHECK((a.start_time < b.start_time ||
                       (a.start_time == b.start_time && a.id < b.id)));
            }
        }
    }

    TEST_CASE("same seed reproduces the schedule, different seed does not") {
        ExperimentConfig cfg = base_cfg();
        cfg.wl.duration = 20 * kNsPerMs;
        const std::string a = schedule_jsonl(generate_schedule(cfg, 11));
        const std::string b = schedule_jsonl(generate_schedule(cfg, 11));
        const std::string c = schedule_jsonl(generate_schedule(cfg, 12));
        CHECK(a == b);
        CHECK(a != c);
    }

    TEST_CASE("incast degree must leave room for a receiver") {
        ExperimentConfig cfg = base_cfg();
        cfg.topo.num_hosts = 8;
        cfg.wl.incast_degree = 8;
        CHECK_THROWS_AS(generate_schedule(cfg, 1), ConfigError);
    }

    TEST_CASE("long flows are stationary from t=0 when runs are short") {
        // 1 GB at 10 Gbps serves in 800 ms, far beyond a 30 ms run, so the
        // steady-state concurrency load*hosts*(1-mix) = 30.7 must already be
        // in flight at t=0 as residual-size flows.
        ExperimentConfig cfg;
        cfg.topo.num_hosts = 128;
        cfg.topo.oversubscription = 1.0;
        cfg.wl.load = 0.4;
        cfg.wl.short_frac = 0.4;
        cfg.wl.duration = 30 * kNsPerMs;
        const Schedule s = generate_schedule(cfg, 5);
        int residues = 0, fresh = 0;
        for (const auto& m : s.msgs) {
            if (m.cls != FlowClass::kLong) continue;
            CHECK(m.size_bytes >= 1);
            CHECK(m.size_bytes <= cfg.wl.long_size);
            if (m.start_time == 0)
                ++residues;
            else
                ++fresh;
        }
        CHECK(residues >= 9);   // Poisson(30.7) +/- 4 sigma
        CHECK(residues <= 53);
        CHECK(fresh <= 6);      // in-window arrivals: mean 0.46

        // Transmissible bytes inside the window track the load within the
        // concurrency noise (sigma/mean ~ 2.5% over 20 seeds).
        double ratio_sum = 0;
        const double budget = cfg.wl.load * 128 * cfg.topo.link_rate_bps *
                              static_cast<double>(cfg.wl.duration) / 8e9;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const Schedule x = generate_schedule(cfg, seed);
            ratio_sum +=
                static_cast<double>(x.offered_bytes(cfg.wl.duration, cfg.topo.link_rate_bps)) /
                budget;
        }
        CHECK(ratio_sum / 20 > 0.85);
        CHECK(ratio_sum / 20 < 1.15);
    }

    TEST_CASE("zero jitter pins group members to the group start") {
        ExperimentConfig cfg = base_cfg();
        cfg.wl.jitter_max = 0;
        cfg.wl.duration = 20 * kNsPerMs;
        const Schedule s = generate_schedule(cfg, 2);
        REQUIRE(!s.groups.empty());
        for (const auto& g : s.groups) {
            SimTime t0 = -1;
            for (const auto& m : s.msgs)
                if (m.group == g.id) {
                    if (t0 < 0) t0 = m.start_time;
                    CHECK(m.start_time == t0);
                }
        }
    }
}
