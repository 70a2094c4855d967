#include <doctest.h>

#include <queue>
#include <set>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "dartsim/topology.hpp"

using namespace dartsim;

namespace {

// Independent BFS over the raw adjacency, used as the routing oracle.
std::vector<int> bfs_dist_to(const Topology& topo, NodeId dst) {
    std::vector<int> dist(topo.num_nodes(), -1);
    std::queue<NodeId> q;
    dist[dst] = 0;
    q.push(dst);
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop();
        for (const Link& l : topo.node(v).ports) {
            if (dist[l.peer] < 0) {
                dist[l.peer] = dist[v] + 1;
                q.push(l.peer);
            }
        }
    }
    return dist;
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("128-host 4:1 fabric shape and audit") {
    auto topo = Topology::build({128, 4.0, 10e9, 5 * kNsPerUs});
    CHECK(topo.hosts_per_tor() == 8);
    CHECK(topo.num_tors() == 16);
    CHECK(topo.num_aggs() == 8);
    CHECK(topo.num_cores() == 8);
    CHECK(topo.num_pods() == 4);
    CHECK(topo.max_hops() == 6);
    // ToR radix: 8 host ports + 2 uplinks.
    CHECK(topo.node(128).ports.size() == 10);
    auto audit = nlohmann::json::parse(topo.audit_json());
    CHECK(audit["oversubscription_audited"].get<double>() == doctest::Approx(4.0));
    CHECK(audit["escape_dependency_acyclic"].get<bool>());
    CHECK(audit["links"].get<int>() == 128 + 32 + 32);
}

TEST_CASE("paper-scale 1024-host fabric builds with 6-hop diameter") {
    auto topo = Topology::build({1024, 4.0, 10e9, 5 * kNsPerUs});
    CHECK(topo.num_tors() == 128);
    CHECK(topo.max_hops() == 6);
    CHECK(topo.shortest_hops(0, 1023) == 6);
    CHECK_NOTHROW(topo.check_escape_acyclic());
}

TEST_CASE("degenerate single-ToR star at 1:1") {
    auto topo = Topology::build({2, 1.0, 10e9, 5 * kNsPerUs});
    CHECK(topo.num_tors() == 1);
    CHECK(topo.num_aggs() == 0);
    CHECK(topo.shortest_hops(0, 1) == 2);
    CHECK(topo.max_hops() == 2);
    CHECK(topo.ecmp_ports(2, 1) == std::vector<PortId>{1});
}

TEST_CASE("unrealizable host count is rejected with a diagnostic") {
    CHECK_THROWS_AS(Topology::build({100, 4.0, 10e9, 5 * kNsPerUs}), std::runtime_error);
    CHECK_THROWS_AS(Topology::build({6, 4.0, 10e9, 5 * kNsPerUs}), std::runtime_error);
}

TEST_CASE("ECMP sets match the BFS shortest-path oracle everywhere") {
    auto topo = Topology::build({128, 4.0, 10e9, 5 * kNsPerUs});
    for (NodeId dst = 0; dst < topo.num_hosts(); dst += 7) {
        auto dist = bfs_dist_to(topo, dst);
        for (NodeId sw = topo.num_hosts(); sw < topo.num_nodes(); ++sw) {
            const auto& ecmp = topo.ecmp_ports(sw, dst);
            REQUIRE(!ecmp.empty());
            // Every ECMP member advances one hop; the set is exactly the
            // set of distance-reducing ports.
            std::set<PortId> expect;
            for (PortId p = 0; p < static_cast<PortId>(topo.node(sw).ports.size()); ++p) {
                if (dist[topo.node(sw).ports[p].peer] == dist[sw] - 1) expect.insert(p);
            }
            CHECK(std::set<PortId>(ecmp.begin(), ecmp.end()) == expect);
            // Escape next hop is the lowest-index member.
            CHECK(topo.escape_port(sw, dst) == *expect.begin());
        }
        for (NodeId src = 0; src < topo.num_hosts(); src += 11) {
            if (src == dst) continue;
            CHECK(topo.shortest_hops(src, dst) == dist[src]);
        }
    }
}

TEST_CASE("ECMP hash balances a 4-way set within 25% +- 3%") {
    auto topo = Topology::build({128, 4.0, 10e9, 5 * kNsPerUs});
    // Agg switch, destination in another pod: 4 core uplinks.
    NodeId agg = 128 + 16;
    NodeId dst = 127;  // pod 3, agg 0 is pod 0
    REQUIRE(topo.ecmp_ports(agg, dst).size() == 4);
    std::map<PortId, int> counts;
    const int kFlows = 10000;
    for (int f = 0; f < kFlows; ++f) {
        counts[ecmp_select(topo, agg, 0, dst, static_cast<std::uint64_t>(f), 12345)]++;
    }
    REQUIRE(counts.size() == 4);
    for (auto& [port, c] : counts) {
        double frac = static_cast<double>(c) / kFlows;
        CHECK(frac > 0.22);
        CHECK(frac < 0.28);
    }
    // Same inputs, same selection.
    CHECK(ecmp_select(topo, agg, 3, 99, 42, 7) == ecmp_select(topo, agg, 3, 99, 42, 7));
}

TEST_CASE("base RTT arithmetic at 10G/5us") {
    auto topo = Topology::build({128, 4.0, 10e9, 5 * kNsPerUs});
    // 6 hops each way: data 6*(5000+800), ack 6*(5000+52).
    CHECK(topo.base_rtt(1000, 64) == 6 * 5800 + 6 * 5052);
}

}  // TEST_SUITE
