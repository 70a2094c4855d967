#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dartsim/rng.hpp"
#include "dartsim/time.hpp"

namespace dartsim {

using NodeId = std::int32_t;
using PortId = std::int32_t;

enum class Tier { kHost, kTor, kAgg, kCore };

struct Link {
    NodeId peer = -1;
    PortId peer_port = -1;
};

struct NodeInfo {
    Tier tier = Tier::kHost;
    int pod = -1;  // pod for tor/agg, core group for cores, -1 for hosts
    std::vector<Link> ports;
};

struct TopologyParams {
    int num_hosts = 128;
    double oversubscription = 4.0;
    double link_rate_bps = 10e9;
    SimTime link_delay = 5 * kNsPerUs;
};

// Folded 3-tier Clos. Hosts occupy ids [0, num_hosts); switches follow
// (ToRs, then aggs, then cores). Every ToR keeps hosts_per_tor hosts and
// aggs_per_pod uplinks, one to each agg of its pod; aggs are non-blocking
// (tors_per_pod downlinks, as many core uplinks); core group j joins agg j
// of every pod. With oversubscription 1 and a small host count the fabric
// degenerates to a single ToR.
class Topology {
public:
    static Topology build(const TopologyParams& p);

    const TopologyParams& params() const { return params_; }
    int num_hosts() const { return params_.num_hosts; }
    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_switches() const { return num_nodes() - num_hosts(); }
    const NodeInfo& node(NodeId n) const { return nodes_[n]; }
    bool is_host(NodeId n) const { return n < params_.num_hosts; }

    int hosts_per_tor() const { return hosts_per_tor_; }
    int aggs_per_pod() const { return aggs_per_pod_; }
    int tors_per_pod() const { return tors_per_pod_; }
    int num_pods() const { return num_pods_; }
    int num_tors() const { return num_tors_; }
    int num_aggs() const { return num_aggs_; }
    int num_cores() const { return num_cores_; }

    NodeId host_tor(NodeId host) const;
    bool port_faces_host(NodeId sw, PortId p) const;

    // Equal-cost shortest next hops from switch `sw` toward host `dst`,
    // sorted by port index. Defined for every (switch, host) pair so a
    // misrouted packet can recover from anywhere.
    const std::vector<PortId>& ecmp_ports(NodeId sw, NodeId dst) const;

    // Escape next hop: lowest-index port of the ECMP set. The escape
    // relation is pure up*/down*, so its channel dependency graph is
    // acyclic; check_escape_acyclic verifies that at build time.
    PortId escape_port(NodeId sw, NodeId dst) const { return ecmp_ports(sw, dst)[0]; }

    int shortest_hops(NodeId src_host, NodeId dst_host) const;
    int max_hops() const;

    // Unloaded round trip between a farthest host pair: data packet out,
    // ack back.
    SimTime base_rtt(int data_bytes, int ack_bytes) const;

    void check_escape_acyclic() const;  // throws std::runtime_error on a cycle
    std::string audit_json() const;

private:
    TopologyParams params_;
    int hosts_per_tor_ = 0, aggs_per_pod_ = 0, tors_per_pod_ = 0, num_pods_ = 0;
    int num_tors_ = 0, num_aggs_ = 0, num_cores_ = 0;
    std::vector<NodeInfo> nodes_;
    // routes_[switch - num_hosts][dst]
    std::vector<std::vector<std::vector<PortId>>> routes_;

    void wire();
    void build_routes();
};

inline std::uint64_t ecmp_hash(NodeId src, NodeId dst, std::uint64_t flow_id,
                               std::uint64_t salt) {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(src) ^ splitmix64(salt));
    h = splitmix64(h ^ static_cast<std::uint64_t>(dst) * 0x9e3779b97f4a7c15ULL);
    return splitmix64(h ^ flow_id);
}

// Hash-selected member of the ECMP set; identical arguments always pick the
// identical port.
inline PortId ecmp_select(const Topology& topo, NodeId sw, NodeId src, NodeId dst,
                          std::uint64_t flow_id, std::uint64_t salt) {
    const auto& ports = topo.ecmp_ports(sw, dst);
    return ports[ecmp_hash(src, dst, flow_id, salt) % ports.size()];
}

}  // namespace dartsim
