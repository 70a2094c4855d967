#include "dartsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace dartsim {

namespace {

// Largest divisor of n that is <= sqrt(n), excluding 1.
int balanced_divisor(int n) {
    int best = 0;
    for (int q = 2; q * q <= n; ++q) {
        if (n % q == 0) best = q;
    }
    return best;
}

}  // namespace

Topology Topology::build(const TopologyParams& p) {
    if (p.num_hosts < 2) throw std::runtime_error("topology: num_hosts must be >= 2");
    if (p.oversubscription < 1.0)
        throw std::runtime_error("topology: oversubscription must be >= 1");

    Topology t;
    t.params_ = p;

    if (p.oversubscription == 1.0 && p.num_hosts <= 64) {
        // Single-ToR star: every host one hop from the switch.
        t.hosts_per_tor_ = p.num_hosts;
        t.aggs_per_pod_ = 0;
        t.tors_per_pod_ = 1;
        t.num_pods_ = 1;
    } else {
        bool solved = false;
        for (int a : {2, 4, 3, 8, 6, 5, 7, 12, 16}) {
            double hd = p.oversubscription * a;
            int h = static_cast<int>(std::llround(hd));
            if (std::abs(hd - h) > 1e-9 || h < 2 || h > 64) continue;
            if (p.num_hosts % h != 0) continue;
            int tors = p.num_hosts / h;
            if (tors < 4) continue;
            int per_pod = balanced_divisor(tors);
            if (per_pod == 0) continue;  // prime ToR count, no pod split
            t.hosts_per_tor_ = h;
            t.aggs_per_pod_ = a;
            t.tors_per_pod_ = per_pod;
            t.num_pods_ = tors / per_pod;
            solved = true;
            break;
        }
        if (!solved) {
            throw std::runtime_error(
                "topology: no realizable 3-tier Clos for num_hosts=" +
                std::to_string(p.num_hosts) + " oversubscription=" +
                std::to_string(p.oversubscription) +
                " (need num_hosts = (oversubscription*A) * tors with A >= 2 and a "
                "composite ToR count >= 4)");
        }
    }

    t.num_tors_ = t.num_pods_ * t.tors_per_pod_;
    t.num_aggs_ = t.num_pods_ * t.aggs_per_pod_;
    // Aggs are non-blocking: core uplinks per agg == ToR downlinks per agg.
    t.num_cores_ = t.aggs_per_pod_ * t.tors_per_pod_;
    t.wire();
    t.build_routes();
    t.check_escape_acyclic();
    return t;
}

void Topology::wire() {
    const int n_hosts = params_.num_hosts;
    const int H = hosts_per_tor_, A = aggs_per_pod_, P = tors_per_pod_, K = tors_per_pod_;
    const NodeId tor0 = n_hosts;
    const NodeId agg0 = tor0 + num_tors_;
    const NodeId core0 = agg0 + num_aggs_;

    nodes_.assign(n_hosts + num_tors_ + num_aggs_ + num_cores_, NodeInfo{});

    auto connect = [&](NodeId x, PortId px, NodeId y, PortId py) {
        nodes_[x].ports[px] = Link{y, py};
        nodes_[y].ports[py] = Link{x, px};
    };

    for (NodeId hst = 0; hst < n_hosts; ++hst) {
        nodes_[hst].tier = Tier::kHost;
        nodes_[hst].ports.resize(1);
    }
    for (int tr = 0; tr < num_tors_; ++tr) {
        nodes_[tor0 + tr].tier = Tier::kTor;
        nodes_[tor0 + tr].pod = tr / P;
        nodes_[tor0 + tr].ports.resize(H + A);
    }
    for (int ag = 0; ag < num_aggs_; ++ag) {
        nodes_[agg0 + ag].tier = Tier::kAgg;
        nodes_[agg0 + ag].pod = ag / std::max(A, 1);
        nodes_[agg0 + ag].ports.resize(P + K);
    }
    for (int co = 0; co < num_cores_; ++co) {
        nodes_[core0 + co].tier = Tier::kCore;
        nodes_[core0 + co].pod = co / std::max(K, 1);  // core group
        nodes_[core0 + co].ports.resize(num_pods_);
    }

    for (int tr = 0; tr < num_tors_; ++tr) {
        for (int k = 0; k < H; ++k) connect(tor0 + tr, k, tr * H + k, 0);
        int pod = tr / P, idx = tr % P;
        for (int j = 0; j < A; ++j) connect(tor0 + tr, H + j, agg0 + pod * A + j, idx);
    }
    for (int ag = 0; ag < num_aggs_; ++ag) {
        int pod = ag / A, j = ag % A;
        for (int m = 0; m < K; ++m) connect(agg0 + ag, P + m, core0 + j * K + m, pod);
    }
}

void Topology::build_routes() {
    const int n_hosts = params_.num_hosts;
    const int H = hosts_per_tor_, A = aggs_per_pod_, P = tors_per_pod_, K = tors_per_pod_;
    routes_.assign(num_switches(), {});
    for (int s = 0; s < num_switches(); ++s) {
        NodeId sw = n_hosts + s;
        const NodeInfo& ni = nodes_[sw];
        auto& table = routes_[s];
        table.assign(n_hosts, {});
        for (NodeId dst = 0; dst < n_hosts; ++dst) {
            int dst_tor = dst / H, dst_pod = dst_tor / P;
            auto& out = table[dst];
            switch (ni.tier) {
                case Tier::kTor: {
                    int tr = sw - n_hosts;
                    if (dst_tor == tr) {
                        out.push_back(dst % H);
                    } else {
                        for (int j = 0; j < A; ++j) out.push_back(H + j);
                    }
                    break;
                }
                case Tier::kAgg: {
                    int ag = sw - n_hosts - num_tors_;
                    if (dst_pod == ag / A) {
                        out.push_back(dst_tor % P);
                    } else {
                        for (int m = 0; m < K; ++m) out.push_back(P + m);
                    }
                    break;
                }
                case Tier::kCore:
                    out.push_back(dst_pod);
                    break;
                case Tier::kHost:
                    break;
            }
        }
    }
}

NodeId Topology::host_tor(NodeId host) const {
    return params_.num_hosts + host / hosts_per_tor_;
}

bool Topology::port_faces_host(NodeId sw, PortId p) const {
    return is_host(nodes_[sw].ports[p].peer);
}

const std::vector<PortId>& Topology::ecmp_ports(NodeId sw, NodeId dst) const {
    return routes_[sw - params_.num_hosts][dst];
}

int Topology::shortest_hops(NodeId src_host, NodeId dst_host) const {
    if (src_host == dst_host) return 0;
    int st = src_host / hosts_per_tor_, dt = dst_host / hosts_per_tor_;
    if (st == dt) return 2;
    if (st / tors_per_pod_ == dt / tors_per_pod_) return 4;
    return 6;
}

int Topology::max_hops() const {
    if (num_tors_ == 1) return 2;
    return num_pods_ > 1 ? 6 : 4;
}

SimTime Topology::base_rtt(int data_bytes, int ack_bytes) const {
    int h = max_hops();
    SimTime fwd = h * (params_.link_delay + tx_time_ns(data_bytes, params_.link_rate_bps));
    SimTime back = h * (params_.link_delay + tx_time_ns(ack_bytes, params_.link_rate_bps));
    return fwd + back;
}

void Topology::check_escape_acyclic() const {
    const int n_hosts = params_.num_hosts;
    // Directed switch-to-switch channels, indexed by (node, port).
    std::vector<std::int64_t> base(num_switches() + 1, 0);
    for (int s = 0; s < num_switches(); ++s)
        base[s + 1] = base[s] + static_cast<int>(nodes_[n_hosts + s].ports.size());
    auto chan_id = [&](NodeId sw, PortId p) { return base[sw - n_hosts] + p; };
    std::int64_t n_chan = base[num_switches()];

    std::vector<std::vector<std::int64_t>> adj(n_chan);
    for (int s = 0; s < num_switches(); ++s) {
        NodeId sw = n_hosts + s;
        const NodeInfo& ni = nodes_[sw];
        for (NodeId dst = 0; dst < n_hosts; ++dst) {
            PortId out = escape_port(sw, dst);
            if (is_host(ni.ports[out].peer)) continue;
            std::int64_t to = chan_id(sw, out);
            for (PortId pin = 0; pin < static_cast<PortId>(ni.ports.size()); ++pin) {
                NodeId up = ni.ports[pin].peer;
                if (is_host(up)) continue;
                // Channel up->sw feeds sw->out only if up escapes toward dst via sw.
                if (nodes_[up].ports[escape_port(up, dst)].peer == sw) {
                    adj[chan_id(up, ni.ports[pin].peer_port)].push_back(to);
                }
            }
        }
    }
    for (auto& v : adj) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    // Iterative three-color DFS.
    std::vector<char> color(n_chan, 0);
    std::vector<std::int64_t> stack;
    for (std::int64_t s0 = 0; s0 < n_chan; ++s0) {
        if (color[s0] != 0) continue;
        stack.push_back(s0);
        while (!stack.empty()) {
            std::int64_t v = stack.back();
            if (color[v] == 0) {
                color[v] = 1;
                for (std::int64_t w : adj[v]) {
                    if (color[w] == 1)
                        throw std::runtime_error("topology: escape dependency cycle detected");
                    if (color[w] == 0) stack.push_back(w);
                }
            } else {
                color[v] = 2;
                stack.pop_back();
            }
        }
    }
}

std::string Topology::audit_json() const {
    nlohmann::ordered_json j;
    j["hosts"] = params_.num_hosts;
    j["tors"] = num_tors_;
    j["aggs"] = num_aggs_;
    j["cores"] = num_cores_;
    j["pods"] = num_pods_;
    j["hosts_per_tor"] = hosts_per_tor_;
    j["tor_uplinks"] = aggs_per_pod_;
    j["agg_radix"] = num_aggs_ ? 2 * tors_per_pod_ : 0;
    j["core_radix"] = num_cores_ ? num_pods_ : 0;
    std::int64_t links = params_.num_hosts;
    links += static_cast<std::int64_t>(num_tors_) * aggs_per_pod_;
    links += static_cast<std::int64_t>(num_aggs_) * tors_per_pod_;
    j["links"] = links;
    j["link_rate_bps"] = params_.link_rate_bps;
    j["link_delay_ns"] = params_.link_delay;
    double down_bw = static_cast<double>(num_tors_) * hosts_per_tor_ * params_.link_rate_bps;
    double up_bw = static_cast<double>(num_tors_) * aggs_per_pod_ * params_.link_rate_bps;
    double ratio = aggs_per_pod_ ? down_bw / up_bw : 1.0;
    if (std::abs(ratio - params_.oversubscription) > 1e-9)
        throw std::runtime_error("topology: oversubscription audit failed");
    j["oversubscription_configured"] = params_.oversubscription;
    j["oversubscription_audited"] = ratio;
    j["max_hops"] = max_hops();
    check_escape_acyclic();
    j["escape_dependency_acyclic"] = true;
    return j.dump(2);
}

}  // namespace dartsim
