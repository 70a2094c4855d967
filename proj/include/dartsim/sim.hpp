#pragma once

#include <array>
#include <deque>
#include <map>
#include <vector>

#include "dartsim/ccalgos.hpp"
#include "dartsim/config.hpp"
#include "dartsim/dasr.hpp"
#include "dartsim/engine.hpp"
#include "dartsim/metrics.hpp"
#include "dartsim/packet.hpp"
#include "dartsim/rng.hpp"
#include "dartsim/switch_logic.hpp"
#include "dartsim/topology.hpp"
#include "dartsim/workload.hpp"

namespace dartsim {

struct ArrivalRecord {
    SimTime t = 0;
    MsgId msg = 0;
    NodeId src = -1, dst = -1;
    std::uint32_t group = 0;
    bool is_end = false;
};

struct QueuedPkt {
    Packet pkt;
    PortId in_port = -1;
    Lane lane = Lane::kDeflect;  // arrival lane: service + ingress accounting
};

// One transmit side of a link. Control packets preempt data; the two data
// lanes round-robin; a paused lane stops at packet granularity. Hosts own
// one such port; their data is handed over packet-by-packet by the pacer.
struct OutPort {
    NodeId node = -1;
    PortId port = -1;
    NodeId peer = -1;
    PortId peer_port = -1;
    std::deque<Packet> ctrl;
    std::deque<QueuedPkt> q[2][2];  // [lane][band]; band 1 = long under PRIQ
    std::int64_t occ = 0;           // data bytes queued + in service
    bool busy = false;
    bool paused[2] = {false, false};
    int rr = 0;  // lane to offer first

    bool lane_nonempty(int lane) const { return !q[lane][0].empty() || !q[lane][1].empty(); }
};

struct SwitchState {
    // Per (ingress port, lane) bytes currently buffered in this switch.
    std::vector<std::array<std::int64_t, 2>> ingress;
    std::vector<std::array<bool, 2>> pause_sent;
    DftTable dft;
    explicit SwitchState(int ports, int dft_cap)
        : ingress(ports, {0, 0}), pause_sent(ports, {false, false}), dft(dft_cap) {}
};

struct PendingSend {
    Message msg;
    std::uint32_t next_seq = 0;
    std::uint32_t total = 0;
};

struct SentMsgRec {
    std::int64_t size = 0;
    std::uint32_t total = 0;
    FlowClass cls = FlowClass::kShort;
    SimTime start = 0;
    std::int32_t start_extra = 0;  // look-ahead bytes on the start packet
    NodeId dst = -1;
};

// Per (sender, receiver) congestion state: one pacer shared by all of the
// pair's concurrent messages, served round-robin.
struct SenderPair {
    int active = 0;  // messages started but not yet fully ACKed
    int dasr_n = 1;
    DcqcnRpState rp;
    bool engaged = false;  // a CNP arrived and rc is still recovering
    std::int64_t bytes_since_stage = 0;
    bool timer_armed = false;
    Engine::Handle timer_h = 0;
    TimelyState timely;
    std::int64_t inflight = 0;  // un-ACKed wire bytes (window schemes)
    std::deque<PendingSend> q;
    std::size_t cursor = 0;
    SimTime next_allowed = 0;
    double logged_rate = -1;
};

struct HostState {
    // sender side
    std::map<NodeId, SenderPair> pairs;
    NodeId last_dst = -1;
    std::map<MsgId, SentMsgRec> sent;
    bool wake_armed = false;
    SimTime wake_at = 0;
    Engine::Handle wake_h = 0;
    // receiver side
    Auss auss;
    LookaheadState la;
    RxRateEstimator est;
    DasrFsm fsm;
    std::map<NodeId, SimTime> last_cnp;
    std::map<MsgId, std::uint32_t> expect_seq;

    HostState(double line_bps, double tau_ns, SimTime fsm_window, double line_frac)
        : est(line_bps, tau_ns), fsm(fsm_window, line_bps, line_frac) {}
};

// A single seeded run: topology, switches, hosts and traffic wired onto the
// event engine. run() drives to completion (all short messages acked, or
// the hard cap) and returns the summarized metrics with audits attached.
class Simulation {
public:
    Simulation(const ExperimentConfig& cfg, std::uint64_t seed);

    void load(Schedule sched);
    RunSummary run();

    void set_rate_trace(bool on) { rate_trace_on_ = on; }
    void set_arrival_log(bool on) { arrival_log_on_ = on; }

    Engine& eng() { return eng_; }
    const Topology& topology() const { return topo_; }
    Metrics& metrics() { return metrics_; }
    HostState& host(NodeId h) { return hosts_[static_cast<std::size_t>(h)]; }
    OutPort& out_port(NodeId node, PortId port) { return ports_[port_index(node, port)]; }
    SwitchState& switch_state(NodeId sw) {
        return sw_[static_cast<std::size_t>(sw - topo_.num_hosts())];
    }
    const std::vector<RateTracePoint>& rate_trace() const { return trace_; }
    const std::vector<ArrivalRecord>& arrivals() const { return arrivals_; }
    const PfcThresholds& pfc() const { return pfc_; }
    bool watchdog_fired() const { return watchdog_fired_; }
    std::int64_t ingress_high_water() const { return ingress_high_; }

    // Exposed for white-box tests.
    PortId route_data(NodeId sw, Packet& pkt, PortId in_port);
    double eff_rate(const SenderPair& pr) const;

private:
    std::size_t port_index(NodeId node, PortId port) const {
        return static_cast<std::size_t>(pbase_[static_cast<std::size_t>(node)] + port);
    }

    struct InFlight {
        Packet pkt;
        PortId in_port = -1;
        Lane lane = Lane::kDeflect;
        bool ctrl = false;
    };

    void start_message(const Message& m);
    void inject_next();
    void try_serve(std::size_t pi);
    void begin_tx(std::size_t pi, InFlight f);
    void on_tx_end(std::size_t pi, InFlight f);
    void on_arrival(NodeId node, PortId in_port, Packet pkt);
    void switch_on_data(NodeId sw, PortId in_port, Packet pkt);
    void host_on_data(NodeId h, Packet pkt);
    void host_on_ack(NodeId h, const Packet& ack);
    void host_on_cnp(NodeId h, const Packet& cnp);
    bool nic_pick(NodeId h, Packet& out);
    void send_ctrl(NodeId from, Packet pkt);
    void arm_wake(NodeId h);
    void ingress_inc(NodeId sw, PortId in_port, Lane lane, std::int64_t wire);
    void ingress_dec(NodeId sw, PortId in_port, Lane lane, std::int64_t wire);
    void arm_dcqcn_timer(NodeId h, NodeId dst);
    void on_dcqcn_timer(NodeId h, NodeId dst);
    void dcqcn_try_snap(SenderPair& pr);
    void log_rate(NodeId h, NodeId dst, SenderPair& pr);
    std::int64_t wire_of(const SentMsgRec& rec, std::uint32_t seq) const;
    void maybe_finish();
    void watchdog_tick();
    void sweep_tick();
    void finish_audits(RunSummary& s);

    ExperimentConfig cfg_;
    SchemeTraits tr_{};
    std::uint64_t seed_;
    Topology topo_;
    Engine eng_;
    RngStream deflect_rng_;
    std::uint64_t salt_;
    double line_;
    DcqcnParams dcqcn_;
    TimelyParams timely_;
    PfcThresholds pfc_;

    std::vector<int> pbase_;
    std::vector<OutPort> ports_;
    std::vector<SwitchState> sw_;
    std::vector<HostState> hosts_;

    Schedule sched_;
    std::size_t next_msg_ = 0;
    bool injection_done_ = true;
    int outstanding_short_ = 0;

    Metrics metrics_;
    std::vector<RateTracePoint> trace_;
    std::vector<ArrivalRecord> arrivals_;
    bool rate_trace_on_ = false;
    bool arrival_log_on_ = false;

    std::int64_t wire_pkts_ = 0;  // granted, not yet arrived at the next node
    std::int64_t ingress_high_ = 0;
    bool watchdog_fired_ = false;
    bool hard_capped_ = false;
    std::int64_t last_progress_ = -1;
    int stall_strikes_ = 0;
};

}  // namespace dartsim
