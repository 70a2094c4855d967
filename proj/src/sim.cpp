#include "dartsim/sim.hpp"

#include <algorithm>
#include <stdexcept>

namespace dartsim {

namespace {
constexpr int lane_ix(Lane l) { return static_cast<int>(l); }
constexpr SimTime kWatchdogPeriod = 1 * kNsPerMs;
constexpr int kWatchdogStrikes = 3;
}  // namespace

Simulation::Simulation(const ExperimentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      tr_(traits_for(cfg.scheme)),
      seed_(seed),
      topo_(Topology::build(cfg.topo)),
      deflect_rng_(seed, Stream::kDeflect),
      salt_(RngStream(seed, Stream::kEcmpSalt).next_u64()),
      line_(cfg.topo.link_rate_bps),
      dcqcn_(cfg.dcqcn),
      timely_(cfg.timely),
      // Start packets may carry the look-ahead sender list, so the headroom
      // math uses the largest frame any scheme can emit (same thresholds for
      // every scheme keeps runs comparable).
      pfc_(compute_pfc(cfg.sw.capacity_bytes, cfg.topo.link_rate_bps, cfg.topo.link_delay,
                       cfg.nic.data_bytes + 2LL * cfg.wl.incast_degree)) {
    dcqcn_.line_rate_bps = line_;
    timely_.line_rate_bps = line_;
    timely_.min_rtt = topo_.base_rtt(cfg_.nic.data_bytes, cfg_.nic.ctrl_bytes);

    const int n = topo_.num_nodes();
    pbase_.resize(static_cast<std::size_t>(n), 0);
    int acc = 0;
    for (NodeId v = 0; v < n; ++v) {
        pbase_[static_cast<std::size_t>(v)] = acc;
        acc += static_cast<int>(topo_.node(v).ports.size());
    }
    ports_.resize(static_cast<std::size_t>(acc));
    for (NodeId v = 0; v < n; ++v) {
        const NodeInfo& ni = topo_.node(v);
        for (PortId p = 0; p < static_cast<PortId>(ni.ports.size()); ++p) {
            OutPort& op = ports_[port_index(v, p)];
            op.node = v;
            op.port = p;
            op.peer = ni.ports[p].peer;
            op.peer_port = ni.ports[p].peer_port;
        }
    }
    sw_.reserve(static_cast<std::size_t>(topo_.num_switches()));
    for (NodeId v = topo_.num_hosts(); v < n; ++v)
        sw_.emplace_back(static_cast<int>(topo_.node(v).ports.size()), cfg_.sw.dft_capacity);
    hosts_.reserve(static_cast<std::size_t>(topo_.num_hosts()));
    for (int h = 0; h < topo_.num_hosts(); ++h)
        hosts_.emplace_back(line_, static_cast<double>(cfg_.nic.rate_tau), cfg_.nic.fsm_window,
                            cfg_.nic.line_frac);
}

void Simulation::load(Schedule sched) {
    sched_ = std::move(sched);
    next_msg_ = 0;
    injection_done_ = sched_.msgs.empty();
    if (!injection_done_)
        eng_.schedule(sched_.msgs.front().start_time, [this] { inject_next(); });
}

void Simulation::inject_next() {
    while (next_msg_ < sched_.msgs.size() &&
           sched_.msgs[next_msg_].start_time <= eng_.now()) {
        start_message(sched_.msgs[next_msg_]);
        next_msg_++;
    }
    if (next_msg_ < sched_.msgs.size()) {
        eng_.schedule(sched_.msgs[next_msg_].start_time, [this] { inject_next(); });
    } else {
        injection_done_ = true;
        maybe_finish();
    }
}

void Simulation::start_message(const Message& m) {
    metrics_.on_msg_started();
    if (m.cls == FlowClass::kShort) outstanding_short_++;
    HostState& hs = hosts_[static_cast<std::size_t>(m.src)];
    auto it = hs.pairs.try_emplace(m.dst).first;
    SenderPair& pr = it->second;
    if (pr.active == 0) {
        // Every flow begins at full line rate: an idle pair sheds whatever
        // rate the previous burst converged to before it starts a new one.
        if (pr.timer_armed) {
            eng_.cancel(pr.timer_h);
            pr.timer_armed = false;
        }
        pr.dasr_n = 1;
        pr.rp = DcqcnRpState{line_, line_, 1.0, 0};
        pr.engaged = false;
        pr.bytes_since_stage = 0;
        pr.timely = TimelyState{};
        pr.timely.rate = line_;
    }
    pr.active++;
    auto total = static_cast<std::uint32_t>((m.size_bytes + cfg_.nic.data_bytes - 1) /
                                            cfg_.nic.data_bytes);
    pr.q.push_back(PendingSend{m, 0, total});
    std::int32_t extra = 0;
    if (tr_.lookahead && m.group != 0)
        extra = 2 * static_cast<std::int32_t>(sched_.group_of(m.group)->senders.size());
    hs.sent.emplace(m.id, SentMsgRec{m.size_bytes, total, m.cls, m.start_time, extra, m.dst});
    try_serve(port_index(m.src, 0));
}

std::int64_t Simulation::wire_of(const SentMsgRec& rec, std::uint32_t seq) const {
    std::int64_t payload = std::min<std::int64_t>(
        cfg_.nic.data_bytes, rec.size - static_cast<std::int64_t>(seq) * cfg_.nic.data_bytes);
    return payload + (seq == 0 ? rec.start_extra : 0);
}

double Simulation::eff_rate(const SenderPair& pr) const {
    if (tr_.timely) return pr.timely.rate;
    double r = tr_.dcqcn ? pr.rp.rc : line_;
    if (tr_.dasr) r = std::min(line_ / static_cast<double>(pr.dasr_n), r);
    return r;
}

bool Simulation::nic_pick(NodeId h, Packet& out) {
    HostState& hs = hosts_[static_cast<std::size_t>(h)];
    if (hs.pairs.empty()) return false;
    const SimTime now = eng_.now();
    auto it = hs.pairs.upper_bound(hs.last_dst);
    for (std::size_t k = 0; k < hs.pairs.size(); ++k, ++it) {
        if (it == hs.pairs.end()) it = hs.pairs.begin();
        SenderPair& pr = it->second;
        if (pr.q.empty()) continue;
        if (pr.cursor >= pr.q.size()) pr.cursor = 0;
        PendingSend& ps = pr.q[pr.cursor];
        const SentMsgRec& rec = hs.sent.at(ps.msg.id);
        const std::int64_t wire = wire_of(rec, ps.next_seq);
        if (tr_.timely) {
            if (pr.inflight + wire > timely_window_bytes(pr.timely, timely_, pfc_.max_wire))
                continue;
        } else if (now < pr.next_allowed) {
            continue;
        }

        out = Packet{};
        out.kind = PacketKind::kData;
        out.src = h;
        out.dst = it->first;
        out.msg_id = ps.msg.id;
        out.seq = ps.next_seq;
        out.size_bytes = static_cast<std::int32_t>(wire);
        out.cls = rec.cls;
        out.lane = Lane::kDeflect;
        out.start = ps.next_seq == 0;
        out.end = ps.next_seq + 1 == ps.total;
        out.tokens = (tr_.deflect && rec.cls == FlowClass::kShort)
                         ? static_cast<std::int8_t>(cfg_.sw.deflection_tokens)
                         : 0;
        out.sent_at = now;
        out.group = ps.msg.group;
        if (out.start && tr_.lookahead && ps.msg.group != 0)
            out.group_senders = &sched_.group_of(ps.msg.group)->senders;

        if (tr_.timely) {
            pr.inflight += wire;
        } else {
            pr.next_allowed = std::max(now, pr.next_allowed) + tx_time_ns(wire, eff_rate(pr));
        }
        if (tr_.dcqcn && pr.engaged) {
            pr.bytes_since_stage += wire;
            while (pr.engaged && pr.bytes_since_stage >= dcqcn_.byte_counter) {
                pr.bytes_since_stage -= dcqcn_.byte_counter;
                dcqcn_on_bytes(pr.rp, dcqcn_);
                dcqcn_try_snap(pr);
            }
            log_rate(h, it->first, pr);
        }

        ps.next_seq++;
        if (ps.next_seq == ps.total) {
            pr.q.erase(pr.q.begin() + static_cast<std::ptrdiff_t>(pr.cursor));
        } else {
            pr.cursor++;  // round-robin across the pair's live messages
        }
        hs.last_dst = it->first;
        return true;
    }
    return false;
}

void Simulation::arm_wake(NodeId h) {
    if (tr_.timely) return;  // window scheme: ACK arrivals reopen the gate
    HostState& hs = hosts_[static_cast<std::size_t>(h)];
    const SimTime now = eng_.now();
    SimTime best = -1;
    for (auto& [dst, pr] : hs.pairs) {
        if (pr.q.empty() || pr.next_allowed <= now) continue;
        if (best < 0 || pr.next_allowed < best) best = pr.next_allowed;
    }
    if (best < 0) return;
    if (hs.wake_armed && hs.wake_at <= best) return;
    if (hs.wake_armed) eng_.cancel(hs.wake_h);
    hs.wake_armed = true;
    hs.wake_at = best;
    hs.wake_h = eng_.schedule(best, [this, h] {
        hosts_[static_cast<std::size_t>(h)].wake_armed = false;
        try_serve(port_index(h, 0));
    });
}

void Simulation::try_serve(std::size_t pi) {
    OutPort& op = ports_[pi];
    if (op.busy) return;
    if (!op.ctrl.empty()) {
        InFlight f{op.ctrl.front(), -1, Lane::kDeflect, true};
        op.ctrl.pop_front();
        begin_tx(pi, std::move(f));
        return;
    }
    if (topo_.is_host(op.node)) {
        // The NIC hands over one data packet at a time; nothing data-side
        // ever queues in the host port itself.
        if (op.paused[lane_ix(Lane::kDeflect)]) return;
        Packet pkt;
        if (nic_pick(op.node, pkt)) {
            metrics_.on_injected_pkt();
            op.occ += pkt.size_bytes;
            begin_tx(pi, InFlight{pkt, -1, Lane::kDeflect, false});
        } else {
            arm_wake(op.node);
        }
        return;
    }
    for (int k = 0; k < 2; ++k) {
        const int lane = (op.rr + k) % 2;
        if (op.paused[lane] || !op.lane_nonempty(lane)) continue;
        auto& band = !op.q[lane][0].empty() ? op.q[lane][0] : op.q[lane][1];
        InFlight f{band.front().pkt, band.front().in_port, band.front().lane, false};
        band.pop_front();
        op.rr = 1 - lane;
        begin_tx(pi, std::move(f));
        return;
    }
}

void Simulation::begin_tx(std::size_t pi, InFlight f) {
    OutPort& op = ports_[pi];
    op.busy = true;
    if (!f.ctrl) {
        f.pkt.hops++;
        wire_pkts_++;
    }
    const SimTime fin = eng_.now() + tx_time_ns(f.pkt.size_bytes, line_);
    eng_.schedule(fin, [this, pi, f = std::move(f)] { on_tx_end(pi, f); });
}

void Simulation::on_tx_end(std::size_t pi, InFlight f) {
    OutPort& op = ports_[pi];
    op.busy = false;
    if (!f.ctrl) {
        op.occ -= f.pkt.size_bytes;
        if (!topo_.is_host(op.node)) ingress_dec(op.node, f.in_port, f.lane, f.pkt.size_bytes);
    }
    eng_.schedule(eng_.now() + topo_.params().link_delay,
                  [this, node = op.peer, inp = op.peer_port, pkt = f.pkt] {
                      on_arrival(node, inp, pkt);
                  });
    try_serve(pi);
}

void Simulation::on_arrival(NodeId node, PortId in_port, Packet pkt) {
    if (pkt.kind == PacketKind::kData) wire_pkts_--;
    if (topo_.is_host(node)) {
        switch (pkt.kind) {
            case PacketKind::kData: host_on_data(node, pkt); break;
            case PacketKind::kAck: host_on_ack(node, pkt); break;
            case PacketKind::kCnp: host_on_cnp(node, pkt); break;
        }
        return;
    }
    if (pkt.kind != PacketKind::kData) {
        // Control packets: ECMP toward the destination, strict priority,
        // never paused, marked or buffered against a threshold.
        PortId out = ecmp_select(topo_, node, pkt.src, pkt.dst, pkt.msg_id, salt_);
        auto pi = port_index(node, out);
        ports_[pi].ctrl.push_back(pkt);
        try_serve(pi);
        return;
    }
    switch_on_data(node, in_port, pkt);
}

PortId Simulation::route_data(NodeId sw, Packet& pkt, PortId in_port) {
    if (pkt.lane == Lane::kEscape) return topo_.escape_port(sw, pkt.dst);
    SwitchState& ss = switch_state(sw);
    const auto pin = ss.dft.lookup(pkt.msg_id);
    if (pin && pin->in == in_port && pin->at_defl == pkt.deflections) {
        // Packets repeat the start packet's misroute at the same point of
        // its trajectory and mirror its token spend, so the whole message
        // shares one path and one lane sequence (order within the message
        // holds). A revisit — even on the pinned ingress, when the detour's
        // return leg rejoins the original downlink — carries a different
        // deflection count and falls through to normal routing, so detours
        // stay finite and the end packet fires each pin exactly once.
        if (pkt.end) ss.dft.release(pkt.msg_id);
        metrics_.on_deflection(pkt.lane);
        pkt.deflections++;
        if (--pkt.tokens <= 0) pkt.lane = Lane::kEscape;
        return pin->out;
    }
    const PortId primary = ecmp_select(topo_, sw, pkt.src, pkt.dst, pkt.msg_id, salt_);
    if (tr_.deflect && pkt.start && pkt.cls == FlowClass::kShort && pkt.tokens > 0 &&
        !pin && ss.dft.has_free_slot() &&
        ports_[port_index(sw, primary)].occ > cfg_.sw.deflect_threshold) {
        const NodeInfo& ni = topo_.node(sw);
        std::vector<PortId> cand;
        cand.reserve(ni.ports.size());
        for (PortId p = 0; p < static_cast<PortId>(ni.ports.size()); ++p)
            if (p != in_port && p != primary && !topo_.port_faces_host(sw, p))
                cand.push_back(p);
        if (!cand.empty()) {
            const PortId out = cand[deflect_rng_.next_below(cand.size())];
            if (!pkt.end) ss.dft.alloc(pkt.msg_id, out, in_port, pkt.deflections);
            metrics_.on_deflection(pkt.lane);
            pkt.deflections++;
            if (--pkt.tokens <= 0) pkt.lane = Lane::kEscape;
            return out;
        }
    }
    return primary;
}

void Simulation::switch_on_data(NodeId sw, PortId in_port, Packet pkt) {
    const Lane arrival_lane = pkt.lane;  // buffers and pauses bill this lane
    ingress_inc(sw, in_port, arrival_lane, pkt.size_bytes);
    const PortId out = route_data(sw, pkt, in_port);
    auto pi = port_index(sw, out);
    OutPort& op = ports_[pi];
    if (ecn_should_mark(op.occ, cfg_.sw.ecn_threshold)) pkt.ecn_ce = true;
    op.occ += pkt.size_bytes;
    metrics_.note_queue_depth(op.occ);
    const int band = (tr_.priq && pkt.cls == FlowClass::kLong) ? 1 : 0;
    op.q[lane_ix(arrival_lane)][band].push_back(QueuedPkt{pkt, in_port, arrival_lane});
    try_serve(pi);
}

void Simulation::ingress_inc(NodeId sw, PortId in_port, Lane lane, std::int64_t wire) {
    SwitchState& ss = switch_state(sw);
    const int li = lane_ix(lane);
    auto& ctr = ss.ingress[static_cast<std::size_t>(in_port)][li];
    ctr += wire;
    ingress_high_ = std::max(ingress_high_, ctr);
    if (!ss.pause_sent[static_cast<std::size_t>(in_port)][li] && ctr > pfc_.xoff) {
        ss.pause_sent[static_cast<std::size_t>(in_port)][li] = true;
        metrics_.on_pause();
        const Link l = topo_.node(sw).ports[static_cast<std::size_t>(in_port)];
        const auto up = port_index(l.peer, l.peer_port);
        eng_.schedule(eng_.now() + topo_.params().link_delay,
                      [this, up, li] { ports_[up].paused[li] = true; });
    }
}

void Simulation::ingress_dec(NodeId sw, PortId in_port, Lane lane, std::int64_t wire) {
    SwitchState& ss = switch_state(sw);
    const int li = lane_ix(lane);
    auto& ctr = ss.ingress[static_cast<std::size_t>(in_port)][li];
    ctr -= wire;
    if (ss.pause_sent[static_cast<std::size_t>(in_port)][li] && ctr < pfc_.xon) {
        ss.pause_sent[static_cast<std::size_t>(in_port)][li] = false;
        const Link l = topo_.node(sw).ports[static_cast<std::size_t>(in_port)];
        const auto up = port_index(l.peer, l.peer_port);
        eng_.schedule(eng_.now() + topo_.params().link_delay, [this, up, li] {
            ports_[up].paused[li] = false;
            try_serve(up);
        });
    }
}

void Simulation::host_on_data(NodeId h, Packet pkt) {
    HostState& hs = hosts_[static_cast<std::size_t>(h)];
    const SimTime now = eng_.now();

    auto& exp = hs.expect_seq[pkt.msg_id];
    if (pkt.seq != exp) metrics_.on_seq_violation();
    exp = pkt.seq + 1;
    if (pkt.end) hs.expect_seq.erase(pkt.msg_id);

    const int shortest = topo_.shortest_hops(pkt.src, h);
    if (pkt.hops > shortest + 2 * cfg_.sw.deflection_tokens)
        metrics_.on_token_bound_violation();

    const std::int64_t extra =
        (pkt.start && pkt.group_senders) ? 2 * static_cast<std::int64_t>(pkt.group_senders->size())
                                         : 0;
    metrics_.on_delivered_data(pkt.size_bytes - extra, pkt.size_bytes, pkt.hops, shortest,
                               pkt.cls, pkt.ecn_ce);
    if (arrival_log_on_ && (pkt.start || pkt.end))
        arrivals_.push_back(ArrivalRecord{now, pkt.msg_id, pkt.src, h, pkt.group, pkt.end});

    // Receiver pipeline: active-sender set, goodput estimate, congestion
    // classification, then the (cumulative-free, per-packet) ACK.
    if (pkt.start) {
        if (pkt.group_senders)
            for (NodeId s : hs.la.apply(pkt.group, *pkt.group_senders, pkt.src))
                hs.auss.add(s, now);
        if (pkt.group != 0 && hs.la.consume(pkt.group, pkt.src)) {
            if (!hs.auss.refresh(pkt.src, now)) hs.auss.add(pkt.src, now);
        } else {
            hs.auss.add(pkt.src, now);
        }
    } else if (!pkt.end) {
        if (!hs.auss.refresh(pkt.src, now)) hs.auss.add(pkt.src, now);
    }
    if (pkt.end) hs.auss.remove(pkt.src, now);

    hs.est.on_bytes(pkt.size_bytes, now);
    const DasrState st = hs.fsm.observe(pkt.ecn_ce, hs.est.rate_bps(), now);
    const AckFields af = ack_fields(st, hs.auss.size(), pkt.ecn_ce, tr_.suppress);
    if (pkt.ecn_ce && !af.ecn_echo) metrics_.on_suppressed_mark();

    Packet ack;
    ack.kind = PacketKind::kAck;
    ack.src = h;
    ack.dst = pkt.src;
    ack.msg_id = pkt.msg_id;
    ack.seq = pkt.seq;
    ack.size_bytes = cfg_.nic.ctrl_bytes;
    ack.cls = pkt.cls;
    ack.start = pkt.start;
    ack.end = pkt.end;
    ack.ecn_echo = af.ecn_echo;
    ack.piggyback_n = af.piggyback_n;
    ack.hops = pkt.hops;
    ack.deflections = pkt.deflections;
    ack.sent_at = pkt.sent_at;
    metrics_.on_ack();
    send_ctrl(h, ack);

    if (tr_.dcqcn && af.ecn_echo) {
        auto it = hs.last_cnp.find(pkt.src);
        if (it == hs.last_cnp.end() || now - it->second >= dcqcn_.cnp_min_gap) {
            hs.last_cnp[pkt.src] = now;
            Packet cnp;
            cnp.kind = PacketKind::kCnp;
            cnp.src = h;
            cnp.dst = pkt.src;
            cnp.size_bytes = cfg_.nic.ctrl_bytes;
            metrics_.on_cnp();
            send_ctrl(h, cnp);
        }
    }
}

void Simulation::send_ctrl(NodeId from, Packet pkt) {
    auto pi = port_index(from, 0);
    ports_[pi].ctrl.push_back(pkt);
    try_serve(pi);
}

void Simulation::host_on_ack(NodeId h, const Packet& ack) {
    HostState& hs = hosts_[static_cast<std::size_t>(h)];
    auto pit = hs.pairs.find(ack.src);
    if (pit == hs.pairs.end()) return;
    SenderPair& pr = pit->second;

    if (tr_.dasr) {
        if (ack.piggyback_n < 1) throw std::logic_error("ack carried sender count 0");
        pr.dasr_n = ack.piggyback_n;
        log_rate(h, ack.src, pr);
    }
    if (tr_.timely) {
        auto rit = hs.sent.find(ack.msg_id);
        if (rit != hs.sent.end()) pr.inflight -= wire_of(rit->second, ack.seq);
        timely_on_completion(pr.timely, timely_, eng_.now() - ack.sent_at);
        log_rate(h, ack.src, pr);
    }
    if (ack.end) {
        auto rit = hs.sent.find(ack.msg_id);
        if (rit != hs.sent.end()) {
            const SentMsgRec& rec = rit->second;
            metrics_.on_fct(FctSample{ack.msg_id, h, ack.src, rec.size, rec.cls, rec.start,
                                      eng_.now() - rec.start, ack.hops, ack.deflections});
            if (rec.cls == FlowClass::kShort) outstanding_short_--;
            hs.sent.erase(rit);
            pr.active--;
            maybe_finish();
        }
    }
    try_serve(port_index(h, 0));
}

void Simulation::host_on_cnp(NodeId h, const Packet& cnp) {
    if (!tr_.dcqcn) return;
    HostState& hs = hosts_[static_cast<std::size_t>(h)];
    auto pit = hs.pairs.find(cnp.src);
    if (pit == hs.pairs.end()) return;
    SenderPair& pr = pit->second;
    if (pr.timer_armed) {
        eng_.cancel(pr.timer_h);
        pr.timer_armed = false;
    }
    dcqcn_on_cnp(pr.rp, dcqcn_);
    pr.engaged = true;
    pr.bytes_since_stage = 0;
    arm_dcqcn_timer(h, cnp.src);
    log_rate(h, cnp.src, pr);
}

void Simulation::arm_dcqcn_timer(NodeId h, NodeId dst) {
    SenderPair& pr = hosts_[static_cast<std::size_t>(h)].pairs.at(dst);
    pr.timer_armed = true;
    pr.timer_h = eng_.schedule(eng_.now() + dcqcn_.timer_period,
                               [this, h, dst] { on_dcqcn_timer(h, dst); });
}

void Simulation::on_dcqcn_timer(NodeId h, NodeId dst) {
    SenderPair& pr = hosts_[static_cast<std::size_t>(h)].pairs.at(dst);
    pr.timer_armed = false;
    if (!pr.engaged) return;
    dcqcn_on_timer(pr.rp, dcqcn_);
    dcqcn_try_snap(pr);
    if (pr.engaged) arm_dcqcn_timer(h, dst);
    log_rate(h, dst, pr);
    try_serve(port_index(h, 0));
}

// Recovery complete: pin the pair back to line rate and forget the episode,
// so a fully recovered sender is indistinguishable from a fresh one.
void Simulation::dcqcn_try_snap(SenderPair& pr) {
    if (!pr.engaged) return;
    if (line_ - pr.rp.rc < 1.0 && pr.rp.rt >= line_) {
        pr.rp = DcqcnRpState{line_, line_, 1.0, 0};
        pr.engaged = false;
        pr.bytes_since_stage = 0;
    }
}

void Simulation::log_rate(NodeId h, NodeId dst, SenderPair& pr) {
    if (!rate_trace_on_) return;
    const double r = eff_rate(pr);
    if (r == pr.logged_rate) return;
    pr.logged_rate = r;
    trace_.push_back(RateTracePoint{eng_.now(), h, dst, r});
}

void Simulation::maybe_finish() {
    if (injection_done_ && outstanding_short_ == 0 && eng_.now() >= cfg_.wl.duration)
        eng_.request_stop();
}

RunSummary Simulation::run() {
    const SimTime dur = cfg_.wl.duration;
    const auto cap = static_cast<SimTime>(cfg_.hard_cap_mult * static_cast<double>(dur));
    eng_.schedule(dur, [this] { maybe_finish(); });
    eng_.schedule(cap, [this] {
        hard_capped_ = true;
        eng_.request_stop();
    });
    eng_.schedule(kWatchdogPeriod, [this] { watchdog_tick(); });
    eng_.schedule(cfg_.nic.sweep_period, [this] { sweep_tick(); });

    const SimTime end = eng_.run_until(cap);
    RunSummary s = metrics_.summarize(scheme_name(cfg_.scheme), seed_, end,
                                      static_cast<SimTime>(cfg_.warmup_frac *
                                                           static_cast<double>(dur)));
    finish_audits(s);
    return s;
}

// Deadlock watchdog: forward progress must resume within a few periods
// whenever any packet is in flight or any short message is unfinished.
void Simulation::watchdog_tick() {
    const std::int64_t prog = metrics_.delivered_pkts();
    const bool work = metrics_.injected_pkts() > prog || outstanding_short_ > 0;
    if (work && prog == last_progress_) {
        if (++stall_strikes_ >= kWatchdogStrikes) {
            watchdog_fired_ = true;
            eng_.request_stop();
            return;
        }
    } else {
        stall_strikes_ = 0;
    }
    last_progress_ = prog;
    eng_.schedule(eng_.now() + kWatchdogPeriod, [this] { watchdog_tick(); });
}

void Simulation::sweep_tick() {
    for (auto& hs : hosts_) hs.auss.sweep(eng_.now());
    eng_.schedule(eng_.now() + cfg_.nic.sweep_period, [this] { sweep_tick(); });
}

void Simulation::finish_audits(RunSummary& s) {
    s.watchdog_fired = watchdog_fired_;
    s.hard_capped = hard_capped_;
    std::int64_t queued = 0;
    for (const auto& op : ports_)
        for (const auto& lane : op.q)
            for (const auto& band : lane) queued += static_cast<std::int64_t>(band.size());
    s.queued_end = queued;
    s.wire_end = wire_pkts_;
    s.injected_pkts = metrics_.injected_pkts();
    s.delivered_pkts = metrics_.delivered_pkts();
    s.conservation_ok = s.injected_pkts == s.delivered_pkts + queued + wire_pkts_;
    int dft_high = 0;
    for (const auto& ss : sw_) dft_high = std::max(dft_high, ss.dft.high_water());
    s.dft_high_water = dft_high;
}

}  // namespace dartsim
