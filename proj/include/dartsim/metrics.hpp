#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dartsim/packet.hpp"
#include "dartsim/time.hpp"

namespace dartsim {

struct ExperimentConfig;

struct FctSample {
    MsgId id = 0;
    NodeId src = -1, dst = -1;
    std::int64_t size = 0;
    FlowClass cls = FlowClass::kShort;
    SimTime start = 0;
    SimTime fct = 0;  // start of message to final ACK at the sender
    int hops = 0;
    int deflections = 0;
};

struct RateTracePoint {
    SimTime t = 0;
    NodeId src = -1, dst = -1;
    double rate_bps = 0;
};

// Nearest-rank percentile: the ceil(p*N)-th order statistic.
SimTime percentile(std::vector<SimTime> samples, double p);

struct SizeStats {
    std::int64_t count = 0;
    SimTime p50 = 0, p99 = 0, p999 = 0;
};

struct RunSummary {
    std::string scheme;
    std::uint64_t seed = 0;
    SimTime end_ns = 0;
    std::int64_t msgs_started = 0, msgs_completed = 0;
    double goodput_bps = 0;
    std::map<std::int64_t, SizeStats> fct_short_by_size;
    SizeStats fct_short_all;
    double ecn_short_frac_pct = 0;  // marked short DATA / delivered short DATA
    double path_dilation_pct = 0;   // mean over short DATA of hops/shortest - 1
    double load_increase_pct = 0;   // byte-hops actual vs shortest, all DATA
    std::int64_t drop_count = 0;
    std::int64_t pause_events = 0, cnp_count = 0, deflections = 0, suppressed_marks = 0;
    std::int64_t acks_sent = 0;
    std::int64_t seq_violations = 0, token_bound_violations = 0, escape_deflections = 0;
    bool watchdog_fired = false, hard_capped = false;
    std::int64_t injected_pkts = 0, delivered_pkts = 0, queued_end = 0, wire_end = 0;
    bool conservation_ok = true;
    std::int64_t max_queue_bytes = 0;
    int dft_high_water = 0;

    // Losslessness / ordering / token / conservation audits (the deadlock
    // watchdog reports separately: it has its own exit code).
    bool audits_ok() const {
        return drop_count == 0 && seq_violations == 0 && token_bound_violations == 0 &&
               escape_deflections == 0 && conservation_ok;
    }
};

class Metrics {
public:
    void on_injected_pkt() { injected_pkts_++; }
    void on_delivered_data(std::int64_t payload, std::int64_t wire, int hops, int shortest,
                           FlowClass cls, bool ecn_ce);
    void on_fct(const FctSample& s) { fct_.push_back(s); }
    void on_msg_started() { msgs_started_++; }
    void on_pause() { pause_events_++; }
    void on_cnp() { cnp_count_++; }
    void on_ack() { acks_sent_++; }
    void on_deflection(Lane lane);
    void on_suppressed_mark() { suppressed_marks_++; }
    void on_seq_violation() { seq_violations_++; }
    void on_token_bound_violation() { token_bound_violations_++; }
    void note_queue_depth(std::int64_t bytes);

    const std::vector<FctSample>& fct_samples() const { return fct_; }
    std::int64_t injected_pkts() const { return injected_pkts_; }
    std::int64_t delivered_pkts() const { return delivered_pkts_; }

    // warmup: FCT samples of messages started earlier are excluded from the
    // percentile stats (they still appear in fct.csv).
    RunSummary summarize(const std::string& scheme, std::uint64_t seed, SimTime end_ns,
                         SimTime warmup) const;

    void write_fct_csv(std::ostream& os) const;  // sorted by msg_id

private:
    std::vector<FctSample> fct_;
    std::int64_t injected_pkts_ = 0, delivered_pkts_ = 0;
    std::int64_t msgs_started_ = 0;
    std::int64_t pause_events_ = 0, cnp_count_ = 0, acks_sent_ = 0;
    std::int64_t deflections_ = 0, escape_deflections_ = 0, suppressed_marks_ = 0;
    std::int64_t seq_violations_ = 0, token_bound_violations_ = 0;
    std::int64_t short_delivered_ = 0, short_marked_ = 0;
    double dilation_sum_ = 0;
    std::int64_t payload_bytes_ = 0;
    std::int64_t byte_hops_ = 0, byte_hops_min_ = 0;
    std::int64_t max_queue_bytes_ = 0;
};

void write_rates_csv(std::ostream& os, const std::vector<RateTracePoint>& trace);

// summary.json payload: every RunSummary field plus the config echo.
std::string summary_json(const RunSummary& s, const ExperimentConfig& cfg);

}  // namespace dartsim
