#include "dartsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "dartsim/config.hpp"

namespace dartsim {

SimTime percentile(std::vector<SimTime> samples, double p) {
    if (samples.empty()) return 0;
    std::sort(samples.begin(), samples.end());
    auto rank = static_cast<std::size_t>(
        std::ceil(p * static_cast<double>(samples.size())));
    if (rank < 1) rank = 1;
    return samples[rank - 1];
}

void Metrics::on_delivered_data(std::int64_t payload, std::int64_t wire, int hops,
                                int shortest, FlowClass cls, bool ecn_ce) {
    delivered_pkts_++;
    payload_bytes_ += payload;
    byte_hops_ += wire * hops;
    byte_hops_min_ += wire * shortest;
    if (cls == FlowClass::kShort) {
        short_delivered_++;
        if (ecn_ce) short_marked_++;
        dilation_sum_ +=
            static_cast<double>(hops) / static_cast<double>(shortest) - 1.0;
    }
}

void Metrics::on_deflection(Lane lane) {
    deflections_++;
    if (lane == Lane::kEscape) escape_deflections_++;
}

void Metrics::note_queue_depth(std::int64_t bytes) {
    max_queue_bytes_ = std::max(max_queue_bytes_, bytes);
}

namespace {

SizeStats stats_of(std::vector<SimTime>& v) {
    SizeStats st;
    st.count = static_cast<std::int64_t>(v.size());
    if (v.empty()) return st;
    std::sort(v.begin(), v.end());
    auto rank = [&](double p) {
        auto r = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size())));
        return v[std::max<std::size_t>(r, 1) - 1];
    };
    st.p50 = rank(0.5);
    st.p99 = rank(0.99);
    st.p999 = rank(0.999);
    return st;
}

}  // namespace

RunSummary Metrics::summarize(const std::string& scheme, std::uint64_t seed,
                              SimTime end_ns, SimTime warmup) const {
    RunSummary s;
    s.scheme = scheme;
    s.seed = seed;
    s.end_ns = end_ns;
    s.msgs_started = msgs_started_;
    s.msgs_completed = static_cast<std::int64_t>(fct_.size());
    s.goodput_bps = end_ns > 0 ? static_cast<double>(payload_bytes_) * 8e9 /
                                     static_cast<double>(end_ns)
                               : 0.0;
    std::map<std::int64_t, std::vector<SimTime>> by_size;
    std::vector<SimTime> all_short;
    for (const auto& f : fct_) {
        if (f.cls != FlowClass::kShort || f.start < warmup) continue;
        by_size[f.size].push_back(f.fct);
        all_short.push_back(f.fct);
    }
    for (auto& [size, v] : by_size) s.fct_short_by_size[size] = stats_of(v);
    s.fct_short_all = stats_of(all_short);
    s.ecn_short_frac_pct = short_delivered_ > 0
                               ? 100.0 * static_cast<double>(short_marked_) /
                                     static_cast<double>(short_delivered_)
                               : 0.0;
    s.path_dilation_pct = short_delivered_ > 0
                              ? 100.0 * dilation_sum_ / static_cast<double>(short_delivered_)
                              : 0.0;
    s.load_increase_pct = byte_hops_min_ > 0
                              ? 100.0 * (static_cast<double>(byte_hops_) /
                                             static_cast<double>(byte_hops_min_) -
                                         1.0)
                              : 0.0;
    s.pause_events = pause_events_;
    s.cnp_count = cnp_count_;
    s.acks_sent = acks_sent_;
    s.deflections = deflections_;
    s.suppressed_marks = suppressed_marks_;
    s.seq_violations = seq_violations_;
    s.token_bound_violations = token_bound_violations_;
    s.escape_deflections = escape_deflections_;
    s.injected_pkts = injected_pkts_;
    s.delivered_pkts = delivered_pkts_;
    s.max_queue_bytes = max_queue_bytes_;
    return s;
}

void Metrics::write_fct_csv(std::ostream& os) const {
    std::vector<const FctSample*> rows;
    rows.reserve(fct_.size());
    for (const auto& f : fct_) rows.push_back(&f);
    std::sort(rows.begin(), rows.end(),
              [](const FctSample* a, const FctSample* b) { return a->id < b->id; });
    os << "msg_id,src,dst,size,class,start_ns,fct_ns,hops,deflections\n";
    for (const auto* f : rows)
        os << f->id << ',' << f->src << ',' << f->dst << ',' << f->size << ','
           << (f->cls == FlowClass::kShort ? "short" : "long") << ',' << f->start << ','
           << f->fct << ',' << f->hops << ',' << f->deflections << '\n';
}

void write_rates_csv(std::ostream& os, const std::vector<RateTracePoint>& trace) {
    os << "time_ns,src,dst,rate_bps\n";
    for (const auto& p : trace)
        os << p.t << ',' << p.src << ',' << p.dst << ','
           << static_cast<std::int64_t>(std::llround(p.rate_bps)) << '\n';
}

std::string summary_json(const RunSummary& s, const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["scheme"] = s.scheme;
    j["seed"] = s.seed;
    j["end_ns"] = s.end_ns;
    j["msgs_started"] = s.msgs_started;
    j["msgs_completed"] = s.msgs_completed;
    j["goodput_bps"] = s.goodput_bps;
    nlohmann::ordered_json fct = nlohmann::ordered_json::object();
    auto stats_json = [](const SizeStats& st) {
        return nlohmann::ordered_json{
            {"count", st.count}, {"p50_ns", st.p50}, {"p99_ns", st.p99}, {"p999_ns", st.p999}};
    };
    for (const auto& [size, st] : s.fct_short_by_size)
        fct[std::to_string(size)] = stats_json(st);
    j["fct_short_by_size"] = fct;
    j["fct_short_all"] = stats_json(s.fct_short_all);
    j["ecn_short_frac_pct"] = s.ecn_short_frac_pct;
    j["path_dilation_pct"] = s.path_dilation_pct;
    j["load_increase_pct"] = s.load_increase_pct;
    j["drop_count"] = s.drop_count;
    j["pause_events"] = s.pause_events;
    j["cnp_count"] = s.cnp_count;
    j["acks_sent"] = s.acks_sent;
    j["deflections"] = s.deflections;
    j["suppressed_marks"] = s.suppressed_marks;
    j["seq_violations"] = s.seq_violations;
    j["token_bound_violations"] = s.token_bound_violations;
    j["escape_deflections"] = s.escape_deflections;
    j["watchdog_fired"] = s.watchdog_fired;
    j["hard_capped"] = s.hard_capped;
    j["injected_pkts"] = s.injected_pkts;
    j["delivered_pkts"] = s.delivered_pkts;
    j["queued_end"] = s.queued_end;
    j["wire_end"] = s.wire_end;
    j["conservation_ok"] = s.conservation_ok;
    j["max_queue_bytes"] = s.max_queue_bytes;
    j["dft_high_water"] = s.dft_high_water;
    j["config"] = nlohmann::ordered_json::parse(config_json(cfg));
    return j.dump(2) + "\n";
}

}  // namespace dartsim
