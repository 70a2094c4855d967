#include "dartsim/config.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace dartsim {

using nlohmann::json;
using nlohmann::ordered_json;

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::kDart: return "DART";
        case Scheme::kDartNoLookahead: return "DART_NO_LOOKAHEAD";
        case Scheme::kDasrOnly: return "DASR_ONLY";
        case Scheme::kIofdOnly: return "IOFD_ONLY";
        case Scheme::kDcqcn: return "DCQCN";
        case Scheme::kTimely: return "TIMELY";
        case Scheme::kPriqDcqcn: return "PRIQ_DCQCN";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& name) {
    for (Scheme s : {Scheme::kDart, Scheme::kDartNoLookahead, Scheme::kDasrOnly,
                     Scheme::kIofdOnly, Scheme::kDcqcn, Scheme::kTimely, Scheme::kPriqDcqcn})
        if (name == scheme_name(s)) return s;
    throw ConfigError("scheme: unknown value '" + name +
                      "' (expected DART, DART_NO_LOOKAHEAD, DASR_ONLY, IOFD_ONLY, "
                      "DCQCN, TIMELY or PRIQ_DCQCN)");
}

SchemeTraits traits_for(Scheme s) {
    switch (s) {
        case Scheme::kDart: return {true, true, true, true, true, false, false};
        case Scheme::kDartNoLookahead: return {true, false, true, true, true, false, false};
        case Scheme::kDasrOnly: return {true, true, false, true, true, false, false};
        case Scheme::kIofdOnly: return {false, false, true, false, true, false, false};
        case Scheme::kDcqcn: return {false, false, false, false, true, false, false};
        case Scheme::kTimely: return {false, false, false, false, false, true, false};
        case Scheme::kPriqDcqcn: return {false, false, false, false, true, false, true};
    }
    return {};
}

double mix_short_frac(const std::string& mix) {
    if (mix == "typical") return 0.4;
    if (mix == "light") return 0.2;
    if (mix == "heavy") return 0.6;
    throw ConfigError("workload.mix: unknown value '" + mix +
                      "' (expected typical, light or heavy)");
}

void ExperimentConfig::validate() {
    auto bad = [](const std::string& m) { return ConfigError(m); };
    if (topo.num_hosts < 2) throw bad("topology.hosts: need at least 2");
    if (topo.oversubscription < 1.0) throw bad("topology.oversubscription: must be >= 1");
    if (topo.link_rate_bps <= 0) throw bad("topology.link_rate: must be positive");
    if (topo.link_delay <= 0) throw bad("topology.link_delay: must be positive");
    if (wl.load <= 0 || wl.load > 1.0) throw bad("workload.load: must be in (0, 1]");
    if (wl.short_frac < 0 || wl.short_frac > 1.0)
        throw bad("workload.short_frac: must be in [0, 1]");
    if (wl.incast_degree < 1) throw bad("workload.incast_degree: must be >= 1");
    if (wl.incast_degree > topo.num_hosts - 1)
        throw bad("workload.incast_degree: exceeds hosts - 1");
    if (wl.duration <= 0) throw bad("workload.duration: must be positive");
    if (wl.short_sizes.empty()) throw bad("workload.short_sizes: must be non-empty");
    for (auto s : wl.short_sizes)
        if (s <= 0) throw bad("workload.short_sizes: sizes must be positive");
    if (wl.jitter_max < 0) throw bad("workload.jitter: must be >= 0");
    if (sw.deflect_threshold >= sw.ecn_threshold)
        throw bad("switch.deflect_threshold: must be below switch.ecn_threshold");
    if (sw.ecn_threshold >= sw.capacity_bytes)
        throw bad("switch.ecn_threshold: must be below switch.capacity");
    if (sw.dft_capacity < 1) throw bad("switch.dft_entries: must be >= 1");
    if (sw.deflection_tokens < 0) throw bad("switch.deflection_tokens: must be >= 0");
    if (nic.data_bytes < 1) throw bad("nic.data_packet_bytes: must be >= 1");
    if (nic.ctrl_bytes < 1) throw bad("nic.ctrl_packet_bytes: must be >= 1");
    if (nic.line_frac <= 0 || nic.line_frac > 1) throw bad("nic.line_frac: must be in (0, 1]");
    if (seeds.empty()) throw bad("seeds: must list at least one seed");
    if (warmup_frac < 0 || warmup_frac >= 1) throw bad("warmup_frac: must be in [0, 1)");
    if (hard_cap_mult < 1) throw bad("hard_cap_mult: must be >= 1");
    // PFC headroom must leave a usable pause band.
    std::int64_t max_wire = nic.data_bytes + 2LL * wl.incast_degree;
    auto bdp = static_cast<std::int64_t>(
        std::ceil(topo.link_rate_bps * 2.0 * static_cast<double>(topo.link_delay) / 8e9));
    if (sw.capacity_bytes - (bdp + max_wire) - 2 * max_wire <= 0)
        throw bad("switch.capacity: too small for PFC headroom at this rate/delay");
    dcqcn.line_rate_bps = topo.link_rate_bps;
    timely.line_rate_bps = topo.link_rate_bps;
}

namespace {

template <typename T>
void get_to_if(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) it->get_to(out);
}

SimTime get_us(const json& j, const char* key, SimTime fallback) {
    if (auto it = j.find(key); it != j.end())
        return static_cast<SimTime>(it->get<double>() * kNsPerUs);
    return fallback;
}

SimTime get_ms(const json& j, const char* key, SimTime fallback) {
    if (auto it = j.find(key); it != j.end())
        return static_cast<SimTime>(it->get<double>() * static_cast<double>(kNsPerMs));
    return fallback;
}

}  // namespace

ExperimentConfig load_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    // A summary.json embeds the originating config under "config"; accepting
    // it directly lets any past run be replayed from its own output.
    if (j.contains("config") && j["config"].is_object()) j = j["config"];
    ExperimentConfig c;
    if (j.contains("scheme")) c.scheme = scheme_from_string(j["scheme"].get<std::string>());
    get_to_if(j, "hosts", c.topo.num_hosts);
    get_to_if(j, "oversubscription", c.topo.oversubscription);
    if (j.contains("link_rate_gbps")) c.topo.link_rate_bps = j["link_rate_gbps"].get<double>() * 1e9;
    c.topo.link_delay = get_us(j, "link_delay_us", c.topo.link_delay);
    get_to_if(j, "load", c.wl.load);
    if (j.contains("mix")) {
        const auto& m = j["mix"];
        c.wl.short_frac = m.is_number() ? m.get<double>() : mix_short_frac(m.get<std::string>());
    }
    get_to_if(j, "short_sizes", c.wl.short_sizes);
    get_to_if(j, "long_size", c.wl.long_size);
    get_to_if(j, "incast_degree", c.wl.incast_degree);
    c.wl.jitter_max = get_us(j, "jitter_us", c.wl.jitter_max);
    c.wl.duration = get_ms(j, "duration_ms", c.wl.duration);
    get_to_if(j, "seeds", c.seeds);
    if (j.contains("seed")) c.seeds = {j["seed"].get<std::uint64_t>()};
    get_to_if(j, "out", c.out_dir);
    get_to_if(j, "rate_trace", c.rate_trace);
    get_to_if(j, "recheck_determinism", c.recheck_determinism);
    get_to_if(j, "warmup_frac", c.warmup_frac);
    get_to_if(j, "hard_cap_mult", c.hard_cap_mult);
    if (j.contains("switch")) {
        const auto& s = j["switch"];
        get_to_if(s, "capacity_bytes", c.sw.capacity_bytes);
        get_to_if(s, "ecn_threshold_bytes", c.sw.ecn_threshold);
        get_to_if(s, "deflect_threshold_bytes", c.sw.deflect_threshold);
        get_to_if(s, "dft_entries", c.sw.dft_capacity);
        get_to_if(s, "deflection_tokens", c.sw.deflection_tokens);
    }
    if (j.contains("nic")) {
        const auto& n = j["nic"];
        get_to_if(n, "data_packet_bytes", c.nic.data_bytes);
        get_to_if(n, "ctrl_packet_bytes", c.nic.ctrl_bytes);
        get_to_if(n, "short_flow_max_bytes", c.nic.short_flow_max);
        c.nic.sweep_period = get_ms(n, "sweep_period_ms", c.nic.sweep_period);
        c.nic.fsm_window = get_us(n, "fsm_window_us", c.nic.fsm_window);
        c.nic.rate_tau = get_us(n, "rate_tau_us", c.nic.rate_tau);
        get_to_if(n, "line_rate_fraction", c.nic.line_frac);
    }
    if (j.contains("dcqcn")) {
        const auto& d = j["dcqcn"];
        if (d.contains("min_rate_mbps")) c.dcqcn.min_rate_bps = d["min_rate_mbps"].get<double>() * 1e6;
        if (d.contains("g_inverse")) c.dcqcn.g = 1.0 / d["g_inverse"].get<double>();
        if (d.contains("rate_ai_mbps")) c.dcqcn.rate_ai_bps = d["rate_ai_mbps"].get<double>() * 1e6;
        if (d.contains("rate_hai_mbps")) c.dcqcn.rate_hai_bps = d["rate_hai_mbps"].get<double>() * 1e6;
        if (d.contains("byte_counter_mb"))
            c.dcqcn.byte_counter = static_cast<std::int64_t>(d["byte_counter_mb"].get<double>() * 1e6);
        c.dcqcn.timer_period = get_us(d, "timer_us", c.dcqcn.timer_period);
        get_to_if(d, "fr_stages", c.dcqcn.fr_stages);
        get_to_if(d, "ai_stages", c.dcqcn.ai_stages);
        c.dcqcn.cnp_min_gap = get_us(d, "cnp_interval_us", c.dcqcn.cnp_min_gap);
    }
    if (j.contains("timely")) {
        const auto& t = j["timely"];
        c.timely.t_low = get_us(t, "t_low_us", c.timely.t_low);
        c.timely.t_high = get_us(t, "t_high_us", c.timely.t_high);
        if (t.contains("add_step_mbps")) c.timely.add_step_bps = t["add_step_mbps"].get<double>() * 1e6;
        get_to_if(t, "beta", c.timely.beta);
        get_to_if(t, "ewma_weight", c.timely.ewma_alpha);
        get_to_if(t, "hai_samples", c.timely.hai_after);
        get_to_if(t, "hai_multiplier", c.timely.hai_mult);
        if (t.contains("min_rate_mbps")) c.timely.min_rate_bps = t["min_rate_mbps"].get<double>() * 1e6;
    }
    c.validate();
    return c;
}

std::string config_json(const ExperimentConfig& c, int indent) {
    ordered_json j;
    j["scheme"] = scheme_name(c.scheme);
    j["hosts"] = c.topo.num_hosts;
    j["oversubscription"] = c.topo.oversubscription;
    j["link_rate_gbps"] = c.topo.link_rate_bps / 1e9;
    j["link_delay_us"] = static_cast<double>(c.topo.link_delay) / kNsPerUs;
    j["load"] = c.wl.load;
    j["mix"] = c.wl.short_frac;
    j["short_sizes"] = c.wl.short_sizes;
    j["long_size"] = c.wl.long_size;
    j["incast_degree"] = c.wl.incast_degree;
    j["jitter_us"] = static_cast<double>(c.wl.jitter_max) / kNsPerUs;
    j["duration_ms"] = static_cast<double>(c.wl.duration) / static_cast<double>(kNsPerMs);
    j["seeds"] = c.seeds;
    j["out"] = c.out_dir;
    j["rate_trace"] = c.rate_trace;
    j["recheck_determinism"] = c.recheck_determinism;
    j["warmup_frac"] = c.warmup_frac;
    j["hard_cap_mult"] = c.hard_cap_mult;
    j["switch"] = {{"capacity_bytes", c.sw.capacity_bytes},
                   {"ecn_threshold_bytes", c.sw.ecn_threshold},
                   {"deflect_threshold_bytes", c.sw.deflect_threshold},
                   {"dft_entries", c.sw.dft_capacity},
                   {"deflection_tokens", c.sw.deflection_tokens}};
    j["nic"] = {{"data_packet_bytes", c.nic.data_bytes},
                {"ctrl_packet_bytes", c.nic.ctrl_bytes},
                {"short_flow_max_bytes", c.nic.short_flow_max},
                {"sweep_period_ms", static_cast<double>(c.nic.sweep_period) / kNsPerMs},
                {"fsm_window_us", static_cast<double>(c.nic.fsm_window) / kNsPerUs},
                {"rate_tau_us", static_cast<double>(c.nic.rate_tau) / kNsPerUs},
                {"line_rate_fraction", c.nic.line_frac}};
    j["dcqcn"] = {{"min_rate_mbps", c.dcqcn.min_rate_bps / 1e6},
                  {"g_inverse", 1.0 / c.dcqcn.g},
                  {"rate_ai_mbps", c.dcqcn.rate_ai_bps / 1e6},
                  {"rate_hai_mbps", c.dcqcn.rate_hai_bps / 1e6},
                  {"byte_counter_mb", static_cast<double>(c.dcqcn.byte_counter) / 1e6},
                  {"timer_us", static_cast<double>(c.dcqcn.timer_period) / kNsPerUs},
                  {"fr_stages", c.dcqcn.fr_stages},
                  {"ai_stages", c.dcqcn.ai_stages},
                  {"cnp_interval_us", static_cast<double>(c.dcqcn.cnp_min_gap) / kNsPerUs}};
    j["timely"] = {{"t_low_us", static_cast<double>(c.timely.t_low) / kNsPerUs},
                   {"t_high_us", static_cast<double>(c.timely.t_high) / kNsPerUs},
                   {"add_step_mbps", c.timely.add_step_bps / 1e6},
                   {"beta", c.timely.beta},
                   {"ewma_weight", c.timely.ewma_alpha},
                   {"hai_samples", c.timely.hai_after},
                   {"hai_multiplier", c.timely.hai_mult},
                   {"min_rate_mbps", c.timely.min_rate_bps / 1e6}};
    return indent >= 0 ? j.dump(indent) : j.dump();
}

}  // namespace dartsim
