#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dartsim/ccalgos.hpp"
#include "dartsim/time.hpp"
#include "dartsim/topology.hpp"

namespace dartsim {

enum class Scheme {
    kDart = 0,
    kDartNoLookahead,
    kDasrOnly,
    kIofdOnly,
    kDcqcn,
    kTimely,
    kPriqDcqcn,
};

const char* scheme_name(Scheme s);
Scheme scheme_from_string(const std::string& name);  // throws ConfigError

// Feature switches implied by a scheme. Ablations toggle exactly one
// mechanism at a time; the receiver machinery itself always runs.
struct SchemeTraits {
    bool dasr;       // sender paces at line_rate / piggybacked n
    bool lookahead;  // incast start packets advertise the sender list
    bool deflect;    // packets carry deflection tokens
    bool suppress;   // receiver hides marks from the NP in receiver congestion
    bool dcqcn;      // DCQCN NP/RP active (native or as fallback governor)
    bool timely;     // window-based TIMELY governs transmission
    bool priq;       // short class strictly before long within data service
};

SchemeTraits traits_for(Scheme s);

struct WorkloadParams {
    double load = 0.4;        // fraction of aggregate host capacity offered
    double short_frac = 0.4;  // short bytes / total bytes (typical mix)
    std::vector<std::int64_t> short_sizes = {2000, 4000, 8000};
    std::int64_t long_size = 1'000'000'000;
    int incast_degree = 16;
    SimTime jitter_max = 100 * kNsPerUs;  // per-sender start jitter, uniform
    SimTime duration = 50 * kNsPerMs;     // injection window
};

struct SwitchParams {
    std::int64_t capacity_bytes = 225'000;  // per ingress channel
    std::int64_t ecn_threshold = 22'500;
    std::int64_t deflect_threshold = 15'000;
    int dft_capacity = 8;
    int deflection_tokens = 4;  // initial budget on short DATA
};

struct NicParams {
    std::int32_t data_bytes = 1000;  // DATA payload per packet
    std::int32_t ctrl_bytes = 64;    // ACK / CNP wire size
    std::int64_t short_flow_max = 8000;
    SimTime sweep_period = 500 * kNsPerMs;
    SimTime fsm_window = 100 * kNsPerUs;  // "mark seen recently" horizon
    SimTime rate_tau = 10 * kNsPerUs;     // rx goodput EWMA time constant
    double line_frac = 0.9;               // rx rate >= frac*line => receiver congestion
};

struct ExperimentConfig {
    Scheme scheme = Scheme::kDart;
    TopologyParams topo;
    WorkloadParams wl;
    SwitchParams sw;
    NicParams nic;
    DcqcnParams dcqcn;    // line rate synced with topo at validate()
    TimelyParams timely;  // line rate synced at validate(); min_rtt set
                          // from the built topology when a run starts
    std::vector<std::uint64_t> seeds = {1};
    std::string out_dir = "out";
    bool rate_trace = false;         // rates.csv (heavy at full load)
    bool recheck_determinism = true; // rerun seed[0], byte-compare outputs
    double warmup_frac = 0.1;        // excluded from FCT percentiles
    double hard_cap_mult = 2.0;      // absolute stop at mult * duration

    // Fills derived fields and throws ConfigError naming the offending
    // field when a constraint is violated.
    void validate();
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// JSON round trip. load_config applies `text` on top of defaults;
// config_json echoes every field (the echo reproduces the run).
ExperimentConfig load_config(const std::string& text);
std::string config_json(const ExperimentConfig& cfg, int indent = -1);

double mix_short_frac(const std::string& mix);  // typical|light|heavy

}  // namespace dartsim
