#include "dartsim/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dartsim/rng.hpp"

namespace dartsim {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SeedResult run_one(const ExperimentConfig& cfg, std::uint64_t seed, const Schedule* fixed,
                   double* offered_ratio) {
    Simulation sim(cfg, seed);
    sim.set_rate_trace(cfg.rate_trace);
    Schedule sched = fixed ? *fixed : generate_schedule(cfg, seed);
    if (offered_ratio) {
        const double budget = cfg.wl.load * static_cast<double>(cfg.topo.num_hosts) *
                              cfg.topo.link_rate_bps / cfg.topo.oversubscription *
                              static_cast<double>(cfg.wl.duration) / 8e9;
        *offered_ratio =
            budget > 0 ? static_cast<double>(
                             sched.offered_bytes(cfg.wl.duration, cfg.topo.link_rate_bps)) /
                             budget
                       : 0;
    }
    sim.load(std::move(sched));
    SeedResult r;
    r.seed = seed;
    r.summary = sim.run();
    {
        std::ostringstream os;
        sim.metrics().write_fct_csv(os);
        r.fct_csv = os.str();
    }
    r.summary_json = summary_json(r.summary, cfg);
    if (cfg.rate_trace) {
        std::ostringstream os;
        write_rates_csv(os, sim.rate_trace());
        r.rates_csv = os.str();
    }
    return r;
}

void write_outputs(const ExperimentConfig& cfg, const SeedResult& r) {
    if (cfg.out_dir.empty()) return;
    namespace fs = std::filesystem;
    const fs::path dir = fs::path(cfg.out_dir) /
                         (std::string(scheme_name(cfg.scheme)) + "_s" + std::to_string(r.seed));
    fs::create_directories(dir);
    auto put = [&dir](const char* name, const std::string& text) {
        std::ofstream f(dir / name, std::ios::binary);
        f << text;
    };
    put("fct.csv", r.fct_csv);
    put("summary.json", r.summary_json);
    if (cfg.rate_trace) put("rates.csv", r.rates_csv);
}

}  // namespace

double ExperimentResult::median_p99_short_ns(std::int64_t size) const {
    std::vector<double> v;
    for (const auto& r : per_seed) {
        if (size == 0) {
            if (r.summary.fct_short_all.count)
                v.push_back(static_cast<double>(r.summary.fct_short_all.p99));
        } else {
            auto it = r.summary.fct_short_by_size.find(size);
            if (it != r.summary.fct_short_by_size.end() && it->second.count)
                v.push_back(static_cast<double>(it->second.p99));
        }
    }
    return median(std::move(v));
}

double ExperimentResult::median_ecn_short_pct() const {
    std::vector<double> v;
    for (const auto& r : per_seed) v.push_back(r.summary.ecn_short_frac_pct);
    return median(std::move(v));
}

double ExperimentResult::median_goodput_bps() const {
    std::vector<double> v;
    for (const auto& r : per_seed) v.push_back(r.summary.goodput_bps);
    return median(std::move(v));
}

double ExperimentResult::median_dilation_pct() const {
    std::vector<double> v;
    for (const auto& r : per_seed) v.push_back(r.summary.path_dilation_pct);
    return median(std::move(v));
}

double ExperimentResult::median_load_increase_pct() const {
    std::vector<double> v;
    for (const auto& r : per_seed) v.push_back(r.summary.load_increase_pct);
    return median(std::move(v));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Schedule* fixed) {
    ExperimentConfig c = cfg;
    c.validate();
    ExperimentResult res;
    std::vector<double> ratios;
    for (std::uint64_t seed : c.seeds) {
        double ratio = 0;
        SeedResult r = run_one(c, seed, fixed, &ratio);
        ratios.push_back(ratio);
        write_outputs(c, r);
        res.audits_ok = res.audits_ok && r.summary.audits_ok();
        res.watchdog_fired = res.watchdog_fired || r.summary.watchdog_fired;
        res.per_seed.push_back(std::move(r));
    }
    res.offered_load_ratio = median(std::move(ratios));
    if (c.recheck_determinism) {
        const SeedResult again = run_one(c, c.seeds.front(), fixed, nullptr);
        const SeedResult& first = res.per_seed.front();
        res.determinism_ok = again.fct_csv == first.fct_csv &&
                             again.summary_json == first.summary_json &&
                             again.rates_csv == first.rates_csv;
    }
    return res;
}

std::vector<AblationRow> ablation_matrix(ExperimentConfig base, bool* audits_ok,
                                         bool* watchdog_fired) {
    const Scheme order[] = {Scheme::kDart,           Scheme::kDasrOnly,
                            Scheme::kIofdOnly,       Scheme::kDartNoLookahead,
                            Scheme::kPriqDcqcn,      Scheme::kDcqcn};
    std::vector<AblationRow> rows;
    double anchor = 0;
    for (Scheme s : order) {
        base.scheme = s;
        const ExperimentResult r = run_experiment(base);
        if (audits_ok) *audits_ok = *audits_ok && r.audits_ok && r.determinism_ok;
        if (watchdog_fired) *watchdog_fired = *watchdog_fired || r.watchdog_fired;
        AblationRow row;
        row.scheme = s;
        row.p99_ns = r.median_p99_short_ns();
        if (s == Scheme::kDcqcn) anchor = row.p99_ns;
        rows.push_back(row);
    }
    for (auto& row : rows) row.normalized = anchor > 0 ? row.p99_ns / anchor : 0;
    return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    os << "scheme,p99_ns,normalized\n";
    for (const auto& r : rows) {
        os << scheme_name(r.scheme) << ',' << static_cast<std::int64_t>(r.p99_ns) << ',';
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", r.normalized);
        os << buf << '\n';
    }
    return os.str();
}

ExperimentConfig convergence_star_config(int senders) {
    ExperimentConfig cfg;
    cfg.topo.num_hosts = senders + 1;
    cfg.topo.oversubscription = 1.0;
    cfg.scheme = Scheme::kDart;
    cfg.wl.incast_degree = 1;
    cfg.wl.duration = static_cast<SimTime>(senders - 1) * kNsPerMs + 4 * kNsPerMs;
    cfg.rate_trace = true;
    cfg.warmup_frac = 0;
    return cfg;
}

Schedule convergence_star_schedule(const ExperimentConfig& cfg, int senders) {
    Schedule s;
    const auto dst = static_cast<NodeId>(senders);
    for (int k = 0; k < senders; ++k)
        s.msgs.push_back(Message{static_cast<MsgId>(k + 1), static_cast<NodeId>(k), dst,
                                 cfg.wl.long_size, FlowClass::kLong,
                                 static_cast<SimTime>(k) * kNsPerMs, 0});
    return s;
}

ExperimentConfig incast_release_config() {
    ExperimentConfig cfg;
    cfg.topo.num_hosts = 18;
    cfg.topo.oversubscription = 1.0;
    cfg.scheme = Scheme::kDart;
    cfg.wl.duration = 8 * kNsPerMs;
    cfg.rate_trace = true;
    cfg.warmup_frac = 0;
    return cfg;
}

SimTime incast_release_time() { return 5 * kNsPerMs; }

Schedule incast_release_schedule(const ExperimentConfig& cfg, std::uint64_t seed) {
    Schedule s;
    s.msgs.push_back(Message{1, 0, 17, cfg.wl.long_size, FlowClass::kLong, 0, 0});
    IncastGroup g{1, 17, {}};
    for (NodeId k = 1; k <= 16; ++k) g.senders.push_back(k);
    s.groups.push_back(g);
    RngStream rng(seed, Stream::kJitter);
    for (NodeId k = 1; k <= 16; ++k) {
        const SimTime jit = cfg.wl.jitter_max > 0
                                ? static_cast<SimTime>(rng.next_below(
                                      static_cast<std::uint64_t>(cfg.wl.jitter_max) + 1))
                                : 0;
        s.msgs.push_back(Message{static_cast<MsgId>(k + 1), k, 17, 8000, FlowClass::kShort,
                                 incast_release_time() + jit, 1});
    }
    std::sort(s.msgs.begin(), s.msgs.end(), [](const Message& a, const Message& b) {
        return a.start_time != b.start_time ? a.start_time < b.start_time : a.id < b.id;
    });
    return s;
}

ExperimentConfig typical40_config(Scheme scheme) {
    ExperimentConfig cfg;
    cfg.scheme = scheme;
    cfg.topo.num_hosts = 128;
    cfg.topo.oversubscription = 4.0;
    cfg.wl.load = 0.4;
    cfg.wl.short_frac = 0.4;
    cfg.wl.duration = 30 * kNsPerMs;
    cfg.seeds = {1, 2, 3};
    return cfg;
}

ExperimentConfig preset_config(const std::string& name) {
    if (name == "convergence-star") return convergence_star_config(2);
    if (name == "incast-release") return incast_release_config();
    if (name == "typical-40") return typical40_config(Scheme::kDart);
    throw ConfigError("preset: unknown name '" + name +
                      "' (convergence-star | incast-release | typical-40)");
}

bool preset_has_schedule(const std::string& name) {
    return name == "convergence-star" || name == "incast-release";
}

Schedule preset_schedule(const std::string& name, const ExperimentConfig& cfg,
                         std::uint64_t seed) {
    if (name == "convergence-star")
        return convergence_star_schedule(cfg, cfg.topo.num_hosts - 1);
    if (name == "incast-release") return incast_release_schedule(cfg, seed);
    throw ConfigError("preset: '" + name + "' has no fixed schedule");
}

}  // namespace dartsim
