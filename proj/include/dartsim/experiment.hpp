#pragma once

#include <string>
#include <vector>

#include "dartsim/metrics.hpp"
#include "dartsim/sim.hpp"
#include "dartsim/workload.hpp"

namespace dartsim {

struct SeedResult {
    std::uint64_t seed = 0;
    RunSummary summary;
    std::string fct_csv;
    std::string summary_json;
    std::string rates_csv;  // empty unless the rate trace is on
};

struct ExperimentResult {
    std::vector<SeedResult> per_seed;
    bool audits_ok = true;        // conjunction of per-run audits
    bool watchdog_fired = false;  // any seed deadlocked
    bool determinism_ok = true;   // seed[0] replay byte-compares
    double offered_load_ratio = 0;  // transmissible bytes / load budget

    // Median-of-seeds aggregates for the headline statistics.
    double median_p99_short_ns(std::int64_t size = 0) const;  // 0 = all shorts
    double median_ecn_short_pct() const;
    double median_goodput_bps() const;
    double median_dilation_pct() const;
    double median_load_increase_pct() const;
};

// One simulation per seed over the generated workload, or over `fixed` when
// given. When cfg.out_dir is non-empty, writes fct.csv / summary.json /
// rates.csv under <out_dir>/<scheme>_s<seed>/. When cfg.recheck_determinism
// is set, reruns the first seed and byte-compares its outputs.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const Schedule* fixed = nullptr);

// The ablation ladder on identical seeds and schedules: short-flow p99
// (median over seeds) per scheme, normalized to the DCQCN row. The optional
// out-flags accumulate run health across all rows (for the CLI exit code).
struct AblationRow {
    Scheme scheme;
    double p99_ns = 0;
    double normalized = 0;
};
std::vector<AblationRow> ablation_matrix(ExperimentConfig base, bool* audits_ok = nullptr,
                                         bool* watchdog_fired = nullptr);
std::string ablation_csv(const std::vector<AblationRow>& rows);

// Scenario presets.
// Star, n long flows staggered 1 ms apart into one receiver; rate trace on.
ExperimentConfig convergence_star_config(int senders);
Schedule convergence_star_schedule(const ExperimentConfig& cfg, int senders);

// Star, one long flow plus a 16-way jittered incast released mid-run.
ExperimentConfig incast_release_config();
Schedule incast_release_schedule(const ExperimentConfig& cfg, std::uint64_t seed);
// The incast group's start packets begin arriving at the receiver here.
SimTime incast_release_time();

// 128-host oversubscribed clos at the reference operating point.
ExperimentConfig typical40_config(Scheme scheme);

// Dispatch by name for the CLI: convergence-star | incast-release |
// typical-40. Unknown names throw ConfigError.
ExperimentConfig preset_config(const std::string& name);
bool preset_has_schedule(const std::string& name);
Schedule preset_schedule(const std::string& name, const ExperimentConfig& cfg,
                         std::uint64_t seed);

}  // namespace dartsim
