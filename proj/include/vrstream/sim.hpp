#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "vrstream/baselines.hpp"
#include "vrstream/channel.hpp"
#include "vrstream/config.hpp"
#include "vrstream/media.hpp"
#include "vrstream/phy_scheduler.hpp"
#include "vrstream/rl_agent.hpp"

namespace vrstream {

enum class scheme { qps_pf, fps_pf, qps_pr, fps_pr, proposed };

const char* scheme_name(scheme s);
std::vector<scheme> all_schemes();

struct chunk_outcome {
    double reward = 0.0;
    double normalized_reward = 0.0;
    int missed_fov_tiles = 0;
    int fov_size = 0;
    double budget_bits = 0.0;
    double delivered_bits = 0.0;
    double violation_bps = 0.0;           // AFER shortfall at the final allocation
    std::vector<int> delivered_quality;   // per tile; -1 = not delivered
};

// Invariant violations observed while running; all-zero on a correct build.
struct audit_stats {
    long long budget_violations = 0;   // delivered or committed bits beyond the budget
    long long slot_conflicts = 0;      // allocation does not tile the data slots
    long long deadline_violations = 0; // transfer window inconsistent with the deadlines
    long long nesting_violations = 0;  // delivered delta levels not a prefix

    long long total() const {
        return budget_violations + slot_conflicts + deadline_violations + nesting_violations;
    }
};

struct episode_setup {
    const run_config* cfg = nullptr;
    std::vector<const video_manifest*> user_manifest;   // one per simulated user
    std::vector<const fov_probability_map*> user_prmap; // schedule-time FoV knowledge
    std::vector<const fov_trace*> user_trace;           // realized FoV at playback
    std::vector<double> user_distance_m;

    void validate() const;
};

struct episode_result {
    std::vector<std::vector<chunk_outcome>> outcomes; // [user][chunk-1]
    audit_stats audits;
    // [tile][*]: per-agent TD trajectories, populated when training a policy
    std::vector<std::vector<transition>> trajectories;
    double mean_total_reward = 0.0; // mean over users of per-episode reward sums
};

// reward / (K * tier_value(top)); 0 when the realized FoV is empty. The
// denominator repeats the same tier_value addition K times so the abundance
// limit divides to exactly 1.0.
double normalized_reward(double reward, int realized_fov_size, double beta, int ladder_levels);

// One chunk window = one beam-coherence block: alignment slots first, then
// the scheduled data slots; downloads drain each user's grant queue
// slot-by-slot and a partially transferred delta leaves the level
// undelivered.
class episode_engine {
public:
    episode_engine(const episode_setup& setup, scheme sch, std::vector<tile_agent>* agents,
                   bool training, std::uint64_t episode_seed, const feature_scaling& scaling);

    // unscored block priming predictor and PF state with chunk 1's inputs
    void run_warmup_block();
    std::vector<chunk_outcome> step_chunk(int c);
    episode_result finish();

private:
    struct user_chunk_decisions; // per-chunk bookkeeping

    std::vector<double> sample_rates();
    std::vector<int> allocate(const std::vector<double>& rates, int chunk);
    void feed_predictors(const std::vector<int>& alloc, const std::vector<double>& rates);

    const episode_setup& setup_;
    scheme scheme_;
    std::vector<tile_agent>* agents_;
    bool training_;
    std::uint64_t episode_seed_;
    feature_scaling scaling_;
    playback_timeline timeline_;
    radio_config radio_;
    rng channel_rng_;
    rng action_rng_;
    std::unique_ptr<proportional_fair_scheduler> pf_;
    std::vector<bandwidth_predictor> predictors_;
    std::vector<std::vector<chunk_outcome>> outcomes_;
    audit_stats audits_;
    // trajectory assembly: states/actions of the previous chunk await s_next
    std::vector<std::vector<transition>> trajectories_;
    std::vector<std::vector<agent_state>> prev_state_; // [user][tile]
    std::vector<std::vector<int>> prev_action_;
    std::vector<std::vector<double>> prev_eta_;
    bool have_prev_ = false;
    int next_chunk_ = 1;
};

episode_result run_episode(const episode_setup& setup, scheme sch,
                           std::vector<tile_agent>* agents, bool training,
                           std::uint64_t episode_seed, const feature_scaling& scaling);

struct report_row {
    std::string scheme;
    int user = 0;
    int chunk = 0;
    double reward = 0.0;
    double normalized_reward = 0.0;
    int missed_fov_tiles = 0;
};

struct aggregate_row {
    std::string scheme;
    int user = 0;
    double mean_reward = 0.0;
};

std::vector<report_row> to_report_rows(scheme sch, const episode_result& result);
std::vector<aggregate_row> aggregate_means(const std::vector<report_row>& rows);
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values);

// normalization bounds from the manifests: the largest top-quality tile and
// the largest all-tiles-at-top chunk size
feature_scaling auto_scaling(const run_config& cfg,
                             const std::vector<const video_manifest*>& manifests);

} // namespace vrstream
