#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vrstream {

// Flat run configuration. Defaults reproduce the reference experimental
// setup where it pins a value; everything else is a labeled assumption that
// the echoed config marks as such.
struct run_config {
    // radio
    double bandwidth_hz = 1e9;
    double tx_power_dbm = 45.0;
    double noise_psd_w_per_hz = 1e-9;
    double beam_gain = 10.0;
    double pathloss_exp = 2.0;
    double pathloss_ref_gain = 1.0;
    int sbs_count = 1;
    double distance_min_m = 15.0;
    double distance_max_m = 35.0;
    std::vector<double> distances_m;  // explicit per-user distances; empty -> draw from the range
    double fixed_rate_bps = 0.0; // > 0 disables fading and pins every link rate

    // media / playback
    int users = 5;
    int chunk_count = 60;
    double chunk_duration_s = 1.0;
    double startup_delay_s = 2.0;
    double margin_s = 0.2;
    int grid_rows = 5;
    int grid_cols = 10;
    std::vector<double> ladder_bps = {1e6, 2.5e6, 5e6, 8e6, 16e6};
    double vbr_jitter = 0.2;

    // slot scheduling
    int slots_per_block = 100; // T_B
    double alignment_fraction = 0.05;
    double lambda = 0.0;
    int scheduler_max_iters = 0;   // 0 -> U*T
    int scheduler_random_init = 0; // 1 -> seeded-random starting split instead of the floor rule
    int pf_window = 100;

    // baselines
    int predictor_window = 100;
    int predictor_warmup_blocks = 0;
    double p_th = 0.01;

    // reinforcement learning
    double gamma = 0.9;
    double lr_actor = 0.001;
    double lr_critic = 0.001;
    double beta = 0.0;        // 0 -> 1/(tile count + 1)
    double miss_penalty = 1.0;
    int workers = 4;
    int iterations = 50000;
    double train_fraction = 0.7;
    double feature_g_norm_bits = 0.0;    // 0 -> auto from the manifests
    double feature_size_norm_bits = 0.0; // 0 -> auto from the manifests
    int eval_episodes = 1;

    // synthetic traces
    int trace_users = 50;
    int trace_videos = 5;
    int fov_block = 3;
    int walk_step = 1;

    std::uint64_t seed = 1;

    int alignment_slots() const; // T_A = round(fraction * T_B)
    int data_slots() const;      // T = T_B - T_A
    double resolved_beta() const;
    void validate() const; // throws config_error
};

// Unknown keys are rejected; the reserved "assumed_defaults" key (written by
// echo_config) is accepted and ignored so an echoed config reloads exactly.
run_config config_from_json_text(const std::string& text);
run_config load_config(const std::string& path);

// Resolved values plus "assumed_defaults": the keys whose values are labeled
// assumptions rather than reference-pinned settings and were not explicitly
// given by the user.
std::string echo_config_json(const run_config& cfg,
                             const std::vector<std::string>& explicitly_set);

// Keys the loader saw in the given document (for echo bookkeeping).
std::vector<std::string> config_keys_in_text(const std::string& text);

} // namespace vrstream
