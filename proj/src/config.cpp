#include "vrstream/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

#include "vrstream/error.hpp"

namespace vrstream {

int run_config::alignment_slots() const {
    return static_cast<int>(std::llround(alignment_fraction * slots_per_block));
}

int run_config::data_slots() const { return slots_per_block - alignment_slots(); }

double run_config::resolved_beta() const {
    return beta > 0.0 ? beta : 1.0 / (static_cast<double>(grid_rows) * grid_cols + 1.0);
}

void run_config::validate() const {
    auto fail = [](const std::string& msg) { throw config_error("config: " + msg); };
    if (!(bandwidth_hz > 0.0)) fail("bandwidth_hz must be positive");
    if (!(noise_psd_w_per_hz > 0.0)) fail("noise_psd_w_per_hz must be positive");
    if (!(beam_gain > 0.0)) fail("beam_gain must be positive");
    if (!(pathloss_exp > 0.0)) fail("pathloss_exp must be positive");
    if (!(pathloss_ref_gain > 0.0)) fail("pathloss_ref_gain must be positive");
    if (sbs_count < 1) fail("sbs_count must be at least 1");
    if (!(distance_min_m > 0.0) || distance_max_m < distance_min_m)
        fail("distances must satisfy 0 < distance_min_m <= distance_max_m");
    if (!distances_m.empty() && static_cast<int>(distances_m.size()) != users)
        fail("distances_m must list one distance per user");
    for (double d : distances_m)
        if (!(d > 0.0)) fail("distances_m entries must be positive");
    if (fixed_rate_bps < 0.0) fail("fixed_rate_bps must be non-negative");
    if (users < 1) fail("users must be at least 1");
    if (chunk_count < 1) fail("chunk_count must be at least 1");
    if (!(chunk_duration_s > 0.0)) fail("chunk_duration_s must be positive");
    if (margin_s < 0.0) fail("margin_s must be non-negative");
    if (!(startup_delay_s - margin_s > 0.0)) fail("startup_delay_s must exceed margin_s");
    if (grid_rows < 1 || grid_cols < 1) fail("tile grid must be at least 1x1");
    if (ladder_bps.empty()) fail("ladder_bps must have at least one level");
    for (std::size_t i = 0; i < ladder_bps.size(); ++i) {
        if (!(ladder_bps[i] > 0.0)) fail("ladder_bps entries must be positive");
        if (i > 0 && !(ladder_bps[i] > ladder_bps[i - 1]))
            fail("ladder_bps must be strictly increasing");
    }
    if (vbr_jitter < 0.0 || vbr_jitter >= 1.0) fail("vbr_jitter must lie in [0, 1)");
    if (slots_per_block < 1) fail("slots_per_block must be at least 1");
    if (alignment_fraction < 0.0 || alignment_fraction >= 1.0)
        fail("alignment_fraction must lie in [0, 1)");
    if (data_slots() < 1) fail("alignment leaves no data slots in the block");
    if (lambda < 0.0 || lambda >= 1.0) fail("lambda must lie in [0, 1)");
    if (scheduler_max_iters < 0) fail("scheduler_max_iters must be non-negative");
    if (scheduler_random_init != 0 && scheduler_random_init != 1)
        fail("scheduler_random_init must be 0 or 1");
    if (pf_window < 1) fail("pf_window must be at least 1");
    if (predictor_window < 1) fail("predictor_window must be at least 1");
    if (predictor_warmup_blocks < 0) fail("predictor_warmup_blocks must be non-negative");
    if (p_th < 0.0 || p_th > 1.0) fail("p_th must lie in [0, 1]");
    if (gamma < 0.0 || gamma > 1.0) fail("gamma must lie in [0, 1]");
    if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) fail("learning rates must be positive");
    if (beta < 0.0 || beta >= 1.0) fail("beta must lie in [0, 1)");
    if (miss_penalty < 0.0) fail("miss_penalty must be non-negative");
    if (workers < 1) fail("workers must be at least 1");
    if (iterations < 0) fail("iterations must be non-negative");
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        fail("train_fraction must lie in (0, 1)");
    if (feature_g_norm_bits < 0.0 || feature_size_norm_bits < 0.0)
        fail("feature normalization bounds must be non-negative");
    if (eval_episodes < 1) fail("eval_episodes must be at least 1");
    if (trace_users < 2) fail("trace_users must be at least 2 (the split needs both sides)");
    if (trace_videos < 1) fail("trace_videos must be at least 1");
    if (fov_block < 1) fail("fov_block must be at least 1");
    if (walk_step < 0) fail("walk_step must be non-negative");
}

namespace {

using nlohmann::ordered_json;

struct key_def {
    const char* name;
    bool assumed; // true: labeled assumption, not a reference-pinned value
    std::function<void(run_config&, const ordered_json&)> load;
    std::function<ordered_json(const run_config&)> dump;
};

template <typename T>
T get_as(const ordered_json& v, const char* name) {
    try {
        return v.get<T>();
    } catch (const ordered_json::exception&) {
        throw config_error(std::string("config: bad value type for key '") + name + "'");
    }
}

#define SCALAR_KEY(field, cpptype, is_assumed)                                         \
    key_def {                                                                          \
        #field, is_assumed,                                                            \
            [](run_config& c, const ordered_json& v) {                                 \
                c.field = get_as<cpptype>(v, #field);                                  \
            },                                                                         \
            [](const run_config& c) { return ordered_json(c.field); }                  \
    }

const std::vector<key_def>& key_table() {
    static const std::vector<key_def> table = {
        SCALAR_KEY(bandwidth_hz, double, false),
        SCALAR_KEY(tx_power_dbm, double, false),
        SCALAR_KEY(noise_psd_w_per_hz, double, false),
        SCALAR_KEY(beam_gain, double, false),
        SCALAR_KEY(pathloss_exp, double, false),
        SCALAR_KEY(pathloss_ref_gain, double, true),
        SCALAR_KEY(sbs_count, int, true),
        SCALAR_KEY(distance_min_m, double, false),
        SCALAR_KEY(distance_max_m, double, false),
        SCALAR_KEY(distances_m, std::vector<double>, true),
        SCALAR_KEY(fixed_rate_bps, double, true),
        SCALAR_KEY(users, int, false),
        SCALAR_KEY(chunk_count, int, true),
        SCALAR_KEY(chunk_duration_s, double, true),
        SCALAR_KEY(startup_delay_s, double, true),
        SCALAR_KEY(margin_s, double, true),
        SCALAR_KEY(grid_rows, int, false),
        SCALAR_KEY(grid_cols, int, false),
        SCALAR_KEY(ladder_bps, std::vector<double>, true),
        SCALAR_KEY(vbr_jitter, double, true),
        SCALAR_KEY(slots_per_block, int, true),
        SCALAR_KEY(alignment_fraction, double, false),
        SCALAR_KEY(lambda, double, false),
        SCALAR_KEY(scheduler_max_iters, int, true),
        SCALAR_KEY(scheduler_random_init, int, true),
        SCALAR_KEY(pf_window, int, true),
        SCALAR_KEY(predictor_window, int, false),
        SCALAR_KEY(predictor_warmup_blocks, int, true),
        SCALAR_KEY(p_th, double, false),
        SCALAR_KEY(gamma, double, false),
        SCALAR_KEY(lr_actor, double, false),
        SCALAR_KEY(lr_critic, double, false),
        SCALAR_KEY(beta, double, true),
        SCALAR_KEY(miss_penalty, double, true),
        SCALAR_KEY(workers, int, true),
        SCALAR_KEY(iterations, int, false),
        SCALAR_KEY(train_fraction, double, false),
        SCALAR_KEY(feature_g_norm_bits, double, true),
        SCALAR_KEY(feature_size_norm_bits, double, true),
        SCALAR_KEY(eval_episodes, int, true),
        SCALAR_KEY(trace_users, int, true),
        SCALAR_KEY(trace_videos, int, false),
        SCALAR_KEY(fov_block, int, true),
        SCALAR_KEY(walk_step, int, true),
        SCALAR_KEY(seed, std::uint64_t, true),
    };
    return table;
}

#undef SCALAR_KEY

} // namespace

run_config config_from_json_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) throw config_error("config: top level must be a JSON object");
    run_config cfg;
    for (const auto& [key, value] : doc.items()) {
        if (key == "assumed_defaults") continue; // reserved echo bookkeeping
        bool known = false;
        for (const auto& def : key_table()) {
            if (key == def.name) {
                def.load(cfg, value);
                known = true;
                break;
            }
        }
        if (!known) throw config_error("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

run_config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string echo_config_json(const run_config& cfg,
                             const std::vector<std::string>& explicitly_set) {
    ordered_json doc;
    std::vector<std::string> assumed;
    for (const auto& def : key_table()) {
        doc[def.name] = def.dump(cfg);
        bool user_set = false;
        for (const auto& k : explicitly_set)
            if (k == def.name) {
                user_set = true;
                break;
            }
        if (def.assumed && !user_set) assumed.push_back(def.name);
    }
    doc["assumed_defaults"] = assumed;
    return doc.dump(2);
}

std::vector<std::string> config_keys_in_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    std::vector<std::string> keys;
    if (doc.is_object())
        for (const auto& [key, value] : doc.items()) {
            (void)value;
            if (key != "assumed_defaults") keys.push_back(key);
        }
    return keys;
}

} // namespace vrstream
