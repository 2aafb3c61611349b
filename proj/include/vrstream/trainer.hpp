#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vrstream/config.hpp"
#include "vrstream/media.hpp"
#include "vrstream/rl_agent.hpp"
#include "vrstream/sim.hpp"

namespace vrstream {

// Everything an episode needs, organized per video: simulated user u watches
// video u mod V and rotates through that video's traces, trace index
// (episode * users + u) mod |traces of v|.
struct training_world {
    const run_config* cfg = nullptr;
    std::vector<const video_manifest*> video_manifests;
    std::vector<const fov_probability_map*> video_prmaps;
    std::vector<std::vector<const fov_trace*>> video_traces;
    std::vector<double> user_distance_m;
    feature_scaling scaling;

    void validate() const;
    episode_setup setup_for_episode(long long episode_index) const;
};

struct training_progress {
    long long episodes = 0;
    long long skipped_updates = 0; // non-finite gradients left parameters untouched
    std::vector<double> curve;     // mean per-user episode reward, one per iteration
};

std::vector<tile_agent> make_agents(int tiles, int ladder_levels, double gamma,
                                    std::uint64_t seed);

// Asynchronous episode workers: each snapshots the shared parameters, plays
// one training episode, and applies its accumulated gradients under a lock.
// With workers == 1 the run is bit-reproducible for a given seed.
training_progress train_agents(const training_world& world, std::vector<tile_agent>& agents,
                               long long iterations, int workers, std::uint64_t seed);

// Checkpoint directory: agent_<j>_actor / agent_<j>_critic network files
// plus manifest.json describing the ensemble.
void save_agents(const std::string& dir, const std::vector<tile_agent>& agents, double beta,
                 long long iteration_count);

struct agent_bundle {
    std::vector<tile_agent> agents;
    double gamma = 0.0;
    double beta = 0.0;
    long long iteration_count = 0;
};

agent_bundle load_agents(const std::string& dir);

} // namespace vrstream
