#pragma once

#include <set>
#include <vector>

#include "vrstream/media.hpp"
#include "vrstream/nn.hpp"
#include "vrstream/rng.hpp"

namespace vrstream {

// Raw (unnormalized) observation for one tile decision.
struct agent_state {
    double budget_bits = 0.0;            // G: remaining downloadable bits
    double fov_probability = 0.0;        // Pr
    int playing_indicator = 0;           // F
    std::vector<double> tile_sizes_bits; // zeta: full tile size per level
};

// Declared normalization bounds; values clamp to [0,1].
struct feature_scaling {
    double g_norm_bits = 1.0;
    double size_norm_bits = 1.0;

    features normalize(const agent_state& s) const;
};

struct quality_decision {
    std::vector<double> probs;
    int sampled = -1; // the policy's action (recorded in trajectories)
    int quality = -1; // executed level after affordability; -1 when skipped
    bool skip = false;
};

struct tile_agent {
    int tile_index = 0;
    network actor;
    network critic;
    double gamma = 0.9;
};

tile_agent make_tile_agent(int tile_index, int ladder_levels, double gamma, rng& gen);

// G carries commitments of all earlier tiles; F comes from the FoV of the
// chunk playing when the window opens (null -> nothing playing yet).
agent_state assemble_state(double remaining_budget_bits, const fov_probability_map& prmap,
                           const std::set<int>* playing_fov, const video_manifest& m,
                           int c, int j);

// sum_{q'=0..q} beta^q' — the value of delivering a tile at level q. Shared
// by rewards and the normalization ceiling so the abundance limit divides to
// exactly 1.
double tier_value(int q, double beta);

// eta_c^j over tiles k = first_tile..J-1: delivered FoV tiles add
// tier_value(q_k), missed FoV tiles subtract miss_penalty.
// delivered_quality[k] is -1 for tiles not fully delivered.
double compute_reward(int first_tile, const std::vector<int>& delivered_quality,
                      const std::set<int>& realized_fov, double beta, double miss_penalty);

double advantage(double eta, double gamma, double v_next, double v_cur);

struct transition {
    agent_state s;
    int action = 0;   // sampled at decision time
    double eta = 0.0; // delayed reward stream for this agent
    agent_state s_next;
    bool terminal = false; // last chunk of a session: V(s_next) := 0
};

// mean_c grad log pi(s_c, a_c) * A_c, accumulated into grad (+=); the mean
// keeps the step size insensitive to episode length
void accumulate_actor_gradient(const tile_agent& agent, const std::vector<transition>& traj,
                               const feature_scaling& scaling, std::vector<double>& grad);

// ascent direction on -mean_c TD_c^2 (i.e. mean of 2 TD_c grad V(s_c),
// target frozen); apply with apply_update(..., ascent=true) to descend the
// squared TD error
void accumulate_critic_gradient(const tile_agent& agent, const std::vector<transition>& traj,
                                const feature_scaling& scaling, std::vector<double>& grad);

bool gradient_is_finite(const std::vector<double>& grad);

// false = gradient was non-finite, parameters left untouched
bool actor_step(tile_agent& agent, const std::vector<transition>& traj, double learning_rate,
                const feature_scaling& scaling);
bool critic_step(tile_agent& agent, const std::vector<transition>& traj, double learning_rate,
                 const feature_scaling& scaling);

// training samples from pi, evaluation takes the argmax (ties -> lower
// level); unaffordable choices degrade to the largest level that fits, or a
// skip when none does
quality_decision select_quality(const tile_agent& agent, const agent_state& s, bool training,
                                rng* gen, const feature_scaling& scaling);

} // namespace vrstream
