#include "vrstream/rl_agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vrstream/error.hpp"

namespace vrstream {

namespace {

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

} // namespace

features feature_scaling::normalize(const agent_state& s) const {
    if (!(g_norm_bits > 0.0) || !(size_norm_bits > 0.0))
        throw std::invalid_argument("normalization bounds must be positive");
    features f;
    f.zeta.resize(s.tile_sizes_bits.size());
    for (std::size_t i = 0; i < s.tile_sizes_bits.size(); ++i)
        f.zeta[i] = clamp01(s.tile_sizes_bits[i] / size_norm_bits);
    f.g = clamp01(s.budget_bits / g_norm_bits);
    f.pr = s.fov_probability;
    f.f = static_cast<double>(s.playing_indicator);
    return f;
}

tile_agent make_tile_agent(int tile_index, int ladder_levels, double gamma, rng& gen) {
    net_config actor_cfg;
    actor_cfg.ladder_levels = ladder_levels;
    actor_cfg.outputs = ladder_levels;
    net_config critic_cfg = actor_cfg;
    critic_cfg.outputs = 1;
    tile_agent agent{tile_index, network(actor_cfg), network(critic_cfg), gamma};
    agent.actor.init_uniform(gen);
    agent.critic.init_uniform(gen);
    return agent;
}

agent_state assemble_state(double remaining_budget_bits, const fov_probability_map& prmap,
                           const std::set<int>* playing_fov, const video_manifest& m,
                           int c, int j) {
    if (remaining_budget_bits < 0.0)
        throw std::invalid_argument("remaining budget must be non-negative");
    agent_state s;
    s.budget_bits = remaining_budget_bits;
    s.fov_probability = prmap.at(c, j);
    s.playing_indicator = playing_fov != nullptr && playing_fov->count(j) ? 1 : 0;
    s.tile_sizes_bits.resize(static_cast<std::size_t>(m.ladder.levels()));
    for (int q = 0; q < m.ladder.levels(); ++q)
        s.tile_sizes_bits[static_cast<std::size_t>(q)] = m.size_bits(c, j, q);
    return s;
}

double tier_value(int q, double beta) {
    if (q < 0) throw std::invalid_argument("quality level must be non-negative");
    double v = 0.0;
    double p = 1.0;
    for (int i = 0; i <= q; ++i) {
        v += p;
        p *= beta;
    }
    return v;
}

double compute_reward(int first_tile, const std::vector<int>& delivered_quality,
                      const std::set<int>& realized_fov, double beta, double miss_penalty) {
    if (first_tile < 0 || first_tile > static_cast<int>(delivered_quality.size()))
        throw std::out_of_range("first tile out of range");
    double eta = 0.0;
    for (int k = first_tile; k < static_cast<int>(delivered_quality.size()); ++k) {
        if (!realized_fov.count(k)) continue;
        int q = delivered_quality[static_cast<std::size_t>(k)];
        if (q >= 0)
            eta += tier_value(q, beta);
        else
            eta -= miss_penalty;
    }
    return eta;
}

double advantage(double eta, double gamma, double v_next, double v_cur) {
    return eta + gamma * v_next - v_cur;
}

namespace {

double value_of(const network& critic, const feature_scaling& scaling, const agent_state& s) {
    return forward_value(critic, scaling.normalize(s));
}

} // namespace

void accumulate_actor_gradient(const tile_agent& agent, const std::vector<transition>& traj,
                               const feature_scaling& scaling, std::vector<double>& grad) {
    if (traj.empty()) throw std::invalid_argument("trajectory must be nonempty");
    if (grad.size() != agent.actor.params().size())
        throw shape_error("actor gradient buffer size mismatch");
    std::vector<double> sum(grad.size(), 0.0);
    network::activations act;
    for (const transition& tr : traj) {
        double v_cur = value_of(agent.critic, scaling, tr.s);
        double v_next = tr.terminal ? 0.0 : value_of(agent.critic, scaling, tr.s_next);
        double adv = advantage(tr.eta, agent.gamma, v_next, v_cur);
        features in = scaling.normalize(tr.s);
        agent.actor.forward(in, act);
        std::vector<double> probs = softmax(act.out);
        if (tr.action < 0 || tr.action >= static_cast<int>(probs.size()))
            throw std::invalid_argument("action index out of range");
        std::vector<double> dout(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i)
            dout[i] = adv * ((static_cast<int>(i) == tr.action ? 1.0 : 0.0) - probs[i]);
        agent.actor.backward(in, act, dout, sum);
    }
    const double inv = 1.0 / static_cast<double>(traj.size());
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += sum[i] * inv;
}

void accumulate_critic_gradient(const tile_agent& agent, const std::vector<transition>& traj,
                                const feature_scaling& scaling, std::vector<double>& grad) {
    if (traj.empty()) throw std::invalid_argument("trajectory must be nonempty");
    if (grad.size() != agent.critic.params().size())
        throw shape_error("critic gradient buffer size mismatch");
    std::vector<double> sum(grad.size(), 0.0);
    network::activations act;
    for (const transition& tr : traj) {
        features in = scaling.normalize(tr.s);
        agent.critic.forward(in, act);
        double v_cur = act.out[0];
        double v_next = tr.terminal ? 0.0 : value_of(agent.critic, scaling, tr.s_next);
        double td = tr.eta + agent.gamma * v_next - v_cur;
        std::vector<double> dout{2.0 * td};
        agent.critic.backward(in, act, dout, sum);
    }
    const double inv = 1.0 / static_cast<double>(traj.size());
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += sum[i] * inv;
}

bool gradient_is_finite(const std::vector<double>& grad) {
    for (double g : grad)
        if (!std::isfinite(g)) return false;
    return true;
}

bool actor_step(tile_agent& agent, const std::vector<transition>& traj, double learning_rate,
                const feature_scaling& scaling) {
    std::vector<double> grad(agent.actor.params().size(), 0.0);
    accumulate_actor_gradient(agent, traj, scaling, grad);
    if (!gradient_is_finite(grad)) return false;
    apply_update(agent.actor.params(), grad, learning_rate, true);
    return true;
}

bool critic_step(tile_agent& agent, const std::vector<transition>& traj, double learning_rate,
                 const feature_scaling& scaling) {
    std::vector<double> grad(agent.critic.params().size(), 0.0);
    accumulate_critic_gradient(agent, traj, scaling, grad);
    if (!gradient_is_finite(grad)) return false;
    apply_update(agent.critic.params(), grad, learning_rate, true);
    return true;
}

quality_decision select_quality(const tile_agent& agent, const agent_state& s, bool training,
                                rng* gen, const feature_scaling& scaling) {
    quality_decision d;
    d.probs = forward_policy(agent.actor, scaling.normalize(s));
    if (training) {
        if (gen == nullptr) throw std::invalid_argument("training selection needs an rng");
        double u = gen->uniform01();
        double cum = 0.0;
        d.sampled = static_cast<int>(d.probs.size()) - 1;
        for (std::size_t i = 0; i < d.probs.size(); ++i) {
            cum += d.probs[i];
            if (u < cum) {
                d.sampled = static_cast<int>(i);
                break;
            }
        }
    } else {
        d.sampled = 0;
        for (std::size_t i = 1; i < d.probs.size(); ++i)
            if (d.probs[i] > d.probs[static_cast<std::size_t>(d.sampled)])
                d.sampled = static_cast<int>(i);
    }
    // affordability: degrade to the largest level that fits, else skip
    d.quality = d.sampled;
    if (s.tile_sizes_bits[static_cast<std::size_t>(d.quality)] > s.budget_bits) {
        d.quality = -1;
        for (int q = static_cast<int>(s.tile_sizes_bits.size()) - 1; q >= 0; --q) {
            if (s.tile_sizes_bits[static_cast<std::size_t>(q)] <= s.budget_bits) {
                d.quality = q;
                break;
            }
        }
    }
    d.skip = d.quality < 0;
    return d;
}

} // namespace vrstream
