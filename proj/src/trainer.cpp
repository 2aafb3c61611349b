#include "vrstream/trainer.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "vrstream/error.hpp"
#include "vrstream/nn.hpp"
#include "vrstream/rng.hpp"

namespace vrstream {

void training_world::validate() const {
    if (cfg == nullptr) throw config_error("training world lacks a config");
    cfg->validate();
    const std::size_t v = video_manifests.size();
    if (v == 0) throw config_error("training world needs at least one video");
    if (video_prmaps.size() != v || video_traces.size() != v)
        throw config_error("per-video vectors must line up");
    for (std::size_t i = 0; i < v; ++i) {
        if (video_manifests[i] == nullptr || video_prmaps[i] == nullptr)
            throw config_error("training world has null entries");
        if (video_traces[i].empty())
            throw config_error("every video needs at least one trace");
        for (const fov_trace* t : video_traces[i])
            if (t == nullptr) throw config_error("training world has null traces");
    }
    if (user_distance_m.size() != static_cast<std::size_t>(cfg->users))
        throw config_error("one distance per simulated user is required");
}

episode_setup training_world::setup_for_episode(long long episode_index) const {
    if (episode_index < 0) throw std::invalid_argument("episode index must be non-negative");
    episode_setup s;
    s.cfg = cfg;
    s.user_distance_m = user_distance_m;
    const long long v = static_cast<long long>(video_manifests.size());
    for (long long u = 0; u < cfg->users; ++u) {
        const long long vid = u % v;
        s.user_manifest.push_back(video_manifests[static_cast<std::size_t>(vid)]);
        s.user_prmap.push_back(video_prmaps[static_cast<std::size_t>(vid)]);
        const auto& pool = video_traces[static_cast<std::size_t>(vid)];
        const long long idx =
            (episode_index * cfg->users + u) % static_cast<long long>(pool.size());
        s.user_trace.push_back(pool[static_cast<std::size_t>(idx)]);
    }
    return s;
}

std::vector<tile_agent> make_agents(int tiles, int ladder_levels, double gamma,
                                    std::uint64_t seed) {
    if (tiles < 1) throw config_error("at least one tile agent is required");
    rng gen(mix_seed(seed, 0xA9E27ull));
    std::vector<tile_agent> agents;
    agents.reserve(static_cast<std::size_t>(tiles));
    for (int j = 0; j < tiles; ++j)
        agents.push_back(make_tile_agent(j, ladder_levels, gamma, gen));
    return agents;
}

training_progress train_agents(const training_world& world, std::vector<tile_agent>& agents,
                               long long iterations, int workers, std::uint64_t seed) {
    world.validate();
    if (agents.empty()) throw config_error("no agents to train");
    if (static_cast<int>(agents.size()) != world.video_manifests[0]->tile_count())
        throw config_error("agent count must match the tile grid");
    if (iterations < 0) throw config_error("iteration count must be non-negative");
    if (workers < 1) throw config_error("at least one worker is required");

    training_progress progress;
    progress.episodes = iterations;
    progress.curve.assign(static_cast<std::size_t>(iterations), 0.0);
    if (iterations == 0) return progress;

    const run_config& cfg = *world.cfg;
    std::atomic<long long> next{0};
    std::mutex mu;
    std::exception_ptr failure;

    auto worker_body = [&]() {
        std::vector<std::vector<double>> actor_grad(agents.size());
        std::vector<std::vector<double>> critic_grad(agents.size());
        for (;;) {
            const long long e = next.fetch_add(1);
            if (e >= iterations) return;
            std::vector<tile_agent> local;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (failure) return;
                local = agents;
            }
            episode_setup setup = world.setup_for_episode(e);
            episode_result res =
                run_episode(setup, scheme::proposed, &local, true,
                            mix_seed(seed, static_cast<std::uint64_t>(e)), world.scaling);
            for (std::size_t j = 0; j < agents.size(); ++j) {
                actor_grad[j].assign(local[j].actor.params().size(), 0.0);
                critic_grad[j].assign(local[j].critic.params().size(), 0.0);
                accumulate_actor_gradient(local[j], res.trajectories[j], world.scaling,
                                          actor_grad[j]);
                accumulate_critic_gradient(local[j], res.trajectories[j], world.scaling,
                                           critic_grad[j]);
            }
            {
                std::lock_guard<std::mutex> lock(mu);
                if (failure) return;
                for (std::size_t j = 0; j < agents.size(); ++j) {
                    if (gradient_is_finite(actor_grad[j]))
                        apply_update(agents[j].actor.params(), actor_grad[j], cfg.lr_actor, true);
                    else
                        ++progress.skipped_updates;
                    if (gradient_is_finite(critic_grad[j]))
                        apply_update(agents[j].critic.params(), critic_grad[j], cfg.lr_critic,
                                     true);
                    else
                        ++progress.skipped_updates;
                }
                progress.curve[static_cast<std::size_t>(e)] = res.mean_total_reward;
            }
        }
    };

    auto guarded = [&]() {
        try {
            worker_body();
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!failure) failure = std::current_exception();
        }
    };

    if (workers == 1) {
        guarded();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(guarded);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return progress;
}

namespace {

std::string agent_path(const std::string& dir, int j, const char* role) {
    return dir + "/agent_" + std::to_string(j) + "_" + role;
}

} // namespace

void save_agents(const std::string& dir, const std::vector<tile_agent>& agents, double beta,
                 long long iteration_count) {
    if (agents.empty()) throw config_error("no agents to save");
    std::filesystem::create_directories(dir);
    for (const auto& a : agents) {
        save_network(agent_path(dir, a.tile_index, "actor"), a.actor);
        save_network(agent_path(dir, a.tile_index, "critic"), a.critic);
    }
    nlohmann::ordered_json j;
    j["tiles"] = static_cast<int>(agents.size());
    j["ladder_levels"] = agents[0].actor.config().ladder_levels;
    j["gamma"] = agents[0].gamma;
    j["beta"] = beta;
    j["iteration_count"] = iteration_count;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(agents[0].actor.config().architecture_hash()));
    j["architecture_hash"] = hash;
    std::ofstream out(dir + "/manifest.json");
    if (!out) throw io_error("cannot write " + dir + "/manifest.json");
    out << j.dump(2) << '\n';
}

agent_bundle load_agents(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw io_error("cannot read " + dir + "/manifest.json");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(dir + "/manifest.json: " + e.what());
    }
    agent_bundle bundle;
    int tiles = 0;
    try {
        tiles = j.at("tiles").get<int>();
        bundle.gamma = j.at("gamma").get<double>();
        bundle.beta = j.at("beta").get<double>();
        bundle.iteration_count = j.at("iteration_count").get<long long>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(dir + "/manifest.json: " + e.what());
    }
    if (tiles < 1) throw parse_error(dir + "/manifest.json: tiles must be positive");
    for (int t = 0; t < tiles; ++t) {
        network actor = load_network(agent_path(dir, t, "actor"));
        network critic = load_network(agent_path(dir, t, "critic"));
        if (critic.config().outputs != 1)
            throw parse_error(agent_path(dir, t, "critic") + ": not a value network");
        if (actor.config().ladder_levels != critic.config().ladder_levels)
            throw parse_error(agent_path(dir, t, "actor") + ": ladder width mismatch");
        bundle.agents.push_back(tile_agent{t, std::move(actor), std::move(critic), bundle.gamma});
    }
    if (j.contains("architecture_hash")) {
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(
                          bundle.agents[0].actor.config().architecture_hash()));
        if (j.at("architecture_hash").get<std::string>() != hash)
            throw parse_error(dir + "/manifest.json: architecture hash mismatch");
    }
    return bundle;
}

} // namespace vrstream
