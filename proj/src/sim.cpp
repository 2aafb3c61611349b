#include "vrstream/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "vrstream/error.hpp"

namespace vrstream {

const char* scheme_name(scheme s) {
    switch (s) {
        case scheme::qps_pf: return "QPS-PF";
        case scheme::fps_pf: return "FPS-PF";
        case scheme::qps_pr: return "QPS-PR";
        case scheme::fps_pr: return "FPS-PR";
        case scheme::proposed: return "PROPOSED";
    }
    throw std::invalid_argument("unknown scheme");
}

std::vector<scheme> all_schemes() {
    return {scheme::qps_pf, scheme::fps_pf, scheme::qps_pr, scheme::fps_pr, scheme::proposed};
}

void episode_setup::validate() const {
    if (cfg == nullptr) throw config_error("episode setup lacks a config");
    cfg->validate();
    const std::size_t u = static_cast<std::size_t>(cfg->users);
    if (user_manifest.size() != u || user_prmap.size() != u || user_trace.size() != u ||
        user_distance_m.size() != u)
        throw config_error("episode setup vectors must have one entry per user");
    for (std::size_t i = 0; i < u; ++i) {
        if (user_manifest[i] == nullptr || user_prmap[i] == nullptr || user_trace[i] == nullptr)
            throw config_error("episode setup has null entries");
        const video_manifest& m = *user_manifest[i];
        if (!m.has_sizes()) throw config_error("manifest lacks sizes");
        if (m.chunks != cfg->chunk_count) throw config_error("manifest chunk count mismatch");
        if (m.tile_count() != user_manifest[0]->tile_count())
            throw config_error("manifests disagree on the tile grid");
        if (m.ladder.levels() != user_manifest[0]->ladder.levels())
            throw config_error("manifests disagree on ladder levels");
        if (user_trace[i]->chunks() != cfg->chunk_count)
            throw config_error("trace chunk count mismatch");
        if (static_cast<int>(user_prmap[i]->pr.size()) != cfg->chunk_count)
            throw config_error("probability map chunk count mismatch");
        if (!(user_distance_m[i] > 0.0)) throw config_error("user distance must be positive");
    }
}

double normalized_reward(double reward, int realized_fov_size, double beta, int ladder_levels) {
    if (realized_fov_size < 0) throw std::invalid_argument("FoV size must be non-negative");
    if (ladder_levels < 1) throw std::invalid_argument("ladder must have levels");
    if (realized_fov_size == 0) return 0.0;
    double ceiling = 0.0;
    const double top = tier_value(ladder_levels - 1, beta);
    for (int k = 0; k < realized_fov_size; ++k) ceiling += top;
    return reward / ceiling;
}

episode_engine::episode_engine(const episode_setup& setup, scheme sch,
                               std::vector<tile_agent>* agents, bool training,
                               std::uint64_t episode_seed, const feature_scaling& scaling)
    : setup_(setup),
      scheme_(sch),
      agents_(agents),
      training_(training),
      episode_seed_(episode_seed),
      scaling_(scaling),
      channel_rng_(mix_seed(episode_seed, 0xC4A17ull)),
      action_rng_(mix_seed(episode_seed, 0xAC7104ull)) {
    setup_.validate();
    const run_config& cfg = *setup_.cfg;
    if (sch == scheme::proposed) {
        if (agents_ == nullptr)
            throw config_error("the learned scheme needs agents");
        if (static_cast<int>(agents_->size()) != setup_.user_manifest[0]->tile_count())
            throw config_error("agent count must match the tile grid");
        for (const auto& a : *agents_)
            if (a.actor.config().ladder_levels != setup_.user_manifest[0]->ladder.levels())
                throw config_error("agent ladder width mismatch");
    }
    timeline_.startup_delay_s = cfg.startup_delay_s;
    timeline_.margin_s = cfg.margin_s;
    timeline_.chunk_duration_s = cfg.chunk_duration_s;
    timeline_.chunks = cfg.chunk_count;
    timeline_.validate();
    radio_.bandwidth_hz = cfg.bandwidth_hz;
    radio_.tx_power_w = dbm_to_watts(cfg.tx_power_dbm);
    radio_.noise_psd_w_per_hz = cfg.noise_psd_w_per_hz;
    radio_.pathloss_exp = cfg.pathloss_exp;
    radio_.pathloss_ref_gain = cfg.pathloss_ref_gain;
    radio_.beam_gain = cfg.beam_gain;
    radio_.sbs_count = cfg.sbs_count;
    radio_.validate();
    const bool pf = sch == scheme::qps_pf || sch == scheme::fps_pf;
    if (pf) pf_ = std::make_unique<proportional_fair_scheduler>(cfg.users, cfg.pf_window);
    const bool baseline = sch != scheme::proposed;
    if (baseline)
        predictors_.assign(static_cast<std::size_t>(cfg.users),
                           bandwidth_predictor(cfg.predictor_window));
    outcomes_.resize(static_cast<std::size_t>(cfg.users));
    if (sch == scheme::proposed) {
        trajectories_.resize(static_cast<std::size_t>(setup_.user_manifest[0]->tile_count()));
        prev_state_.resize(static_cast<std::size_t>(cfg.users));
        prev_action_.resize(static_cast<std::size_t>(cfg.users));
        prev_eta_.resize(static_cast<std::size_t>(cfg.users));
    }
}

std::vector<double> episode_engine::sample_rates() {
    const run_config& cfg = *setup_.cfg;
    std::vector<double> rates(static_cast<std::size_t>(cfg.users), cfg.fixed_rate_bps);
    if (cfg.fixed_rate_bps > 0.0) return rates;
    for (int u = 0; u < cfg.users; ++u) {
        link_state link;
        for (int n = 0; n < cfg.sbs_count; ++n) {
            link.channel_power_gain.push_back(
                sample_channel_gain(channel_rng_, setup_.user_distance_m[static_cast<std::size_t>(u)], radio_));
            link.beam_amplitude.push_back(cfg.beam_gain);
        }
        rates[static_cast<std::size_t>(u)] = instantaneous_rate_bps(link, radio_);
        if (!(rates[static_cast<std::size_t>(u)] > 0.0))
            rates[static_cast<std::size_t>(u)] = 1.0; // zero-rate degenerate draw
    }
    return rates;
}

std::vector<int> episode_engine::allocate(const std::vector<double>& rates, int chunk) {
    const run_config& cfg = *setup_.cfg;
    if (pf_) return pf_->schedule(rates, cfg.data_slots());
    scheduler_instance inst;
    inst.users = cfg.users;
    inst.rate_bps = rates;
    inst.afer_bps.resize(static_cast<std::size_t>(cfg.users));
    for (int u = 0; u < cfg.users; ++u)
        inst.afer_bps[static_cast<std::size_t>(u)] =
            afer_bps(setup_.user_manifest[static_cast<std::size_t>(u)]->ladder,
                     setup_.user_prmap[static_cast<std::size_t>(u)]->expected_fov_size(chunk));
    inst.total_slots = cfg.data_slots();
    inst.coherence_slots = cfg.slots_per_block;
    inst.lambda = cfg.lambda;
    inst.max_iters = cfg.scheduler_max_iters;
    if (cfg.scheduler_random_init != 0) {
        inst.random_init = true;
        inst.init_seed = mix_seed(mix_seed(episode_seed_, 0x171AD0ull),
                                  static_cast<std::uint64_t>(chunk));
    }
    return schedule(inst).alloc.slots;
}

void episode_engine::feed_predictors(const std::vector<int>& alloc,
                                     const std::vector<double>& rates) {
    if (predictors_.empty()) return;
    const run_config& cfg = *setup_.cfg;
    // wall-clock slot order: alignment first, then users in index order
    for (int s = 0; s < cfg.alignment_slots(); ++s)
        for (auto& p : predictors_) p.push(0.0);
    for (int u = 0; u < cfg.users; ++u)
        for (int s = 0; s < alloc[static_cast<std::size_t>(u)]; ++s)
            for (int v = 0; v < cfg.users; ++v)
                predictors_[static_cast<std::size_t>(v)].push(v == u ? rates[static_cast<std::size_t>(v)] : 0.0);
}

void episode_engine::run_warmup_block() {
    std::vector<double> rates = sample_rates();
    std::vector<int> alloc = allocate(rates, 1);
    feed_predictors(alloc, rates);
}

std::vector<chunk_outcome> episode_engine::step_chunk(int c) {
    const run_config& cfg = *setup_.cfg;
    if (c != next_chunk_) throw std::invalid_argument("chunks must be stepped in order");
    ++next_chunk_;
    const int users = cfg.users;
    const int tb = cfg.slots_per_block;
    const int ta = cfg.alignment_slots();
    const int tiles = setup_.user_manifest[0]->tile_count();
    const int levels = setup_.user_manifest[0]->ladder.levels();
    const double beta = cfg.resolved_beta();

    const double window_s = timeline_.deadline_s(c) - timeline_.lower_deadline_s(c);
    const double tau = window_s / static_cast<double>(tb);
    if (std::fabs(static_cast<double>(tb) * tau - window_s) > 1e-9 * std::max(1.0, window_s))
        ++audits_.deadline_violations;

    // the chunk playing when this window opens (realized per user)
    int playing = 0; // 0 = nothing playing yet
    if (timeline_.lower_deadline_s(c) >= cfg.startup_delay_s) {
        playing = 1 + static_cast<int>(std::floor(
                          (timeline_.lower_deadline_s(c) - cfg.startup_delay_s) /
                          cfg.chunk_duration_s));
        playing = std::clamp(playing, 1, cfg.chunk_count);
    }

    std::vector<double> rates = sample_rates();
    std::vector<int> alloc = allocate(rates, c);

    // materialized slot schedule: -1 alignment, then contiguous user runs
    std::vector<int> slot_user(static_cast<std::size_t>(tb), -1);
    {
        int s = ta;
        long long total = 0;
        for (int u = 0; u < users; ++u) {
            if (alloc[static_cast<std::size_t>(u)] < 0) ++audits_.slot_conflicts;
            total += alloc[static_cast<std::size_t>(u)];
            for (int i = 0; i < alloc[static_cast<std::size_t>(u)] && s < tb; ++i, ++s)
                slot_user[static_cast<std::size_t>(s)] = u;
        }
        if (total != cfg.data_slots()) ++audits_.slot_conflicts;
    }

    // per-user byte budgets as the fold the slot loop performs
    std::vector<double> budget(static_cast<std::size_t>(users), 0.0);
    for (int u = 0; u < users; ++u)
        for (int i = 0; i < alloc[static_cast<std::size_t>(u)]; ++i)
            budget[static_cast<std::size_t>(u)] += rates[static_cast<std::size_t>(u)] * tau;

    // application-layer decisions -> per-user grant queues
    std::vector<std::vector<grant_unit>> queue(static_cast<std::size_t>(users));
    std::vector<std::vector<agent_state>> state_now;
    std::vector<std::vector<int>> action_now;
    if (scheme_ == scheme::proposed) {
        state_now.resize(static_cast<std::size_t>(users));
        action_now.resize(static_cast<std::size_t>(users));
    }
    for (int u = 0; u < users; ++u) {
        const video_manifest& m = *setup_.user_manifest[static_cast<std::size_t>(u)];
        const fov_probability_map& prmap = *setup_.user_prmap[static_cast<std::size_t>(u)];
        if (scheme_ == scheme::proposed) {
            const std::set<int>* playing_fov =
                playing > 0 ? &setup_.user_trace[static_cast<std::size_t>(u)]->fov_of_chunk(playing)
                            : nullptr;
            double g = budget[static_cast<std::size_t>(u)];
            double spent = 0.0;
            for (int j = 0; j < tiles; ++j) {
                agent_state s = assemble_state(g, prmap, playing_fov, m, c, j);
                quality_decision d = select_quality((*agents_)[static_cast<std::size_t>(j)], s,
                                                    training_, &action_rng_, scaling_);
                state_now[static_cast<std::size_t>(u)].push_back(std::move(s));
                action_now[static_cast<std::size_t>(u)].push_back(d.sampled);
                if (!d.skip) {
                    double cost = m.size_bits(c, j, d.quality);
                    g -= cost;
                    spent += cost;
                    for (int q = 0; q <= d.quality; ++q)
                        queue[static_cast<std::size_t>(u)].push_back(
                            {j, q, m.size_delta_bits(c, j, q)});
                }
            }
            // sub-bit slack: the spent and budget folds round differently
            const double slack =
                1e-9 * std::max(1.0, budget[static_cast<std::size_t>(u)]) + 1e-3;
            if (spent > budget[static_cast<std::size_t>(u)] + slack) ++audits_.budget_violations;
        } else {
            double predicted = predictors_[static_cast<std::size_t>(u)].predict() *
                               static_cast<double>(tb) * tau;
            std::vector<double> pr_row(static_cast<std::size_t>(tiles));
            for (int j = 0; j < tiles; ++j) pr_row[static_cast<std::size_t>(j)] = prmap.at(c, j);
            selection sel = (scheme_ == scheme::qps_pf || scheme_ == scheme::qps_pr)
                                ? qps_select(pr_row, predicted, m, c)
                                : fps_select(pr_row, predicted, m, c, cfg.p_th);
            queue[static_cast<std::size_t>(u)] = std::move(sel.queue);
        }
    }

    // slot-by-slot transfers honoring the one-user-per-slot schedule
    std::vector<std::size_t> head(static_cast<std::size_t>(users), 0);
    std::vector<double> unit_progress(static_cast<std::size_t>(users), 0.0);
    std::vector<double> delivered_bits(static_cast<std::size_t>(users), 0.0);
    std::vector<std::vector<std::vector<bool>>> got(
        static_cast<std::size_t>(users),
        std::vector<std::vector<bool>>(static_cast<std::size_t>(tiles),
                                       std::vector<bool>(static_cast<std::size_t>(levels), false)));
    for (int s = ta; s < tb; ++s) {
        int u = slot_user[static_cast<std::size_t>(s)];
        if (u < 0) continue;
        double cap = rates[static_cast<std::size_t>(u)] * tau;
        auto& q = queue[static_cast<std::size_t>(u)];
        while (cap > 0.0 && head[static_cast<std::size_t>(u)] < q.size()) {
            grant_unit& unit = q[head[static_cast<std::size_t>(u)]];
            double need = unit.size_bits - unit_progress[static_cast<std::size_t>(u)];
            double take = std::min(need, cap);
            unit_progress[static_cast<std::size_t>(u)] += take;
            delivered_bits[static_cast<std::size_t>(u)] += take;
            cap -= take;
            if (unit_progress[static_cast<std::size_t>(u)] >= unit.size_bits) {
                got[static_cast<std::size_t>(u)][static_cast<std::size_t>(unit.tile)]
                   [static_cast<std::size_t>(unit.delta_level)] = true;
                ++head[static_cast<std::size_t>(u)];
                unit_progress[static_cast<std::size_t>(u)] = 0.0;
            }
        }
    }

    // outcomes: delivered quality = longest complete delta prefix
    std::vector<chunk_outcome> result(static_cast<std::size_t>(users));
    for (int u = 0; u < users; ++u) {
        const double slack = 1e-9 * std::max(1.0, budget[static_cast<std::size_t>(u)]) + 1e-3;
        if (delivered_bits[static_cast<std::size_t>(u)] >
            budget[static_cast<std::size_t>(u)] + slack)
            ++audits_.budget_violations;
        chunk_outcome& o = result[static_cast<std::size_t>(u)];
        o.delivered_quality.assign(static_cast<std::size_t>(tiles), -1);
        for (int j = 0; j < tiles; ++j) {
            const auto& flags = got[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)];
            int q = -1;
            while (q + 1 < levels && flags[static_cast<std::size_t>(q + 1)]) ++q;
            for (int r = q + 2; r < levels; ++r)
                if (flags[static_cast<std::size_t>(r)]) ++audits_.nesting_violations;
            o.delivered_quality[static_cast<std::size_t>(j)] = q;
        }
        const std::set<int>& fov =
            setup_.user_trace[static_cast<std::size_t>(u)]->fov_of_chunk(c);
        o.fov_size = static_cast<int>(fov.size());
        for (int j : fov)
            if (o.delivered_quality[static_cast<std::size_t>(j)] < 0) ++o.missed_fov_tiles;
        o.reward = compute_reward(0, o.delivered_quality, fov, beta, cfg.miss_penalty);
        o.normalized_reward = normalized_reward(o.reward, o.fov_size, beta, levels);
        o.budget_bits = budget[static_cast<std::size_t>(u)];
        o.delivered_bits = delivered_bits[static_cast<std::size_t>(u)];
        double served = (static_cast<double>(alloc[static_cast<std::size_t>(u)]) /
                         static_cast<double>(tb)) *
                        rates[static_cast<std::size_t>(u)];
        double target = afer_bps(setup_.user_manifest[static_cast<std::size_t>(u)]->ladder,
                                 setup_.user_prmap[static_cast<std::size_t>(u)]->expected_fov_size(c));
        o.violation_bps = std::max(target - served, 0.0);
        outcomes_[static_cast<std::size_t>(u)].push_back(o);
    }

    // trajectory assembly for the learned scheme
    if (scheme_ == scheme::proposed) {
        std::vector<std::vector<double>> eta_now(static_cast<std::size_t>(users));
        for (int u = 0; u < users; ++u) {
            const std::set<int>& fov =
                setup_.user_trace[static_cast<std::size_t>(u)]->fov_of_chunk(c);
            for (int j = 0; j < tiles; ++j)
                eta_now[static_cast<std::size_t>(u)].push_back(
                    compute_reward(j, result[static_cast<std::size_t>(u)].delivered_quality, fov,
                                   beta, cfg.miss_penalty));
        }
        if (have_prev_) {
            for (int u = 0; u < users; ++u)
                for (int j = 0; j < tiles; ++j)
                    trajectories_[static_cast<std::size_t>(j)].push_back(
                        {prev_state_[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)],
                         prev_action_[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)],
                         prev_eta_[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)],
                         state_now[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)],
                         false});
        }
        prev_state_ = std::move(state_now);
        prev_action_ = std::move(action_now);
        prev_eta_ = std::move(eta_now);
        have_prev_ = true;
        if (c == cfg.chunk_count) {
            for (int u = 0; u < users; ++u)
                for (int j = 0; j < tiles; ++j)
                    trajectories_[static_cast<std::size_t>(j)].push_back(
                        {prev_state_[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)],
                         prev_action_[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)],
                         prev_eta_[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)],
                         prev_state_[static_cast<std::size_t>(u)][static_cast<std::size_t>(j)],
                         true});
        }
    }

    feed_predictors(alloc, rates);
    return result;
}

episode_result episode_engine::finish() {
    const run_config& cfg = *setup_.cfg;
    if (next_chunk_ != cfg.chunk_count + 1)
        throw std::logic_error("episode finished before every chunk was stepped");
    episode_result res;
    res.outcomes = std::move(outcomes_);
    res.audits = audits_;
    res.trajectories = std::move(trajectories_);
    double sum = 0.0;
    for (const auto& per_user : res.outcomes) {
        double total = 0.0;
        for (const auto& o : per_user) total += o.reward;
        sum += total;
    }
    res.mean_total_reward = sum / static_cast<double>(cfg.users);
    return res;
}

episode_result run_episode(const episode_setup& setup, scheme sch,
                           std::vector<tile_agent>* agents, bool training,
                           std::uint64_t episode_seed, const feature_scaling& scaling) {
    episode_engine engine(setup, sch, agents, training, episode_seed, scaling);
    for (int b = 0; b < setup.cfg->predictor_warmup_blocks; ++b) engine.run_warmup_block();
    for (int c = 1; c <= setup.cfg->chunk_count; ++c) engine.step_chunk(c);
    return engine.finish();
}

std::vector<report_row> to_report_rows(scheme sch, const episode_result& result) {
    std::vector<report_row> rows;
    for (std::size_t u = 0; u < result.outcomes.size(); ++u)
        for (std::size_t c = 0; c < result.outcomes[u].size(); ++c) {
            const chunk_outcome& o = result.outcomes[u][c];
            rows.push_back({scheme_name(sch), static_cast<int>(u), static_cast<int>(c) + 1,
                            o.reward, o.normalized_reward, o.missed_fov_tiles});
        }
    return rows;
}

std::vector<aggregate_row> aggregate_means(const std::vector<report_row>& rows) {
    if (rows.empty()) throw data_error("no rows to aggregate");
    std::map<std::pair<std::string, int>, std::pair<double, long long>> acc;
    for (const auto& r : rows) {
        auto& slot = acc[{r.scheme, r.user}];
        slot.first += r.reward;
        slot.second += 1;
    }
    std::vector<aggregate_row> out;
    for (const auto& [key, sum_count] : acc)
        out.push_back({key.first, key.second, sum_count.first / static_cast<double>(sum_count.second)});
    return out;
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values) {
    if (values.empty()) throw data_error("no values for a CDF");
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> points;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        points.emplace_back(values[i], static_cast<double>(i + 1) / n);
    return points;
}

feature_scaling auto_scaling(const run_config& cfg,
                             const std::vector<const video_manifest*>& manifests) {
    feature_scaling s;
    s.g_norm_bits = cfg.feature_g_norm_bits;
    s.size_norm_bits = cfg.feature_size_norm_bits;
    if (s.g_norm_bits > 0.0 && s.size_norm_bits > 0.0) return s;
    double max_tile = 0.0, max_chunk = 0.0;
    for (const video_manifest* m : manifests) {
        if (m == nullptr || !m->has_sizes()) throw config_error("auto scaling needs manifest sizes");
        const int top = m->ladder.levels() - 1;
        for (int c = 1; c <= m->chunks; ++c) {
            double chunk_total = 0.0;
            for (int j = 0; j < m->tile_count(); ++j) {
                double x = m->size_bits(c, j, top);
                max_tile = std::max(max_tile, x);
                chunk_total += x;
            }
            max_chunk = std::max(max_chunk, chunk_total);
        }
    }
    if (!(s.g_norm_bits > 0.0)) s.g_norm_bits = max_chunk;
    if (!(s.size_norm_bits > 0.0)) s.size_norm_bits = max_tile;
    return s;
}

} // namespace vrstream
