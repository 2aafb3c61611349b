#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "vrstream/channel.hpp"
#include "vrstream/config.hpp"
#include "vrstream/error.hpp"
#include "vrstream/media.hpp"
#include "vrstream/nn.hpp"
#include "vrstream/phy_scheduler.hpp"
#include "vrstream/report.hpp"
#include "vrstream/rng.hpp"
#include "vrstream/sim.hpp"
#include "vrstream/traces.hpp"
#include "vrstream/trainer.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_text(const std::string& path) {
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw vrstream::io_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw vrstream::io_error("cannot write " + path);
    out << text;
}

vrstream::scheduler_instance instance_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw vrstream::parse_error(std::string("scheduler input: ") + e.what());
    }
    vrstream::scheduler_instance inst;
    try {
        inst.users = j.at("U").get<int>();
        inst.total_slots = j.at("T").get<int>();
        inst.coherence_slots = j.at("T_B").get<int>();
        inst.lambda = j.at("lambda").get<double>();
        inst.rate_bps = j.at("rates_bps").get<std::vector<double>>();
        inst.afer_bps = j.at("afer_bps").get<std::vector<double>>();
        inst.max_iters = j.value("max_iters", 0);
    } catch (const json::exception& e) {
        throw vrstream::parse_error(std::string("scheduler input: ") + e.what());
    }
    inst.validate();
    return inst;
}

std::string result_to_json_text(const vrstream::schedule_result& res, bool with_trace) {
    ordered_json j;
    j["allocation"] = res.alloc.slots;
    j["max_violation_bps"] = res.max_violation_bps;
    j["objective"] = res.objective;
    j["iterations"] = res.iterations;
    if (with_trace) {
        ordered_json trace = ordered_json::array();
        for (const auto& rec : res.trace) {
            ordered_json e;
            e["iteration"] = rec.iteration;
            e["donor"] = rec.donor;
            e["recipient"] = rec.recipient;
            e["objective"] = rec.objective;
            e["max_violation_bps"] = rec.max_violation_bps;
            e["cost_evals"] = rec.cost_evals;
            trace.push_back(std::move(e));
        }
        j["trace"] = std::move(trace);
    }
    return j.dump(2) + "\n";
}

struct config_inputs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

vrstream::run_config resolve_config(const config_inputs& in,
                                    std::vector<std::string>* explicit_keys) {
    vrstream::run_config cfg;
    if (!in.config_path.empty()) {
        std::string text = read_text(in.config_path);
        cfg = vrstream::config_from_json_text(text);
        if (explicit_keys) *explicit_keys = vrstream::config_keys_in_text(text);
    }
    if (in.seed_given) {
        cfg.seed = in.seed;
        if (explicit_keys &&
            std::find(explicit_keys->begin(), explicit_keys->end(), "seed") ==
                explicit_keys->end())
            explicit_keys->push_back("seed");
    }
    cfg.validate();
    return cfg;
}

// Content and channel state shared by train and eval: one manifest and one
// schedule-time FoV map per video (estimated on the training split only),
// plus fixed user distances.
struct world_data {
    std::vector<int> video_ids;
    std::vector<vrstream::video_manifest> manifests;
    std::vector<vrstream::fov_probability_map> prmaps;
    std::vector<vrstream::fov_trace> train_traces;
    std::vector<vrstream::fov_trace> test_traces;
    std::vector<double> distances;
    vrstream::feature_scaling scaling;
};

world_data build_world(const vrstream::run_config& cfg, const std::string& traces_path) {
    world_data w;
    const int tiles = cfg.grid_rows * cfg.grid_cols;
    std::vector<vrstream::fov_trace> all =
        vrstream::load_traces_csv(traces_path, cfg.chunk_count, tiles);
    auto split = vrstream::split_traces(all, cfg.train_fraction,
                                        vrstream::mix_seed(cfg.seed, 0x5B117ull));
    w.train_traces = std::move(split.first);
    w.test_traces = std::move(split.second);
    std::set<int> vids;
    for (const auto& t : all) vids.insert(t.video_id);
    w.video_ids.assign(vids.begin(), vids.end());
    for (int vid : w.video_ids) {
        vrstream::video_manifest m;
        m.video_id = vid;
        m.chunks = cfg.chunk_count;
        m.chunk_duration_s = cfg.chunk_duration_s;
        m.grid_rows = cfg.grid_rows;
        m.grid_cols = cfg.grid_cols;
        m.ladder.rates_bps = cfg.ladder_bps;
        vrstream::ensure_sizes(m, cfg.vbr_jitter, cfg.seed);
        w.manifests.push_back(std::move(m));
        std::vector<vrstream::fov_trace> vid_train;
        for (const auto& t : w.train_traces)
            if (t.video_id == vid) vid_train.push_back(t);
        w.prmaps.push_back(vrstream::estimate_fov_probability(vid_train, tiles));
    }
    if (!cfg.distances_m.empty()) {
        w.distances = cfg.distances_m;
    } else {
        vrstream::rng dist_gen(vrstream::mix_seed(cfg.seed, 0xD157ull));
        for (int u = 0; u < cfg.users; ++u)
            w.distances.push_back(dist_gen.uniform(cfg.distance_min_m, cfg.distance_max_m));
    }
    std::vector<const vrstream::video_manifest*> refs;
    for (const auto& m : w.manifests) refs.push_back(&m);
    w.scaling = vrstream::auto_scaling(cfg, refs);
    return w;
}

vrstream::training_world wire_world(const vrstream::run_config& cfg, const world_data& w,
                                    bool use_test_traces) {
    vrstream::training_world tw;
    tw.cfg = &cfg;
    for (std::size_t i = 0; i < w.manifests.size(); ++i) {
        tw.video_manifests.push_back(&w.manifests[i]);
        tw.video_prmaps.push_back(&w.prmaps[i]);
    }
    tw.video_traces.resize(w.manifests.size());
    const auto& pool = use_test_traces ? w.test_traces : w.train_traces;
    for (const auto& t : pool) {
        auto it = std::find(w.video_ids.begin(), w.video_ids.end(), t.video_id);
        if (it == w.video_ids.end()) throw vrstream::data_error("trace for an unknown video");
        tw.video_traces[static_cast<std::size_t>(it - w.video_ids.begin())].push_back(&t);
    }
    tw.user_distance_m = w.distances;
    tw.scaling = w.scaling;
    return tw;
}

void write_resolved_config(const std::string& dir, const vrstream::run_config& cfg,
                           const std::vector<std::string>& explicit_keys) {
    write_text(dir + "/resolved_config.json",
               vrstream::echo_config_json(cfg, explicit_keys));
}

std::vector<std::pair<double, double>> downsample_curve(const std::vector<double>& curve,
                                                        std::size_t max_points) {
    std::vector<std::pair<double, double>> pts;
    if (curve.empty()) return pts;
    const std::size_t stride = std::max<std::size_t>(1, curve.size() / max_points);
    for (std::size_t i = 0; i < curve.size(); i += stride)
        pts.emplace_back(static_cast<double>(i + 1), curve[i]);
    if (pts.back().first != static_cast<double>(curve.size()))
        pts.emplace_back(static_cast<double>(curve.size()), curve.back());
    return pts;
}

int cmd_schedule(const std::string& in_path, const std::string& out_path, bool brute) {
    vrstream::scheduler_instance inst = instance_from_json_text(read_text(in_path));
    vrstream::schedule_result res =
        brute ? vrstream::brute_force_schedule(inst) : vrstream::schedule(inst);
    write_text(out_path, result_to_json_text(res, !brute));
    return 0;
}

int cmd_gen_traces(const config_inputs& ci, const std::string& out_dir) {
    vrstream::run_config cfg = resolve_config(ci, nullptr);
    std::vector<vrstream::fov_trace> traces = vrstream::generate_traces(
        cfg.trace_users, cfg.trace_videos, cfg.chunk_count, cfg.grid_rows, cfg.grid_cols,
        cfg.fov_block, cfg.walk_step, cfg.seed);
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/traces.csv";
    vrstream::save_traces_csv(path, traces);
    std::cout << "wrote " << traces.size() << " traces (" << cfg.trace_users << " users x "
              << cfg.trace_videos << " videos, " << cfg.chunk_count << " chunks) to " << path
              << "\n";
    return 0;
}

int cmd_train(const config_inputs& ci, const std::string& traces_path,
              const std::string& out_dir) {
    std::vector<std::string> explicit_keys;
    vrstream::run_config cfg = resolve_config(ci, &explicit_keys);
    world_data w = build_world(cfg, traces_path);
    vrstream::training_world tw = wire_world(cfg, w, false);
    std::vector<vrstream::tile_agent> agents =
        vrstream::make_agents(cfg.grid_rows * cfg.grid_cols,
                              static_cast<int>(cfg.ladder_bps.size()), cfg.gamma,
                              vrstream::mix_seed(cfg.seed, 0x16E7ull));
    std::cout << "training " << agents.size() << " tile agents for " << cfg.iterations
              << " iterations (" << cfg.workers << " workers)\n";
    vrstream::training_progress progress = vrstream::train_agents(
        tw, agents, cfg.iterations, cfg.workers, vrstream::mix_seed(cfg.seed, 0x7EA17ull));
    std::filesystem::create_directories(out_dir);
    vrstream::save_agents(out_dir + "/checkpoints", agents, cfg.resolved_beta(),
                          cfg.iterations);
    vrstream::write_learning_curve_csv(out_dir + "/learning_curve.csv", progress.curve);
    if (!progress.curve.empty()) {
        vrstream::plot_series s;
        s.label = "PROPOSED";
        s.points = downsample_curve(progress.curve, 2000);
        vrstream::write_lines_svg(out_dir + "/learning_curve.svg", "Training progress",
                                  "iteration", "mean episode reward", {s});
    }
    write_resolved_config(out_dir, cfg, explicit_keys);
    if (progress.skipped_updates > 0)
        std::cerr << "warning: " << progress.skipped_updates
                  << " updates skipped due to non-finite gradients\n";
    double tail = 0.0;
    const std::size_t n = progress.curve.size();
    const std::size_t k = std::min<std::size_t>(n, 100);
    for (std::size_t i = n - k; i < n; ++i) tail += progress.curve[i];
    if (k > 0) tail /= static_cast<double>(k);
    std::cout << "done; mean episode reward over the last " << k << " iterations: " << tail
              << "\n";
    std::cout << "checkpoints: " << out_dir << "/checkpoints\n";
    return 0;
}

int cmd_eval(const config_inputs& ci, const std::string& traces_path,
             const std::string& checkpoint_dir, const std::string& out_dir) {
    std::vector<std::string> explicit_keys;
    vrstream::run_config cfg = resolve_config(ci, &explicit_keys);
    world_data w = build_world(cfg, traces_path);
    vrstream::training_world tw = wire_world(cfg, w, true);

    std::vector<vrstream::tile_agent> agents;
    bool have_agents = false;
    if (!checkpoint_dir.empty()) {
        vrstream::agent_bundle bundle = vrstream::load_agents(checkpoint_dir);
        if (static_cast<int>(bundle.agents.size()) != cfg.grid_rows * cfg.grid_cols)
            throw vrstream::config_error("checkpoint tile count does not match the grid");
        if (bundle.agents[0].actor.config().ladder_levels !=
            static_cast<int>(cfg.ladder_bps.size()))
            throw vrstream::config_error("checkpoint ladder width does not match the config");
        agents = std::move(bundle.agents);
        have_agents = true;
    }

    std::vector<vrstream::scheme> schemes;
    for (vrstream::scheme s : vrstream::all_schemes())
        if (s != vrstream::scheme::proposed || have_agents) schemes.push_back(s);
    if (!have_agents)
        std::cout << "no checkpoints given; skipping PROPOSED and evaluating baselines only\n";

    std::vector<vrstream::report_row> rows;
    std::vector<vrstream::plot_series> cdf_series;
    long long audit_total = 0;
    for (vrstream::scheme s : schemes) {
        std::vector<double> normalized;
        for (int e = 0; e < cfg.eval_episodes; ++e) {
            vrstream::episode_setup setup = tw.setup_for_episode(e);
            // one seed per episode index, shared by every scheme so all face
            // the same channel realization
            vrstream::episode_result res = vrstream::run_episode(
                setup, s, have_agents ? &agents : nullptr, false,
                vrstream::mix_seed(vrstream::mix_seed(cfg.seed, 0xE7A1ull),
                                   static_cast<std::uint64_t>(e)),
                w.scaling);
            audit_total += res.audits.total();
            for (const auto& row : vrstream::to_report_rows(s, res)) {
                normalized.push_back(row.normalized_reward);
                rows.push_back(row);
            }
        }
        vrstream::plot_series series;
        series.label = vrstream::scheme_name(s);
        series.points = vrstream::empirical_cdf(normalized);
        cdf_series.push_back(std::move(series));
    }

    std::filesystem::create_directories(out_dir);
    vrstream::write_report_csv(out_dir + "/report.csv", rows);
    std::vector<vrstream::aggregate_row> agg = vrstream::aggregate_means(rows);
    vrstream::write_aggregate_csv(out_dir + "/aggregate.csv", agg);
    vrstream::write_lines_svg(out_dir + "/reward_cdf.svg",
                              "Per-chunk normalized reward (empirical CDF)",
                              "normalized reward", "fraction of chunks", cdf_series);
    write_resolved_config(out_dir, cfg, explicit_keys);

    for (vrstream::scheme s : schemes) {
        double sum = 0.0;
        long long n = 0;
        for (const auto& r : rows)
            if (r.scheme == vrstream::scheme_name(s)) { sum += r.reward; ++n; }
        std::cout << vrstream::scheme_name(s) << ": mean per-chunk reward "
                  << (n > 0 ? sum / static_cast<double>(n) : 0.0) << "\n";
    }
    if (audit_total != 0) {
        std::cerr << "error: " << audit_total << " audit violations during evaluation\n";
        return 1;
    }
    std::cout << "report: " << out_dir << "/report.csv\n";
    return 0;
}

int cmd_selfcheck(std::uint64_t seed, bool quick) {
    using namespace vrstream;
    bool ok = true;

    // time-slot scheduler vs exhaustive search on random instances
    {
        rng gen(mix_seed(seed, 0x5E1Fc4Edull));
        const int n = quick ? 10 : 50;
        int failed = 0;
        for (int i = 0; i < n; ++i) {
            scheduler_instance inst;
            inst.users = 2 + static_cast<int>(gen.below(3));
            inst.total_slots = 4 + static_cast<int>(gen.below(9));
            inst.coherence_slots = inst.total_slots + 2;
            inst.lambda = 0.0;
            for (int u = 0; u < inst.users; ++u) {
                inst.rate_bps.push_back(gen.uniform(1e6, 20e6));
                inst.afer_bps.push_back(gen.uniform(0.5e6, 5e6));
            }
            schedule_result fast = schedule(inst);
            schedule_result best = brute_force_schedule(inst);
            if (std::fabs(fast.max_violation_bps - best.max_violation_bps) > 1e-9) ++failed;
        }
        std::cout << "scheduler vs exhaustive search: " << (n - failed) << "/" << n
                  << " instances matched\n";
        if (failed > 0) ok = false;
    }

    // analytic policy/value gradients vs central finite differences
    {
        const int seeds = quick ? 1 : 3;
        int failed = 0;
        for (int s = 0; s < seeds; ++s) {
            rng gen(mix_seed(seed, 0xF0ADull + static_cast<std::uint64_t>(s)));
            net_config ncfg;
            ncfg.ladder_levels = 5;
            ncfg.outputs = 5;
            network actor(ncfg);
            actor.init_uniform(gen);
            features in;
            for (int q = 0; q < ncfg.ladder_levels; ++q)
                in.zeta.push_back(gen.uniform01());
            in.g = gen.uniform01();
            in.pr = gen.uniform01();
            in.f = gen.below(2) ? 1.0 : 0.0;
            const int action = static_cast<int>(gen.below(5));
            std::vector<double> grad(actor.params().size(), 0.0);
            grad_log_policy(actor, in, action, grad);
            const double h = 1e-5;
            double worst = 0.0;
            for (int trial = 0; trial < 200; ++trial) {
                const std::size_t p = static_cast<std::size_t>(gen.below(actor.params().size()));
                const double saved = actor.params()[p];
                actor.params()[p] = saved + h;
                const double up = log_softmax(actor.forward(in))[static_cast<std::size_t>(action)];
                actor.params()[p] = saved - h;
                const double dn = log_softmax(actor.forward(in))[static_cast<std::size_t>(action)];
                actor.params()[p] = saved;
                const double fd = (up - dn) / (2.0 * h);
                const double denom = std::max({std::fabs(fd), std::fabs(grad[p]), 1e-6});
                worst = std::max(worst, std::fabs(fd - grad[p]) / denom);
            }
            if (worst > 1e-3) ++failed;
        }
        std::cout << "policy gradient vs finite differences: " << (seeds - failed) << "/"
                  << seeds << " seeds within tolerance\n";
        if (failed > 0) ok = false;
    }

    std::cout << (ok ? "selfcheck passed\n" : "selfcheck FAILED\n");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-user tiled 360-degree video streaming simulator"};
    app.require_subcommand(1);

    config_inputs ci;
    std::string in_path, out_path, out_dir = ".", traces_path, checkpoint_dir;
    bool quick = false;

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", ci.config_path, "JSON run configuration");
        cmd->add_option("--seed", ci.seed, "override the config seed")
            ->each([&](const std::string&) { ci.seed_given = true; });
    };

    CLI::App* sched = app.add_subcommand(
        "schedule", "allocate time slots for one coherence block (JSON in/out)");
    sched->add_option("--in", in_path, "input JSON path (default: stdin)");
    sched->add_option("--out", out_path, "output JSON path (default: stdout)");

    CLI::App* oracle = app.add_subcommand(
        "oracle", "exhaustive slot allocation for small instances (JSON in/out)");
    oracle->add_option("--in", in_path, "input JSON path (default: stdin)");
    oracle->add_option("--out", out_path, "output JSON path (default: stdout)");

    CLI::App* gen = app.add_subcommand("gen-traces", "generate synthetic head-movement traces");
    add_config_opts(gen);
    gen->add_option("--out", out_dir, "output directory");

    CLI::App* train = app.add_subcommand("train", "train per-tile quality agents");
    add_config_opts(train);
    train->add_option("--traces", traces_path, "head-movement trace CSV")->required();
    train->add_option("--out", out_dir, "output directory");

    CLI::App* eval_cmd = app.add_subcommand("eval", "compare schemes on held-out traces");
    add_config_opts(eval_cmd);
    eval_cmd->add_option("--traces", traces_path, "head-movement trace CSV")->required();
    eval_cmd->add_option("--checkpoints", checkpoint_dir, "trained agent directory");
    eval_cmd->add_option("--out", out_dir, "output directory");

    CLI::App* check = app.add_subcommand("selfcheck", "run built-in consistency checks");
    check->add_option("--seed", ci.seed, "randomization seed")
        ->each([&](const std::string&) { ci.seed_given = true; });
    check->add_flag("--quick", quick, "smaller instance counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sched->parsed()) return cmd_schedule(in_path, out_path, false);
        if (oracle->parsed()) return cmd_schedule(in_path, out_path, true);
        if (gen->parsed()) return cmd_gen_traces(ci, out_dir);
        if (train->parsed()) return cmd_train(ci, traces_path, out_dir);
        if (eval_cmd->parsed()) return cmd_eval(ci, traces_path, checkpoint_dir, out_dir);
        if (check->parsed()) return cmd_selfcheck(ci.seed_given ? ci.seed : 1, quick);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
