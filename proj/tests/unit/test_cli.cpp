// End-to-end checks of the command-line binary: each case shells out to the
// real executable and inspects exit codes, stdout/stderr, and output files.
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "tmpdir.hpp"
#include "vrstream/trainer.hpp"
#include "vrstream/traces.hpp"

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

// Runs the CLI with stdout/stderr captured to files; returns the exit code.
int run_cli(const std::string& args, const std::string& out_file, const std::string& err_file) {
    const std::string cmd =
        std::string("\"") + VRSTREAM_CLI_PATH + "\" " + args + " >" + out_file + " 2>" + err_file;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool file_exists(const std::string& path) {
    std::ifstream in(path);
    return in.good();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) out.push_back(line);
    return out;
}

std::set<std::string> schemes_in_report(const std::string& csv_text) {
    std::set<std::string> found;
    std::vector<std::string> lines = lines_of(csv_text);
    for (std::size_t i = 1; i < lines.size(); ++i)
        found.insert(lines[i].substr(0, lines[i].find(',')));
    return found;
}

std::vector<std::string> rows_for_scheme(const std::string& csv_text, const std::string& scheme) {
    std::vector<std::string> out;
    for (const std::string& line : lines_of(csv_text))
        if (line.rfind(scheme + ",", 0) == 0) out.push_back(line);
    return out;
}

json canonical_instance() {
    return json{{"U", 3},
                {"T", 7},
                {"T_B", 10},
                {"lambda", 0.0},
                {"rates_bps", {10e6, 9e6, 10e6}},
                {"afer_bps", {2e6, 2e6, 2e6}}};
}

// Small world that a CI machine can gen/train/eval in a few seconds.
json small_config() {
    return json{{"seed", 5},
                {"users", 2},
                {"chunk_count", 4},
                {"chunk_duration_s", 1.0},
                {"startup_delay_s", 1.0},
                {"margin_s", 0.0},
                {"grid_rows", 2},
                {"grid_cols", 2},
                {"ladder_bps", {1e6, 2e6}},
                {"vbr_jitter", 0.0},
                {"slots_per_block", 10},
                {"alignment_fraction", 0.0},
                {"fixed_rate_bps", 5e6},
                {"workers", 1},
                {"iterations", 2},
                {"eval_episodes", 2},
                {"train_fraction", 0.7},
                {"trace_users", 4},
                {"trace_videos", 2},
                {"fov_block", 1},
                {"walk_step", 1}};
}

} // namespace

TEST_CASE("cli schedule solves the canonical three-user block") {
    tmpdir td;
    spit(td.file("in.json"), canonical_instance().dump());
    const int rc = run_cli("schedule --in " + td.file("in.json") + " --out " + td.file("res.json"),
                           td.file("out.txt"), td.file("err.txt"));
    REQUIRE(rc == 0);
    const json res = json::parse(slurp(td.file("res.json")));
    CHECK(res.at("allocation") == json({2, 3, 2}));
    CHECK(res.at("objective").get<double>() == 0.0);
    CHECK(res.at("max_violation_bps").get<double>() == 0.0);
    CHECK(res.at("iterations").get<int>() == 1);
    REQUIRE(res.contains("trace"));
    REQUIRE(res.at("trace").size() == 2);
    const json& start = res.at("trace")[0];
    CHECK(start.at("iteration").get<int>() == 0);
    CHECK(start.at("donor").get<int>() == -1);
    CHECK(start.at("recipient").get<int>() == -1);
    CHECK(start.at("objective").get<double>() == 200000.0);
    const json& step = res.at("trace")[1];
    CHECK(step.at("donor").get<int>() == 2);
    CHECK(step.at("recipient").get<int>() == 1);
    CHECK(step.at("objective").get<double>() == 0.0);
    CHECK(step.at("cost_evals").get<int>() == 5);
}

TEST_CASE("cli schedule defaults to stdin and stdout") {
    tmpdir td;
    spit(td.file("in.json"), canonical_instance().dump());
    const int rc =
        run_cli("schedule < " + td.file("in.json"), td.file("out.txt"), td.file("err.txt"));
    REQUIRE(rc == 0);
    const json res = json::parse(slurp(td.file("out.txt")));
    CHECK(res.at("allocation") == json({2, 3, 2}));
}

TEST_CASE("cli oracle agrees and omits the trace") {
    tmpdir td;
    spit(td.file("in.json"), canonical_instance().dump());
    const int rc = run_cli("oracle --in " + td.file("in.json") + " --out " + td.file("res.json"),
                           td.file("out.txt"), td.file("err.txt"));
    REQUIRE(rc == 0);
    const json res = json::parse(slurp(td.file("res.json")));
    CHECK(res.at("allocation") == json({2, 3, 2}));
    CHECK(res.at("objective").get<double>() == 0.0);
    CHECK(res.at("max_violation_bps").get<double>() == 0.0);
    CHECK(!res.contains("trace"));
}

TEST_CASE("cli maps failures to exit codes and stderr") {
    tmpdir td;

    SUBCASE("missing input file") {
        const int rc = run_cli("schedule --in " + td.file("absent.json"), td.file("out.txt"),
                               td.file("err.txt"));
        CHECK(rc == 1);
        CHECK(slurp(td.file("err.txt")).rfind("error:", 0) == 0);
    }
    SUBCASE("malformed json") {
        spit(td.file("in.json"), "this is not json");
        const int rc =
            run_cli("schedule --in " + td.file("in.json"), td.file("out.txt"), td.file("err.txt"));
        CHECK(rc == 1);
        CHECK(slurp(td.file("err.txt")).rfind("error:", 0) == 0);
    }
    SUBCASE("inconsistent instance") {
        json bad = canonical_instance();
        bad["U"] = 2; // three rates for two users
        spit(td.file("in.json"), bad.dump());
        const int rc =
            run_cli("schedule --in " + td.file("in.json"), td.file("out.txt"), td.file("err.txt"));
        CHECK(rc == 1);
        CHECK(slurp(td.file("err.txt")).rfind("error:", 0) == 0);
    }
    SUBCASE("bad config value") {
        json cfg = small_config();
        cfg["slots_per_block"] = 0;
        spit(td.file("cfg.json"), cfg.dump());
        const int rc = run_cli("gen-traces --config " + td.file("cfg.json") + " --out " +
                                   td.file("tr"),
                               td.file("out.txt"), td.file("err.txt"));
        CHECK(rc == 1);
        CHECK(slurp(td.file("err.txt")).rfind("error:", 0) == 0);
    }
    SUBCASE("unknown subcommand") {
        CHECK(run_cli("frobnicate", td.file("out.txt"), td.file("err.txt")) == 2);
    }
    SUBCASE("unknown flag") {
        CHECK(run_cli("schedule --bogus", td.file("out.txt"), td.file("err.txt")) == 2);
    }
    SUBCASE("no subcommand") {
        CHECK(run_cli("", td.file("out.txt"), td.file("err.txt")) == 2);
    }
    SUBCASE("train without traces") {
        CHECK(run_cli("train", td.file("out.txt"), td.file("err.txt")) == 2);
    }
    SUBCASE("help exits cleanly") {
        CHECK(run_cli("--help", td.file("out.txt"), td.file("err.txt")) == 0);
    }
}

TEST_CASE("cli gen-traces writes a deterministic loadable corpus") {
    tmpdir td;
    spit(td.file("cfg.json"), small_config().dump());
    const std::string base =
        "gen-traces --config " + td.file("cfg.json") + " --seed 7 --out ";

    REQUIRE(run_cli(base + td.file("a"), td.file("out.txt"), td.file("err.txt")) == 0);
    CHECK(slurp(td.file("out.txt")).find("wrote 8 traces (4 users x 2 videos, 4 chunks)") !=
          std::string::npos);

    const std::vector<vrstream::fov_trace> traces =
        vrstream::load_traces_csv(td.file("a") + "/traces.csv", 4, 4);
    REQUIRE(traces.size() == 8);
    for (const auto& tr : traces) CHECK(tr.fov.size() == 4);

    REQUIRE(run_cli(base + td.file("b"), td.file("out.txt"), td.file("err.txt")) == 0);
    CHECK(slurp(td.file("a") + "/traces.csv") == slurp(td.file("b") + "/traces.csv"));

    REQUIRE(run_cli("gen-traces --config " + td.file("cfg.json") + " --seed 8 --out " +
                        td.file("c"),
                    td.file("out.txt"), td.file("err.txt")) == 0);
    CHECK(slurp(td.file("a") + "/traces.csv") != slurp(td.file("c") + "/traces.csv"));
}

TEST_CASE("cli train and eval pipeline produces reports that reload identically") {
    tmpdir td;
    spit(td.file("cfg.json"), small_config().dump());
    const std::string cfg_arg = " --config " + td.file("cfg.json");

    REQUIRE(run_cli("gen-traces" + cfg_arg + " --out " + td.file("tr"), td.file("out.txt"),
                    td.file("err.txt")) == 0);
    const std::string traces_arg = " --traces " + td.file("tr") + "/traces.csv";

    // train: checkpoints, learning curve, resolved config
    REQUIRE(run_cli("train" + cfg_arg + traces_arg + " --out " + td.file("run"),
                    td.file("out.txt"), td.file("err.txt")) == 0);
    CHECK(slurp(td.file("out.txt")).find("training 4 tile agents for 2 iterations (1 workers)") !=
          std::string::npos);

    const std::vector<std::string> curve = lines_of(slurp(td.file("run") + "/learning_curve.csv"));
    REQUIRE(curve.size() == 3);
    CHECK(curve[0] == "iteration,mean_reward");
    CHECK(curve[1].rfind("1,", 0) == 0);
    CHECK(curve[2].rfind("2,", 0) == 0);
    CHECK(slurp(td.file("run") + "/learning_curve.svg").rfind("<svg", 0) == 0);

    const json resolved = json::parse(slurp(td.file("run") + "/resolved_config.json"));
    CHECK(resolved.at("seed").get<int>() == 5);
    CHECK(resolved.at("grid_rows").get<int>() == 2);
    CHECK(resolved.contains("assumed_defaults"));

    const vrstream::agent_bundle bundle = vrstream::load_agents(td.file("run") + "/checkpoints");
    REQUIRE(bundle.agents.size() == 4);
    CHECK(bundle.beta == 0.2); // 1 / (tiles + 1)
    CHECK(bundle.iteration_count == 2);
    CHECK(bundle.agents[0].actor.config().ladder_levels == 2);

    // eval with checkpoints: every scheme present
    const std::string ckpt_arg = " --checkpoints " + td.file("run") + "/checkpoints";
    REQUIRE(run_cli("eval" + cfg_arg + traces_arg + ckpt_arg + " --out " + td.file("ev"),
                    td.file("out.txt"), td.file("err.txt")) == 0);
    CHECK(slurp(td.file("out.txt")).find("report:") != std::string::npos);

    const std::string report = slurp(td.file("ev") + "/report.csv");
    const std::vector<std::string> report_lines = lines_of(report);
    CHECK(report_lines[0] == "scheme,user,chunk,reward,normalized_reward,missed_fov_tiles");
    // 5 schemes x 2 episodes x 2 users x 4 chunks
    CHECK(report_lines.size() == 1 + 5 * 2 * 2 * 4);
    CHECK(schemes_in_report(report) ==
          std::set<std::string>{"PROPOSED", "QPS-PF", "QPS-PR", "FPS-PF", "FPS-PR"});

    const std::vector<std::string> agg = lines_of(slurp(td.file("ev") + "/aggregate.csv"));
    CHECK(agg[0] == "scheme,user,mean_reward");
    CHECK(agg.size() == 1 + 5 * 2);
    CHECK(slurp(td.file("ev") + "/reward_cdf.svg").rfind("<svg", 0) == 0);
    CHECK(file_exists(td.file("ev") + "/resolved_config.json"));

    // eval without checkpoints: baselines only, same channel realizations
    REQUIRE(run_cli("eval" + cfg_arg + traces_arg + " --out " + td.file("ev2"), td.file("out.txt"),
                    td.file("err.txt")) == 0);
    CHECK(slurp(td.file("out.txt"))
              .find("no checkpoints given; skipping PROPOSED and evaluating baselines only") !=
          std::string::npos);
    const std::string report2 = slurp(td.file("ev2") + "/report.csv");
    CHECK(lines_of(report2).size() == 1 + 4 * 2 * 2 * 4);
    CHECK(schemes_in_report(report2) ==
          std::set<std::string>{"QPS-PF", "QPS-PR", "FPS-PF", "FPS-PR"});
    for (const char* s : {"QPS-PF", "QPS-PR", "FPS-PF", "FPS-PR"})
        CHECK(rows_for_scheme(report, s) == rows_for_scheme(report2, s));

    // the echoed config reproduces the run byte for byte
    REQUIRE(run_cli("eval --config " + td.file("ev") + "/resolved_config.json" + traces_arg +
                        ckpt_arg + " --out " + td.file("ev3"),
                    td.file("out.txt"), td.file("err.txt")) == 0);
    CHECK(slurp(td.file("ev3") + "/report.csv") == report);

    // checkpoints that do not match the config are rejected
    json wide = small_config();
    wide["ladder_bps"] = {1e6, 2e6, 4e6};
    spit(td.file("wide.json"), wide.dump());
    const int rc = run_cli("eval --config " + td.file("wide.json") + traces_arg + ckpt_arg +
                               " --out " + td.file("ev4"),
                           td.file("out.txt"), td.file("err.txt"));
    CHECK(rc == 1);
    CHECK(slurp(td.file("err.txt")).rfind("error:", 0) == 0);
}

TEST_CASE("cli selfcheck passes") {
    tmpdir td;
    const int rc = run_cli("selfcheck --quick", td.file("out.txt"), td.file("err.txt"));
    CHECK(rc == 0);
    CHECK(slurp(td.file("out.txt")).find("selfcheck passed") != std::string::npos);
}
