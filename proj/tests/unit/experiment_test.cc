#include "doctest.h"

#include "oracles.h"

#include "rsl/experiment.h"
#include "rsl/sha256.h"

#include "json.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace rsl;
using namespace rsl::experiment;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {
fs::path scratch() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("rsl_experiment_test_" + std::to_string(getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cli(const std::string &args) {
    std::string command = std::string(RSL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path grounded(const std::string &name) {
    fs::path out = scratch() / (name + ".json");
    if (!fs::exists(out)) {
        std::string domain = name.rfind("gripper", 0) == 0 ? "gripper-domain.pddl"
                                                           : "blocksworld-domain.pddl";
        REQUIRE(run_cli("ground --domain " + testing::fixture_path(domain).string() +
                        " --problem " + testing::fixture_path(name + ".pddl").string() +
                        " --out " + out.string()) == 0);
    }
    return out;
}

std::vector<json> read_jsonl(const fs::path &path) {
    std::vector<json> rows;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line))
        rows.push_back(json::parse(line));
    return rows;
}

std::vector<std::string> read_lines(const fs::path &path) {
    std::vector<std::string> lines;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    return lines;
}
}

TEST_CASE("median") {
    CHECK_FALSE(median({}));
    CHECK(*median({3}) == 3);
    CHECK(*median({5, 1, 3}) == 3);
    CHECK(*median({4, 1, 3, 2}) == 2.5);
}

TEST_CASE("summaries and JSONL") {
    std::vector<EvalRecord> records(4);
    for (std::size_t i = 0; i < 4; ++i) {
        records[i].instance = "bw";
        records[i].state_index = i;
        records[i].heuristic_name = "goal-count";
        records[i].num_atoms = 29;
        records[i].result.expansions = 10 * (i + 1);
        records[i].result.evaluations = 20 * (i + 1);
    }
    records[0].result.status = SearchStatus::Solved;
    records[0].result.plan = std::vector<ActionId>{1, 2};
    records[2].result.status = SearchStatus::Solved;
    records[2].result.plan = std::vector<ActionId>{1, 2, 3, 4};
    records[3].result.status = SearchStatus::BudgetExceeded;
    EvalSummary s = summarize(records);
    CHECK(s.total == 4);
    CHECK(s.solved == 2);
    CHECK(s.coverage == 50.0);
    CHECK(*s.median_expansions == 20.0);
    CHECK(*s.median_plan_length == 3.0);

    std::string text = to_jsonl(records);
    json first = json::parse(text.substr(0, text.find('\n')));
    for (const char *key : {"status", "plan_length", "expansions", "evaluations", "elapsed_sec",
                            "heuristic_name", "seed"})
        CHECK(first.contains(key));
    std::vector<EvalRecord> back = parse_jsonl(text);
    REQUIRE(back.size() == 4);
    CHECK(back[2].result.plan_length() == 4);
    CHECK(back[3].result.status == SearchStatus::BudgetExceeded);
    CHECK(to_jsonl(back) == text);
}

TEST_CASE("grid expansion") {
    GridSpec grid;
    std::vector<RslConfig> configs = grid.expand(1);
    CHECK(configs.size() == 16);
    CHECK(configs[0].num_train == 10000);
    CHECK(configs[0].length == 50);
    CHECK(configs[1].length == 500);
    CHECK(configs[15].num_train == 100000);
    CHECK(configs[15].random_percent == 50);
    CHECK(configs[15].num_rollouts == 5);
    CHECK(configs[0].seed != configs[1].seed);
    GridSpec single{{100}, {0}, {1}, {5}};
    CHECK(single.expand(1).size() == 1);
}

TEST_CASE("seed plan streams are distinct") {
    SeedPlan p = SeedPlan::from(7);
    std::set<std::uint64_t> seeds{p.rsl, p.train, p.validation_states, p.eval_states};
    CHECK(seeds.size() == 4);
}

TEST_CASE("parallel_for visits every index once") {
    for (int jobs : {1, 3}) {
        std::vector<std::atomic<int>> hits(20);
        parallel_for(20, jobs, [&](std::size_t i) {++hits[i];});
        for (auto &h : hits)
            CHECK(h == 1);
    }
}

TEST_CASE("build_training_set respects the cost bounds") {
    TaskBundle bw4 = testing::load_fixture("blocksworld-4");
    RslConfig cfg;
    cfg.num_rollouts = 5;
    cfg.length = 50;
    cfg.num_train = 500;
    cfg.seed = 3;
    RslRun run = build_training_set(bw4, cfg);
    CHECK(run.dataset.records.size() == 500);
    CHECK(within_lookahead_bound(run.counters, cfg, bw4.task.num_actions()));
    CHECK(within_membership_bound(run.counters, cfg));
}

TEST_CASE("make_heuristic") {
    TaskBundle bw4 = testing::load_fixture("blocksworld-4");
    State goal{bw4.task.goal()};
    CHECK(make_heuristic("goal-count", bw4, nullptr)(bw4.task.initial_state()) == 2.0);
    CHECK(make_heuristic("h-add", bw4, nullptr)(goal) == 0.0);
    CHECK(make_heuristic("blind", bw4, nullptr)(goal) == 0.0);
    CHECK_THROWS(make_heuristic("nn", bw4, nullptr));
    CHECK_THROWS(make_heuristic("ff", bw4, nullptr));
    nn::HeuristicModel wrong = nn::init_model(3, 1, 4);
    CHECK_THROWS_AS(make_heuristic("nn", bw4, &wrong), nn::DimensionMismatch);
}

TEST_CASE("ground command") {
    fs::path out = grounded("gripper-2");
    json doc = json::parse(read_file(out));
    std::vector<std::string> keys;
    for (auto it = doc.begin(); it != doc.end(); ++it)
        keys.push_back(it.key());
    std::sort(keys.begin(), keys.end());
    CHECK(keys == std::vector<std::string>{"actions", "atoms", "format_version", "goal", "init",
                                           "mutexes", "reachable_actions"});
    CHECK(doc["atoms"].size() == 12);
    CHECK_NOTHROW(load_ground_task(out));
    std::string adl = "ground --domain " + testing::fixture_path("adl-domain.pddl").string() +
                      " --problem " + testing::fixture_path("adl-problem.pddl").string() +
                      " --out " + (scratch() / "adl.json").string();
    CHECK(run_cli(adl) == 2);
    CHECK(run_cli("ground --domain /nonexistent.pddl --problem /x.pddl --out " +
                  (scratch() / "x.json").string()) == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("train --task") == 2);
}

TEST_CASE("train and eval commands") {
    fs::path task = grounded("blocksworld-4");
    fs::path out = scratch() / "train";
    std::string flags = "train --task " + task.string() +
                        " --nt 10000 --len 50 --nr 5 --pr 50 --seed 7 --max-epochs 3 --out ";
    REQUIRE(run_cli(flags + out.string()) == 0);
    CHECK(fs::exists(out / "model.rslm"));
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "history.json"));
    CHECK(read_lines(out / "dataset.csv").size() == 10001);
    json manifest = json::parse(read_file(out / "manifest.json"));
    CHECK(manifest["task_sha256"] == sha256_hex(read_file(task)));
    CHECK(manifest["rsl_config"]["n_t"] == 10000);
    json counters = json::parse(read_file(out / "counters.json"));
    CHECK(counters["lookahead_bound_ok"] == true);
    CHECK(counters["membership_bound_ok"] == true);

    CHECK(run_cli("train --task " + task.string() + " --pr 150 --out " +
                  (scratch() / "bad").string()) == 2);
    CHECK(run_cli("train --task /nonexistent.json --out " + (scratch() / "bad").string()) == 2);

    fs::path eval = scratch() / "eval-nn";
    REQUIRE(run_cli("eval --task " + task.string() + " --model " + (out / "model.rslm").string() +
                    " --states 20 --max-expansions 100000 --seed 1 --out " + eval.string()) == 0);
    json summary = json::parse(read_file(eval / "summary.json"));
    CHECK(summary.contains("coverage"));
    CHECK(read_jsonl(eval / "results.jsonl").size() == 20);

    fs::path baseline = scratch() / "eval-gc";
    REQUIRE(run_cli("eval --task " + task.string() +
                    " --heuristic goal-count --states 20 --seed 1 --out " + baseline.string()) == 0);
    CHECK(json::parse(read_file(baseline / "summary.json"))["coverage"] == 100.0);

    fs::path zero = scratch() / "eval-zero";
    REQUIRE(run_cli("eval --task " + task.string() +
                    " --heuristic goal-count --states 10 --max-expansions 0 --seed 1 --out " +
                    zero.string()) == 0);
    for (const json &row : read_jsonl(zero / "results.jsonl")) {
        CHECK(row["expansions"] == 0);
        if (row["status"] != "solved")
            CHECK(row["status"] == "budget-exceeded");
    }

    fs::path gripper = grounded("gripper-2");
    CHECK(run_cli("eval --task " + gripper.string() + " --model " +
                  (out / "model.rslm").string() + " --out " + (scratch() / "mismatch").string()) ==
          2);
    CHECK(run_cli("eval --task " + task.string() + " --out " + (scratch() / "nomodel").string()) ==
          2);

    fs::path report = scratch() / "report";
    REQUIRE(run_cli("report --results " + scratch().string() + " --out " + report.string()) == 0);
    std::vector<std::string> pairs = read_lines(report / "pairwise_summary.csv");
    REQUIRE(pairs.size() == 2);
    std::stringstream row(pairs[1]);
    std::vector<std::string> cells;
    for (std::string cell; std::getline(row, cell, ',');)
        cells.push_back(cell);
    REQUIRE(cells.size() == 7);
    for (std::size_t i = 3; i < 7; ++i) {
        double pct = std::stod(cells[i]);
        CHECK(pct >= 0.0);
        CHECK(pct <= 100.0);
    }
    CHECK(fs::exists(report / "pairwise_goal-count_vs_nn.csv"));
    CHECK(fs::exists(report / "evals_per_second.csv"));
}

TEST_CASE("report edge cases") {
    fs::path single = scratch() / "single";
    fs::create_directories(single / "run");
    EvalRecord r;
    r.heuristic_name = "blind";
    r.result.status = SearchStatus::Solved;
    r.result.plan = std::vector<ActionId>{};
    write_file(single / "run" / "results.jsonl", to_jsonl({r}));
    REQUIRE(run_cli("report --results " + single.string()) == 0);
    CHECK(fs::exists(single / "report" / "self_summary.csv"));
    CHECK_FALSE(fs::exists(single / "report" / "pairwise_summary.csv"));
    fs::create_directories(scratch() / "empty");
    CHECK(run_cli("report --results " + (scratch() / "empty").string()) == 2);
}

TEST_CASE("grid with singleton lists") {
    fs::path task = grounded("blocksworld-3");
    fs::path out = scratch() / "grid";
    REQUIRE(run_cli("grid --task " + task.string() +
                    " --nt 200 --pr 50 --nr 2 --len 10 --max-epochs 2 --eval-states 3 --seed 4 "
                    "--out " + out.string()) == 0);
    std::vector<std::string> rows = read_lines(out / "grid.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].rfind("0,200,50,2,10,novelty,", 0) == 0);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "config_0" / "model.rslm"));
    CHECK(run_cli("grid --task " + task.string() + " --nt 0 --out " + out.string()) == 2);
}

TEST_CASE("validate-select") {
    fs::path task = grounded("blocksworld-3");
    std::string base = "validate-select --task " + task.string() +
                       " --nt 200 --nr 2 --len 10 --max-epochs 2 --validation-states 4 --seed 11";
    fs::path one = scratch() / "select1";
    REQUIRE(run_cli(base + " --k 1 --out " + one.string()) == 0);
    json sel = json::parse(read_file(one / "selection.json"));
    CHECK(sel["selected"]["seed"] == 11);
    CHECK(fs::exists(one / "selected_model.rslm"));

    fs::path a = scratch() / "select3a", b = scratch() / "select3b";
    REQUIRE(run_cli(base + " --k 3 --out " + a.string()) == 0);
    REQUIRE(run_cli(base + " --k 3 --jobs 2 --out " + b.string()) == 0);
    json sa = json::parse(read_file(a / "selection.json"));
    json sb = json::parse(read_file(b / "selection.json"));
    CHECK(sa["candidates"].size() == 3);
    CHECK(sa["selected"]["seed"] == sb["selected"]["seed"]);
    CHECK(read_file(a / "selected_model.rslm") == read_file(b / "selected_model.rslm"));
    CHECK(run_cli(base + " --k 0 --out " + a.string()) == 2);
}
