#include "rsl/experiment.h"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <malloc.h>

#include <cstdlib>
#include <iostream>

using namespace std;
using namespace rsl;
using namespace rsl::experiment;

namespace {
void configure_logging() {
    auto logger = spdlog::stderr_color_mt("rsl");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    const char *level = getenv("RSL_LOG");
    if (!level)
        return;
    string name = level;
    if (name == "error")
        spdlog::set_level(spdlog::level::err);
    else if (name == "warn")
        spdlog::set_level(spdlog::level::warn);
    else if (name == "info")
        spdlog::set_level(spdlog::level::info);
    else if (name == "debug")
        spdlog::set_level(spdlog::level::debug);
    else
        spdlog::warn("ignoring unknown RSL_LOG level '{}'", name);
}

struct ModeOption {
    string text = "novelty";
};

void add_rsl_options(CLI::App *app, RslConfig &config, ModeOption &mode,
                     optional<double> &density) {
    app->add_option("--nt", config.num_train, "Training-set size N_t");
    app->add_option("--pr", config.random_percent, "Percentage of random states P_r");
    app->add_option("--nr", config.num_rollouts, "Regression rollouts N_r");
    app->add_option("--len", config.length, "Rollout length L");
    app->add_option("--mode", mode.text, "Action selection: novelty or random");
    app->add_option("--density", density, "Bernoulli density for random states");
}

void add_train_options(CLI::App *app, nn::TrainConfig &config) {
    app->add_option("--lr", config.learning_rate, "Adam learning rate");
    app->add_option("--batch", config.batch_size, "Mini-batch size");
    app->add_option("--max-epochs", config.max_epochs, "Epoch limit");
    app->add_option("--patience", config.patience, "Early-stopping patience");
}

struct BudgetOptions {
    optional<uint64_t> max_expansions = 100000;
    optional<double> time_limit;
    optional<size_t> max_records;

    SearchBudget budget() const {return {max_expansions, time_limit, max_records};}
};

void add_budget_options(CLI::App *app, BudgetOptions &budget) {
    app->add_option("--max-expansions", budget.max_expansions, "Expansion limit per search");
    app->add_option("--time-limit", budget.time_limit, "Seconds per search");
    app->add_option("--max-records", budget.max_records, "Stored-node limit per search");
}
}

int main(int argc, char **argv) {
    // Training allocates and frees batch-sized matrices constantly; keep them
    // on the heap instead of round-tripping through mmap.
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    configure_logging();
    CLI::App app{"Regression-based supervised learning of per-instance heuristics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", string(tool_version));

    GroundCommand ground;
    auto *ground_cmd = app.add_subcommand("ground", "Ground a STRIPS PDDL task into JSON");
    ground_cmd->add_option("--domain", ground.domain, "Domain PDDL file")->required();
    ground_cmd->add_option("--problem", ground.problem, "Problem PDDL file")->required();
    ground_cmd->add_option("--out", ground.out, "Output task JSON")->required();

    TrainCommand train;
    ModeOption train_mode;
    auto *train_cmd = app.add_subcommand("train", "Sample a training set and fit a heuristic");
    train_cmd->add_option("--task", train.task, "Grounded task JSON")->required();
    add_rsl_options(train_cmd, train.rsl, train_mode, train.rsl.completion_density);
    add_train_options(train_cmd, train.train);
    train_cmd->add_option("--seed", train.seed, "Master seed");
    train_cmd->add_option("--out", train.out, "Output directory")->required();
    train_cmd->add_flag("--dump-rollouts", train.dump_rollouts, "Write rollouts.json");
    int train_jobs = 1;
    train_cmd->add_option("--jobs", train_jobs, "Worker threads (training is sequential)");

    EvalCommand eval;
    BudgetOptions eval_budget;
    auto *eval_cmd = app.add_subcommand("eval", "Run GBFS from random-walk states");
    eval_cmd->add_option("--task", eval.task, "Grounded task JSON")->required();
    eval_cmd->add_option("--model", eval.model, "Model file for the nn heuristic");
    eval_cmd->add_option("--heuristic", eval.heuristic, "nn, goal-count, h-add or blind");
    add_budget_options(eval_cmd, eval_budget);
    eval_cmd->add_option("--states", eval.states.count, "Number of initial states");
    eval_cmd->add_option("--walk-steps", eval.states.walk_steps, "Random-walk length");
    eval_cmd->add_option("--instance", eval.instance, "Instance name in the results");
    eval_cmd->add_option("--seed", eval.seed, "Master seed");
    eval_cmd->add_option("--out", eval.out, "Output directory")->required();
    eval_cmd->add_option("--jobs", eval.jobs, "Worker threads");

    GridCommand grid;
    BudgetOptions grid_budget;
    string grid_mode = "novelty";
    auto *grid_cmd = app.add_subcommand("grid", "Train and evaluate a hyper-parameter grid");
    grid_cmd->add_option("--task", grid.task, "Grounded task JSON")->required();
    grid_cmd->add_option("--nt", grid.grid.num_train, "N_t values")->delimiter(',');
    grid_cmd->add_option("--pr", grid.grid.random_percent, "P_r values")->delimiter(',');
    grid_cmd->add_option("--nr", grid.grid.num_rollouts, "N_r values")->delimiter(',');
    grid_cmd->add_option("--len", grid.grid.length, "L values")->delimiter(',');
    grid_cmd->add_option("--mode", grid_mode, "Action selection: novelty or random");
    grid_cmd->add_option("--density", grid.completion_density, "Bernoulli density");
    grid_cmd->add_option("--eval-states", grid.grid.eval_states, "Evaluation states per config");
    grid_cmd->add_option("--walk-steps", grid.walk_steps, "Random-walk length");
    add_train_options(grid_cmd, grid.train);
    add_budget_options(grid_cmd, grid_budget);
    grid_cmd->add_option("--seed", grid.seed, "Master seed");
    grid_cmd->add_option("--out", grid.out, "Output directory")->required();
    grid_cmd->add_option("--jobs", grid.jobs, "Worker threads");

    ValidateSelectCommand select;
    ModeOption select_mode;
    BudgetOptions select_budget;
    auto *select_cmd = app.add_subcommand("validate-select",
                                          "Train k seeds and keep the best on validation states");
    select_cmd->add_option("--task", select.task, "Grounded task JSON")->required();
    select_cmd->add_option("--k", select.k, "Number of seeds");
    add_rsl_options(select_cmd, select.rsl, select_mode, select.rsl.completion_density);
    add_train_options(select_cmd, select.train);
    add_budget_options(select_cmd, select_budget);
    select_cmd->add_option("--validation-states", select.validation_states.count,
                           "Number of validation states");
    select_cmd->add_option("--walk-steps", select.validation_states.walk_steps,
                           "Random-walk length");
    select_cmd->add_option("--seed", select.seed, "Base seed; model i uses seed + i");
    select_cmd->add_option("--out", select.out, "Output directory")->required();
    select_cmd->add_option("--jobs", select.jobs, "Worker threads");

    ReportCommand report;
    auto *report_cmd = app.add_subcommand("report", "Summarize results JSONL files as CSV");
    report_cmd->add_option("--results", report.results_dir, "Directory with results")
        ->required();
    report_cmd->add_option("--out", report.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(InputError);
    }

    try {
        if (train_cmd->parsed()) {
            train.rsl.mode = parse_selection_mode(train_mode.text);
            return cmd_train(train);
        }
        if (eval_cmd->parsed()) {
            eval.budget = eval_budget.budget();
            return cmd_eval(eval);
        }
        if (grid_cmd->parsed()) {
            grid.grid.mode = parse_selection_mode(grid_mode);
            grid.budget = grid_budget.budget();
            return cmd_grid(grid);
        }
        if (select_cmd->parsed()) {
            select.rsl.mode = parse_selection_mode(select_mode.text);
            select.budget = select_budget.budget();
            return cmd_validate_select(select);
        }
        if (report_cmd->parsed())
            return cmd_report(report);
        if (ground_cmd->parsed())
            return cmd_ground(ground);
    } catch (const exception &e) {
        spdlog::error("{}", e.what());
        return InputError;
    }
    return InputError;
}
