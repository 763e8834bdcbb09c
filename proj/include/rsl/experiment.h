#ifndef RSL_EXPERIMENT_H
#define RSL_EXPERIMENT_H

#include "dataset.h"
#include "network.h"
#include "regression.h"
#include "search.h"
#include "task_io.h"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rsl::experiment {
inline constexpr const char *tool_version = "1.0.0";

enum ExitCode {Success = 0, InputError = 2, NumericalError = 3};

struct RunCounters {
    RegressionCounters regression;
    SamplingCounters sampling;
};

// Bounds from the cost analysis of the sampling pipeline.
bool within_lookahead_bound(const RunCounters &counters, const RslConfig &config,
                            std::size_t num_actions);
bool within_membership_bound(const RunCounters &counters, const RslConfig &config);

struct RslRun {
    RegressionSet regressions;
    LabeledDataset dataset;
    nn::TrainResult training;
    RunCounters counters;
};

// Regression, sampling and labeling only.
RslRun build_training_set(const TaskBundle &bundle, const RslConfig &config);

// The whole pipeline: regression, sampling, labeling, supervised learning.
RslRun run_rsl(const TaskBundle &bundle, const RslConfig &config, const nn::TrainConfig &train);

// Seed streams derived from one CLI-level seed.
struct SeedPlan {
    std::uint64_t rsl;
    std::uint64_t train;
    std::uint64_t validation_states;
    std::uint64_t eval_states;

    static SeedPlan from(std::uint64_t seed);
};

struct EvalStateSpec {
    std::size_t count = 50;
    int walk_steps = 200;
};

struct EvalRecord {
    std::string instance;
    std::size_t state_index = 0;
    std::string heuristic_name;
    std::uint64_t seed = 0;
    std::size_t num_atoms = 0;
    SearchResult result;
};

struct EvalSummary {
    std::size_t total = 0;
    std::size_t solved = 0;
    double coverage = 0.0;
    std::optional<double> median_expansions;    // over solved states
    std::optional<double> median_plan_length;
};

std::optional<double> median(std::vector<double> values);

// Known baselines: "goal-count", "h-add", "blind"; "nn" requires a model.
HeuristicFn make_heuristic(const std::string &name, const TaskBundle &bundle,
                           const nn::HeuristicModel *model);

std::vector<EvalRecord> evaluate(const TaskBundle &bundle, const std::string &instance,
                                 const std::string &heuristic_name, const HeuristicFn &heuristic,
                                 const std::vector<State> &states, const SearchBudget &budget,
                                 std::uint64_t seed);

EvalSummary summarize(const std::vector<EvalRecord> &records);

std::string to_jsonl(const std::vector<EvalRecord> &records);
std::vector<EvalRecord> parse_jsonl(const std::string &text);

struct GridSpec {
    std::vector<int> num_train{10000, 100000};
    std::vector<double> random_percent{0, 50};
    std::vector<int> num_rollouts{1, 5};
    std::vector<int> length{50, 500};
    SelectionMode mode = SelectionMode::Novelty;
    std::size_t eval_states = 10;

    // Cartesian product in N_t, P_r, N_r, L order (L varies fastest).
    std::vector<RslConfig> expand(std::uint64_t master_seed) const;
};

// Command-line entry points; each returns a process exit code.
struct GroundCommand {
    std::filesystem::path domain;
    std::filesystem::path problem;
    std::filesystem::path out;
};
int cmd_ground(const GroundCommand &cmd);

struct TrainCommand {
    std::filesystem::path task;
    RslConfig rsl;
    nn::TrainConfig train;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    bool dump_rollouts = false;
};
int cmd_train(const TrainCommand &cmd);

struct EvalCommand {
    std::filesystem::path task;
    std::optional<std::filesystem::path> model;
    std::string heuristic = "nn";
    SearchBudget budget;
    EvalStateSpec states;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    std::string instance;   // defaults to the task file stem
    int jobs = 1;
};
int cmd_eval(const EvalCommand &cmd);

struct GridCommand {
    std::filesystem::path task;
    GridSpec grid;
    nn::TrainConfig train;
    std::optional<double> completion_density;
    SearchBudget budget;
    int walk_steps = 200;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    int jobs = 1;
};
int cmd_grid(const GridCommand &cmd);

struct ValidateSelectCommand {
    std::filesystem::path task;
    int k = 10;
    RslConfig rsl;
    nn::TrainConfig train;
    EvalStateSpec validation_states{10, 200};
    SearchBudget budget;
    std::uint64_t seed = 0;
    std::filesystem::path out;
    int jobs = 1;
};
int cmd_validate_select(const ValidateSelectCommand &cmd);

struct ReportCommand {
    std::filesystem::path results_dir;
    std::filesystem::path out;
};
int cmd_report(const ReportCommand &cmd);

// Runs fn(0..count-1) on up to `jobs` worker threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)> &fn);
}

#endif
