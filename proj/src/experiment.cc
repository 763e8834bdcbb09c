#include "rsl/experiment.h"

#include "rsl/pddl.h"
#include "rsl/sha256.h"

#include "json.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

using namespace std;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace rsl::experiment {
bool within_lookahead_bound(const RunCounters &counters, const RslConfig &config,
                            size_t num_actions) {
    uint64_t bound = static_cast<uint64_t>(config.num_rollouts) *
                     static_cast<uint64_t>(config.length) * num_actions;
    return counters.regression.candidates_examined <= bound;
}

bool within_membership_bound(const RunCounters &counters, const RslConfig &config) {
    uint64_t per_state = static_cast<uint64_t>(config.num_rollouts) * config.length +
                         static_cast<uint64_t>(config.num_rollouts);
    return counters.sampling.subset_tests <= static_cast<uint64_t>(config.num_train) * per_state;
}

RslRun build_training_set(const TaskBundle &bundle, const RslConfig &config) {
    config.validate();
    RslRun run;
    RegressionContext context(bundle);
    run.regressions = run_regressions(context, config.num_rollouts, config.length, config.mode,
                                      derive_seed(config.seed, "regression"),
                                      &run.counters.regression);
    run.dataset = sample_states(run.regressions, bundle, config, &run.counters.sampling);
    return run;
}

RslRun run_rsl(const TaskBundle &bundle, const RslConfig &config, const nn::TrainConfig &train) {
    train.validate();
    RslRun run = build_training_set(bundle, config);
    nn::HeuristicModel model = nn::init_model(bundle.task.num_atoms(), train.seed);
    run.training = nn::train(move(model), run.dataset, train);
    return run;
}

SeedPlan SeedPlan::from(uint64_t seed) {
    return SeedPlan{derive_seed(seed, "rsl"), derive_seed(seed, "train"),
                    derive_seed(seed, "validation-states"), derive_seed(seed, "eval-states")};
}

optional<double> median(vector<double> values) {
    if (values.empty())
        return nullopt;
    sort(values.begin(), values.end());
    size_t mid = values.size() / 2;
    if (values.size() % 2)
        return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

HeuristicFn make_heuristic(const string &name, const TaskBundle &bundle,
                           const nn::HeuristicModel *model) {
    const GroundTask &task = bundle.task;
    if (name == "nn") {
        if (!model)
            throw invalid_argument("heuristic 'nn' requires a model");
        if (model->num_atoms() != task.num_atoms())
            throw nn::DimensionMismatch("model expects " + std::to_string(model->num_atoms()) +
                                        " atoms but the task has " +
                                        std::to_string(task.num_atoms()));
        return [model](const State &s) {return nn::heuristic_value(*model, s);};
    }
    if (name == "goal-count")
        return [&task](const State &s) {return goal_count_h(s, task);};
    if (name == "h-add") {
        auto h = make_shared<AdditiveHeuristic>(task, &bundle.reachable);
        return [h](const State &s) {return (*h)(s);};
    }
    if (name == "blind")
        return [&task](const State &s) {return is_goal(s, task) ? 0.0 : 1.0;};
    throw invalid_argument("unknown heuristic '" + name + "'");
}

vector<EvalRecord> evaluate(const TaskBundle &bundle, const string &instance,
                            const string &heuristic_name, const HeuristicFn &heuristic,
                            const vector<State> &states, const SearchBudget &budget,
                            uint64_t seed) {
    vector<EvalRecord> records;
    for (size_t i = 0; i < states.size(); ++i) {
        EvalRecord record{instance, i, heuristic_name, seed, bundle.task.num_atoms(),
                          gbfs(bundle.task, states[i], heuristic, budget)};
        spdlog::debug("{} state {}: {} after {} expansions", heuristic_name, i,
                      to_string(record.result.status), record.result.expansions);
        records.push_back(move(record));
    }
    return records;
}

EvalSummary summarize(const vector<EvalRecord> &records) {
    EvalSummary summary;
    summary.total = records.size();
    vector<double> expansions;
    vector<double> lengths;
    for (const EvalRecord &r : records) {
        if (!r.result.solved())
            continue;
        ++summary.solved;
        expansions.push_back(static_cast<double>(r.result.expansions));
        lengths.push_back(static_cast<double>(r.result.plan_length()));
    }
    if (summary.total > 0)
        summary.coverage = 100.0 * static_cast<double>(summary.solved) /
                           static_cast<double>(summary.total);
    summary.median_expansions = median(expansions);
    summary.median_plan_length = median(lengths);
    return summary;
}

namespace {
json optional_json(const optional<double> &value) {
    return value ? json(*value) : json(nullptr);
}

json summary_json(const EvalSummary &s) {
    json doc;
    doc["total"] = s.total;
    doc["solved"] = s.solved;
    doc["coverage"] = s.coverage;
    doc["median_expansions"] = optional_json(s.median_expansions);
    doc["median_plan_length"] = optional_json(s.median_plan_length);
    return doc;
}

json rsl_config_json(const RslConfig &c) {
    json doc;
    doc["n_r"] = c.num_rollouts;
    doc["l"] = c.length;
    doc["n_t"] = c.num_train;
    doc["p_r"] = c.random_percent;
    doc["mode"] = to_string(c.mode);
    doc["seed"] = c.seed;
    doc["completion_density"] = optional_json(c.completion_density);
    return doc;
}

json train_config_json(const nn::TrainConfig &c) {
    json doc;
    doc["learning_rate"] = c.learning_rate;
    doc["batch_size"] = c.batch_size;
    doc["max_epochs"] = c.max_epochs;
    doc["patience"] = c.patience;
    doc["beta1"] = c.beta1;
    doc["beta2"] = c.beta2;
    doc["epsilon"] = c.epsilon;
    doc["seed"] = c.seed;
    return doc;
}

json budget_json(const SearchBudget &b) {
    json doc;
    doc["max_expansions"] = b.max_expansions ? json(*b.max_expansions) : json(nullptr);
    doc["time_limit_sec"] = optional_json(b.time_limit_sec);
    doc["max_records"] = b.max_records ? json(*b.max_records) : json(nullptr);
    return doc;
}

json history_json(const nn::TrainHistory &h) {
    json doc;
    json epochs = json::array();
    for (const nn::EpochStats &e : h.epochs)
        epochs.push_back({{"train_mse", e.train_mse}, {"validation_mse", e.validation_mse}});
    doc["epochs"] = move(epochs);
    doc["best_epoch"] = h.best_epoch;
    doc["stop_reason"] = nn::to_string(h.stop_reason);
    doc["config"] = train_config_json(h.config);
    return doc;
}

json counters_json(const RunCounters &c, const RslConfig &config, size_t num_actions) {
    json doc;
    doc["candidates_examined"] = c.regression.candidates_examined;
    doc["regression_steps"] = c.regression.steps;
    doc["subset_tests"] = c.sampling.subset_tests;
    doc["lookahead_bound_ok"] = within_lookahead_bound(c, config, num_actions);
    doc["membership_bound_ok"] = within_membership_bound(c, config);
    return doc;
}

struct LoadedTask {
    TaskBundle bundle;
    string sha256;
};

LoadedTask load_task_with_hash(const fs::path &path) {
    string bytes = read_file(path);
    return LoadedTask{deserialize_ground_task(bytes), sha256_hex(bytes)};
}

json manifest_base(const string &command, const fs::path &task_path, const string &task_sha,
                   const fs::path &out, uint64_t seed) {
    json doc;
    doc["tool_version"] = tool_version;
    doc["command"] = command;
    doc["task_path"] = task_path.string();
    doc["task_sha256"] = task_sha;
    doc["seed"] = seed;
    doc["output_dir"] = out.string();
    return doc;
}

void write_json(const fs::path &path, const json &doc) {
    write_file(path, doc.dump(2) + "\n");
}

void prepare_output_dir(const fs::path &out) {
    if (out.empty())
        throw ConfigError("an output directory is required");
    error_code ec;
    fs::create_directories(out, ec);
    if (ec)
        throw TaskFileError(TaskFileError::Kind::Io,
                            "cannot create " + out.string() + ": " + ec.message());
}

string format_number(double value) {
    ostringstream out;
    out << value;
    return out.str();
}

string format_optional(const optional<double> &value) {
    return value ? format_number(*value) : "";
}

// Writes dataset, sidecar, model, history and counters for one RSL run.
void write_run_outputs(const fs::path &dir, const RslRun &run, const RslConfig &config,
                       const string &task_sha, size_t num_actions) {
    write_file(dir / "dataset.csv", dataset_to_csv(run.dataset));
    write_file(dir / "dataset.json", dataset_sidecar(run.dataset, task_sha, config));
    nn::save_model(run.training.model, dir / "model.rslm");
    write_json(dir / "history.json", history_json(run.training.history));
    write_json(dir / "counters.json", counters_json(run.counters, config, num_actions));
}

template<typename Fn>
int guarded(const char *command, Fn &&fn) {
    try {
        return fn();
    } catch (const nn::NumericalFailure &e) {
        spdlog::error("{}: numerical failure: {}", command, e.what());
        return NumericalError;
    } catch (const exception &e) {
        spdlog::error("{}: {}", command, e.what());
        return InputError;
    }
}

string instance_name(const fs::path &task, const string &given) {
    return given.empty() ? task.stem().string() : given;
}
}

string to_jsonl(const vector<EvalRecord> &records) {
    string out;
    for (const EvalRecord &r : records) {
        json doc;
        doc["instance"] = r.instance;
        doc["state_index"] = r.state_index;
        doc["heuristic_name"] = r.heuristic_name;
        doc["seed"] = r.seed;
        doc["num_atoms"] = r.num_atoms;
        doc["status"] = to_string(r.result.status);
        doc["plan_length"] = r.result.solved() ? json(r.result.plan_length()) : json(nullptr);
        doc["expansions"] = r.result.expansions;
        doc["evaluations"] = r.result.evaluations;
        doc["elapsed_sec"] = r.result.elapsed_sec;
        out += doc.dump();
        out += '\n';
    }
    return out;
}

vector<EvalRecord> parse_jsonl(const string &text) {
    vector<EvalRecord> records;
    istringstream in(text);
    string line;
    while (getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == string::npos)
            continue;
        json doc = json::parse(line);
        EvalRecord r;
        r.instance = doc.value("instance", "");
        r.state_index = doc.value("state_index", size_t{0});
        r.heuristic_name = doc.at("heuristic_name").get<string>();
        r.seed = doc.value("seed", uint64_t{0});
        r.num_atoms = doc.value("num_atoms", size_t{0});
        string status = doc.at("status").get<string>();
        if (status == "solved")
            r.result.status = SearchStatus::Solved;
        else if (status == "exhausted")
            r.result.status = SearchStatus::Exhausted;
        else if (status == "budget-exceeded")
            r.result.status = SearchStatus::BudgetExceeded;
        else
            throw invalid_argument("unknown status '" + status + "'");
        if (r.result.solved()) {
            size_t length = doc.at("plan_length").get<size_t>();
            // Only the length survives serialization.
            r.result.plan = vector<ActionId>(length, 0);
        }
        r.result.expansions = doc.at("expansions").get<uint64_t>();
        r.result.evaluations = doc.at("evaluations").get<uint64_t>();
        r.result.elapsed_sec = doc.at("elapsed_sec").get<double>();
        records.push_back(move(r));
    }
    return records;
}

vector<RslConfig> GridSpec::expand(uint64_t master_seed) const {
    vector<RslConfig> configs;
    for (int nt : num_train)
        for (double pr : random_percent)
            for (int nr : num_rollouts)
                for (int len : length) {
                    RslConfig c;
                    c.num_train = nt;
                    c.random_percent = pr;
                    c.num_rollouts = nr;
                    c.length = len;
                    c.mode = mode;
                    c.seed = derive_seed(master_seed, "grid-config", configs.size());
                    configs.push_back(c);
                }
    return configs;
}

void parallel_for(size_t count, int jobs, const function<void(size_t)> &fn) {
    size_t workers = min<size_t>(count, static_cast<size_t>(max(1, jobs)));
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    atomic<size_t> next{0};
    vector<thread> pool;
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next++; i < count; i = next++)
                fn(i);
        });
    for (thread &t : pool)
        t.join();
}

int cmd_ground(const GroundCommand &cmd) {
    return guarded("ground", [&] {
        string domain = read_file(cmd.domain);
        string problem = read_file(cmd.problem);
        pddl::LiftedTask lifted = pddl::parse_pddl(domain, problem);
        GroundTask::BuildReport report;
        GroundTask task = pddl::ground(lifted, {}, &report);
        TaskBundle bundle = analyze_task(move(task));
        save_ground_task(bundle, cmd.out);
        cout << "atoms: " << bundle.task.num_atoms() << "\n"
             << "actions: " << bundle.task.num_actions() << "\n"
             << "reachable actions: " << bundle.reachable.count() << "\n"
             << "mutex pairs: " << bundle.mutexes.num_pairs() << "\n";
        if (!report.dropped_actions.empty())
            cout << "dropped actions without add effects: " << report.dropped_actions.size()
                 << "\n";
        return static_cast<int>(Success);
    });
}

int cmd_train(const TrainCommand &cmd) {
    return guarded("train", [&] {
        SeedPlan seeds = SeedPlan::from(cmd.seed);
        RslConfig rsl = cmd.rsl;
        rsl.seed = seeds.rsl;
        nn::TrainConfig train = cmd.train;
        train.seed = seeds.train;
        rsl.validate();
        train.validate();

        LoadedTask loaded = load_task_with_hash(cmd.task);
        prepare_output_dir(cmd.out);
        json manifest = manifest_base("train", cmd.task, loaded.sha256, cmd.out, cmd.seed);
        manifest["rsl_config"] = rsl_config_json(rsl);
        manifest["train_config"] = train_config_json(train);
        write_json(cmd.out / "manifest.json", manifest);

        RslRun run = run_rsl(loaded.bundle, rsl, train);
        write_run_outputs(cmd.out, run, rsl, loaded.sha256, loaded.bundle.task.num_actions());
        if (cmd.dump_rollouts)
            write_file(cmd.out / "rollouts.json", rollouts_to_json(run.regressions));

        const nn::TrainHistory &h = run.training.history;
        const nn::EpochStats &best = h.epochs.at(h.best_epoch);
        cout << "records: " << run.dataset.records.size() << " (validation "
             << run.dataset.num_validation() << ")\n"
             << "epochs: " << h.epochs.size() << ", best epoch " << h.best_epoch
             << ", stop: " << nn::to_string(h.stop_reason) << "\n"
             << "best train mse: " << best.train_mse
             << ", validation mse: " << best.validation_mse << "\n"
             << "model sha256: " << sha256_hex(read_file(cmd.out / "model.rslm")) << "\n";
        return static_cast<int>(Success);
    });
}

int cmd_eval(const EvalCommand &cmd) {
    return guarded("eval", [&] {
        cmd.budget.validate();
        LoadedTask loaded = load_task_with_hash(cmd.task);
        optional<nn::HeuristicModel> model;
        if (cmd.heuristic == "nn") {
            if (!cmd.model)
                throw ConfigError("--model is required for the nn heuristic");
            model = nn::load_model(*cmd.model);
        }
        HeuristicFn heuristic =
            make_heuristic(cmd.heuristic, loaded.bundle, model ? &*model : nullptr);

        prepare_output_dir(cmd.out);
        SeedPlan seeds = SeedPlan::from(cmd.seed);
        json manifest = manifest_base("eval", cmd.task, loaded.sha256, cmd.out, cmd.seed);
        manifest["heuristic"] = cmd.heuristic;
        manifest["model"] = cmd.model ? json(cmd.model->string()) : json(nullptr);
        manifest["budget"] = budget_json(cmd.budget);
        manifest["eval_states"] = {{"count", cmd.states.count},
                                   {"walk_steps", cmd.states.walk_steps},
                                   {"seed", seeds.eval_states}};
        write_json(cmd.out / "manifest.json", manifest);

        Rng rng(seeds.eval_states);
        vector<State> states = random_walk_states(loaded.bundle.task, cmd.states.count,
                                                  cmd.states.walk_steps, rng);
        string instance = instance_name(cmd.task, cmd.instance);
        vector<vector<EvalRecord>> parts(states.size());
        parallel_for(states.size(), cmd.jobs, [&](size_t i) {
            parts[i] = evaluate(loaded.bundle, instance, cmd.heuristic, heuristic, {states[i]},
                                cmd.budget, cmd.seed);
            parts[i][0].state_index = i;
        });
        vector<EvalRecord> records;
        for (auto &part : parts)
            records.push_back(move(part[0]));

        write_file(cmd.out / "results.jsonl", to_jsonl(records));
        EvalSummary summary = summarize(records);
        json summary_doc = summary_json(summary);
        summary_doc["heuristic"] = cmd.heuristic;
        write_json(cmd.out / "summary.json", summary_doc);
        cout << "coverage: " << summary.coverage << "% (" << summary.solved << "/"
             << summary.total << ")\n"
             << "median expansions: " << format_optional(summary.median_expansions) << "\n"
             << "median plan length: " << format_optional(summary.median_plan_length) << "\n";
        return static_cast<int>(Success);
    });
}

int cmd_grid(const GridCommand &cmd) {
    return guarded("grid", [&] {
        cmd.budget.validate();
        cmd.train.validate();
        if (cmd.grid.num_train.empty() || cmd.grid.random_percent.empty() ||
            cmd.grid.num_rollouts.empty() || cmd.grid.length.empty())
            throw ConfigError("every grid dimension needs at least one value");
        vector<RslConfig> configs = cmd.grid.expand(cmd.seed);
        for (RslConfig &c : configs) {
            c.completion_density = cmd.completion_density;
            c.validate();
        }

        LoadedTask loaded = load_task_with_hash(cmd.task);
        prepare_output_dir(cmd.out);
        SeedPlan seeds = SeedPlan::from(cmd.seed);
        json manifest = manifest_base("grid", cmd.task, loaded.sha256, cmd.out, cmd.seed);
        json configs_json = json::array();
        for (const RslConfig &c : configs)
            configs_json.push_back(rsl_config_json(c));
        manifest["configs"] = move(configs_json);
        manifest["train_config"] = train_config_json(cmd.train);
        manifest["budget"] = budget_json(cmd.budget);
        manifest["eval_states"] = {{"count", cmd.grid.eval_states},
                                   {"walk_steps", cmd.walk_steps},
                                   {"seed", seeds.eval_states}};
        write_json(cmd.out / "manifest.json", manifest);

        Rng state_rng(seeds.eval_states);
        vector<State> states = random_walk_states(loaded.bundle.task, cmd.grid.eval_states,
                                                  cmd.walk_steps, state_rng);
        string instance = instance_name(cmd.task, "");

        struct Outcome {
            optional<EvalSummary> summary;
            int epochs = 0;
            string error;
        };
        vector<Outcome> outcomes(configs.size());
        parallel_for(configs.size(), cmd.jobs, [&](size_t i) {
            const RslConfig &config = configs[i];
            fs::path dir = cmd.out / ("config_" + std::to_string(i));
            try {
                prepare_output_dir(dir);
                nn::TrainConfig train = cmd.train;
                train.seed = derive_seed(config.seed, "train");
                json sub = manifest_base("grid-config", cmd.task, loaded.sha256, dir, cmd.seed);
                sub["config_index"] = i;
                sub["rsl_config"] = rsl_config_json(config);
                sub["train_config"] = train_config_json(train);
                write_json(dir / "manifest.json", sub);

                RslRun run = run_rsl(loaded.bundle, config, train);
                write_run_outputs(dir, run, config, loaded.sha256,
                                  loaded.bundle.task.num_actions());
                HeuristicFn h = make_heuristic("nn", loaded.bundle, &run.training.model);
                vector<EvalRecord> records = evaluate(loaded.bundle, instance, "nn", h, states,
                                                      cmd.budget, cmd.seed);
                write_file(dir / "results.jsonl", to_jsonl(records));
                outcomes[i].summary = summarize(records);
                outcomes[i].epochs = static_cast<int>(run.training.history.epochs.size());
                spdlog::info("grid config {} coverage {}", i, outcomes[i].summary->coverage);
            } catch (const exception &e) {
                spdlog::error("grid config {} failed: {}", i, e.what());
                outcomes[i].error = e.what();
            }
        });

        string csv = "config_index,n_t,p_r,n_r,l,mode,seed,coverage,median_expansions,"
                     "median_plan_length,epochs\n";
        string failures = "config_index,error\n";
        size_t num_failures = 0;
        for (size_t i = 0; i < configs.size(); ++i) {
            const RslConfig &c = configs[i];
            const Outcome &o = outcomes[i];
            if (!o.summary) {
                ++num_failures;
                string message = o.error;
                replace(message.begin(), message.end(), ',', ';');
                replace(message.begin(), message.end(), '\n', ' ');
                failures += std::to_string(i) + "," + message + "\n";
                continue;
            }
            csv += std::to_string(i) + "," + std::to_string(c.num_train) + "," +
                   format_number(c.random_percent) + "," + std::to_string(c.num_rollouts) + "," +
                   std::to_string(c.length) + "," + to_string(c.mode) + "," +
                   std::to_string(c.seed) + "," + format_number(o.summary->coverage) + "," +
                   format_optional(o.summary->median_expansions) + "," +
                   format_optional(o.summary->median_plan_length) + "," +
                   std::to_string(o.epochs) + "\n";
        }
        write_file(cmd.out / "grid.csv", csv);
        if (num_failures > 0)
            write_file(cmd.out / "grid_failures.csv", failures);
        cout << "configurations: " << configs.size() << ", failed: " << num_failures << "\n";
        return static_cast<int>(Success);
    });
}

int cmd_validate_select(const ValidateSelectCommand &cmd) {
    return guarded("validate-select", [&] {
        if (cmd.k < 1)
            throw ConfigError("k must be at least 1");
        cmd.budget.validate();
        cmd.rsl.validate();
        cmd.train.validate();
        LoadedTask loaded = load_task_with_hash(cmd.task);
        prepare_output_dir(cmd.out);
        SeedPlan master = SeedPlan::from(cmd.seed);
        json manifest = manifest_base("validate-select", cmd.task, loaded.sha256, cmd.out,
                                      cmd.seed);
        manifest["k"] = cmd.k;
        manifest["rsl_config"] = rsl_config_json(cmd.rsl);
        manifest["train_config"] = train_config_json(cmd.train);
        manifest["budget"] = budget_json(cmd.budget);
        manifest["validation_states"] = {{"count", cmd.validation_states.count},
                                         {"walk_steps", cmd.validation_states.walk_steps},
                                         {"seed", master.validation_states}};
        write_json(cmd.out / "manifest.json", manifest);

        Rng state_rng(master.validation_states);
        vector<State> states = random_walk_states(loaded.bundle.task,
                                                  cmd.validation_states.count,
                                                  cmd.validation_states.walk_steps, state_rng);
        string instance = instance_name(cmd.task, "");

        struct Candidate {
            uint64_t seed = 0;
            fs::path model_path;
            optional<EvalSummary> summary;
            string error;
        };
        vector<Candidate> candidates(cmd.k);
        parallel_for(static_cast<size_t>(cmd.k), cmd.jobs, [&](size_t i) {
            Candidate &c = candidates[i];
            c.seed = cmd.seed + i;
            fs::path dir = cmd.out / ("seed_" + std::to_string(c.seed));
            try {
                prepare_output_dir(dir);
                SeedPlan seeds = SeedPlan::from(c.seed);
                RslConfig rsl = cmd.rsl;
                rsl.seed = seeds.rsl;
                nn::TrainConfig train = cmd.train;
                train.seed = seeds.train;
                json sub = manifest_base("train", cmd.task, loaded.sha256, dir, c.seed);
                sub["rsl_config"] = rsl_config_json(rsl);
                sub["train_config"] = train_config_json(train);
                write_json(dir / "manifest.json", sub);

                RslRun run = run_rsl(loaded.bundle, rsl, train);
                write_run_outputs(dir, run, rsl, loaded.sha256, loaded.bundle.task.num_actions());
                c.model_path = dir / "model.rslm";
                HeuristicFn h = make_heuristic("nn", loaded.bundle, &run.training.model);
                vector<EvalRecord> records = evaluate(loaded.bundle, instance, "nn", h, states,
                                                      cmd.budget, c.seed);
                write_file(dir / "validation_results.jsonl", to_jsonl(records));
                c.summary = summarize(records);
            } catch (const nn::NumericalFailure &e) {
                c.error = e.what();
            } catch (const exception &e) {
                c.error = e.what();
            }
        });

        // Highest coverage, then fewer median expansions, then lower seed.
        const Candidate *chosen = nullptr;
        auto expansions_of = [](const Candidate &c) {
            return c.summary->median_expansions.value_or(numeric_limits<double>::infinity());
        };
        for (const Candidate &c : candidates) {
            if (!c.summary)
                continue;
            if (!chosen || c.summary->coverage > chosen->summary->coverage ||
                (c.summary->coverage == chosen->summary->coverage &&
                 expansions_of(c) < expansions_of(*chosen)))
                chosen = &c;
        }

        json report;
        json entries = json::array();
        for (const Candidate &c : candidates) {
            json entry;
            entry["seed"] = c.seed;
            entry["model"] = c.model_path.string();
            entry["validation"] = c.summary ? summary_json(*c.summary) : json(nullptr);
            entry["error"] = c.error.empty() ? json(nullptr) : json(c.error);
            entries.push_back(move(entry));
        }
        report["candidates"] = move(entries);
        if (!chosen) {
            report["selected"] = nullptr;
            write_json(cmd.out / "selection.json", report);
            throw nn::NumericalFailure("no candidate model trained successfully");
        }
        fs::copy_file(chosen->model_path, cmd.out / "selected_model.rslm",
                      fs::copy_options::overwrite_existing);
        report["selected"] = {{"seed", chosen->seed},
                              {"model", (cmd.out / "selected_model.rslm").string()},
                              {"source_model", chosen->model_path.string()}};
        write_json(cmd.out / "selection.json", report);
        cout << "selected seed " << chosen->seed << " with validation coverage "
             << chosen->summary->coverage << "%\n";
        return static_cast<int>(Success);
    });
}

int cmd_report(const ReportCommand &cmd) {
    return guarded("report", [&] {
        if (!fs::is_directory(cmd.results_dir))
            throw ConfigError("results directory " + cmd.results_dir.string() + " not found");
        vector<fs::path> files;
        for (const auto &entry : fs::recursive_directory_iterator(cmd.results_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
                files.push_back(entry.path());
        sort(files.begin(), files.end());
        vector<EvalRecord> records;
        for (const fs::path &f : files)
            for (EvalRecord &r : parse_jsonl(read_file(f)))
                records.push_back(move(r));
        if (records.empty())
            throw ConfigError("no results found under " + cmd.results_dir.string());

        fs::path out = cmd.out.empty() ? cmd.results_dir / "report" : cmd.out;
        prepare_output_dir(out);

        using Key = tuple<string, uint64_t, size_t>;
        map<string, map<Key, const EvalRecord *>> by_heuristic;
        for (const EvalRecord &r : records)
            by_heuristic[r.heuristic_name][Key{r.instance, r.seed, r.state_index}] = &r;

        string self = "heuristic,total,solved,coverage,median_expansions,median_plan_length\n";
        for (const auto &[name, entries] : by_heuristic) {
            vector<EvalRecord> subset;
            for (const auto &[key, r] : entries)
                subset.push_back(*r);
            EvalSummary s = summarize(subset);
            self += name + "," + std::to_string(s.total) + "," + std::to_string(s.solved) + "," +
                    format_number(s.coverage) + "," + format_optional(s.median_expansions) + "," +
                    format_optional(s.median_plan_length) + "\n";
        }
        write_file(out / "self_summary.csv", self);

        string pair_summary = "heuristic_a,heuristic_b,common_solved,pct_a_fewer_expansions,"
                              "pct_b_fewer_expansions,pct_a_shorter_plan,pct_b_shorter_plan\n";
        size_t num_pairs = 0;
        for (auto a = by_heuristic.begin(); a != by_heuristic.end(); ++a) {
            for (auto b = next(a); b != by_heuristic.end(); ++b) {
                string detail = "instance,seed,state_index,expansions_a,expansions_b,"
                                "plan_length_a,plan_length_b\n";
                size_t common = 0, a_fewer = 0, b_fewer = 0, a_shorter = 0, b_shorter = 0;
                for (const auto &[key, ra] : a->second) {
                    auto it = b->second.find(key);
                    if (it == b->second.end() || !ra->result.solved() || !it->second->result.solved())
                        continue;
                    const EvalRecord *rb = it->second;
                    ++common;
                    a_fewer += ra->result.expansions < rb->result.expansions;
                    b_fewer += rb->result.expansions < ra->result.expansions;
                    a_shorter += ra->result.plan_length() < rb->result.plan_length();
                    b_shorter += rb->result.plan_length() < ra->result.plan_length();
                    detail += get<0>(key) + "," + std::to_string(get<1>(key)) + "," +
                              std::to_string(get<2>(key)) + "," +
                              std::to_string(ra->result.expansions) + "," +
                              std::to_string(rb->result.expansions) + "," +
                              std::to_string(ra->result.plan_length()) + "," +
                              std::to_string(rb->result.plan_length()) + "\n";
                }
                auto pct = [&](size_t n) {
                    return common ? format_number(100.0 * static_cast<double>(n) /
                                                  static_cast<double>(common))
                                  : string("0");
                };
                write_file(out / ("pairwise_" + a->first + "_vs_" + b->first + ".csv"), detail);
                pair_summary += a->first + "," + b->first + "," + std::to_string(common) + "," +
                                pct(a_fewer) + "," + pct(b_fewer) + "," + pct(a_shorter) + "," +
                                pct(b_shorter) + "\n";
                ++num_pairs;
            }
        }
        if (num_pairs > 0)
            write_file(out / "pairwise_summary.csv", pair_summary);

        // Evaluations per second against the number of atoms, per instance.
        map<pair<string, string>, tuple<size_t, uint64_t, double>> rates;
        for (const EvalRecord &r : records) {
            auto &[atoms, evaluations, elapsed] = rates[{r.heuristic_name, r.instance}];
            atoms = r.num_atoms;
            evaluations += r.result.evaluations;
            elapsed += r.result.elapsed_sec;
        }
        string rate_csv = "heuristic,instance,num_atoms,evaluations,elapsed_sec,evals_per_sec\n";
        for (const auto &[key, value] : rates) {
            auto [atoms, evaluations, elapsed] = value;
            rate_csv += key.first + "," + key.second + "," + std::to_string(atoms) + "," +
                        std::to_string(evaluations) + "," + format_number(elapsed) + "," +
                        (elapsed > 0 ? format_number(static_cast<double>(evaluations) / elapsed)
                                     : string("")) +
                        "\n";
        }
        write_file(out / "evals_per_second.csv", rate_csv);
        cout << "results: " << records.size() << " from " << files.size() << " files, "
             << by_heuristic.size() << " heuristics\n";
        return static_cast<int>(Success);
    });
}
}
