#include "rsl/dataset.h"

#include "json.hpp"

#include <cmath>

using namespace std;

namespace rsl {
void RslConfig::validate() const {
    if (num_rollouts < 1)
        throw ConfigError("N_r must be at least 1");
    if (length < 1)
        throw ConfigError("L must be at least 1");
    if (num_train < 1)
        throw ConfigError("N_t must be at least 1");
    if (!(random_percent >= 0.0 && random_percent <= 100.0))
        throw ConfigError("P_r must be within [0, 100]");
    if (completion_density && !(*completion_density >= 0.0 && *completion_density <= 1.0))
        throw ConfigError("completion density must be within [0, 1]");
}

size_t LabeledDataset::num_validation() const {
    size_t n = 0;
    for (const LabeledRecord &r : records)
        n += r.validation;
    return n;
}

double default_completion_density(const GroundTask &task) {
    return static_cast<double>(task.init().count()) / static_cast<double>(task.num_atoms());
}

State repair_mutexes(State s, const PreImage &x, const MutexTable &mutexes, Rng &rng) {
    AtomSet &atoms = s.atoms;
    for (AtomId p = 0; p < atoms.width(); ++p) {
        if (!atoms.test(p))
            continue;
        AtomSet conflicts = mutexes.row(p) & atoms;
        conflicts.for_each([&](AtomId q) {
            if (q < p || !atoms.test(p) || !atoms.test(q))
                return;
            bool keep_p = x.assigned.test(p);
            bool keep_q = x.assigned.test(q);
            if (keep_p && keep_q)
                return;   // x itself is mutex-free by precondition
            if (keep_p)
                atoms.reset(q);
            else if (keep_q)
                atoms.reset(p);
            else if (rng.bernoulli(0.5))
                atoms.reset(p);
            else
                atoms.reset(q);
        });
    }
    return s;
}

State complete_preimage(const PreImage &x, const MutexTable &mutexes, Rng &rng, double density) {
    State s{x.assigned};
    for (AtomId p = 0; p < s.atoms.width(); ++p)
        if (!x.assigned.test(p) && rng.bernoulli(density))
            s.atoms.set(p);
    return repair_mutexes(move(s), x, mutexes, rng);
}

int label_state(const State &s, const RegressionSet &regressions, SamplingCounters *counters) {
    int best = regressions.length + 1;
    uint64_t tests = 0;
    for (const Rollout &r : regressions.rollouts) {
        int limit = min<int>(static_cast<int>(r.preimages.size()), best);
        for (int i = 0; i < limit; ++i) {
            ++tests;
            if (r.preimages[i].assigned.is_subset_of(s.atoms)) {
                best = i;
                break;
            }
        }
    }
    if (counters)
        counters->subset_tests += tests;
    return best;
}

LabeledDataset sample_states(const RegressionSet &regressions, const TaskBundle &bundle,
                             const RslConfig &config, SamplingCounters *counters) {
    config.validate();
    if (regressions.rollouts.empty())
        throw ConfigError("regression set is empty");
    const GroundTask &task = bundle.task;
    double density = config.completion_density.value_or(default_completion_density(task));

    vector<Provenance> slots;
    for (size_t j = 0; j < regressions.rollouts.size(); ++j)
        for (size_t i = 1; i < regressions.rollouts[j].preimages.size(); ++i)
            slots.push_back({static_cast<int>(j), static_cast<int>(i)});
    if (slots.empty()) {
        // Every rollout stopped at the goal; only goal completions remain.
        for (size_t j = 0; j < regressions.rollouts.size(); ++j)
            slots.push_back({static_cast<int>(j), 0});
    }

    size_t num_random = static_cast<size_t>(
        llround(static_cast<double>(config.num_train) * config.random_percent / 100.0));
    Rng rng(derive_seed(config.seed, "sample"));
    LabeledDataset dataset;
    dataset.num_atoms = task.num_atoms();
    dataset.records.reserve(config.num_train);

    const PreImage empty{AtomSet(task.num_atoms())};
    for (size_t k = 0; k < num_random; ++k) {
        State s = complete_preimage(empty, bundle.mutexes, rng, density);
        int label = label_state(s, regressions, counters);
        dataset.records.push_back({move(s), label, false, Provenance{}});
    }
    for (size_t k = num_random; k < static_cast<size_t>(config.num_train); ++k) {
        Provenance slot = slots[rng.uniform_index(slots.size())];
        const PreImage &x = regressions.rollouts[slot.rollout].preimages[slot.index];
        State s = complete_preimage(x, bundle.mutexes, rng, density);
        int label = label_state(s, regressions, counters);
        dataset.records.push_back({move(s), label, false, slot});
    }

    vector<size_t> order(dataset.records.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    Rng split_rng(derive_seed(config.seed, "split"));
    split_rng.shuffle(order);
    size_t num_train = static_cast<size_t>(ceil(0.8 * static_cast<double>(order.size())));
    for (size_t k = num_train; k < order.size(); ++k)
        dataset.records[order[k]].validation = true;
    return dataset;
}

string dataset_to_csv(const LabeledDataset &dataset) {
    string out = "label,bits\n";
    for (const LabeledRecord &r : dataset.records) {
        out += std::to_string(r.label);
        out += ',';
        out += r.state.atoms.to_hex();
        out += '\n';
    }
    return out;
}

string dataset_sidecar(const LabeledDataset &dataset, const string &task_sha256,
                       const RslConfig &config) {
    nlohmann::ordered_json doc;
    doc["format_version"] = 1;
    doc["task_sha256"] = task_sha256;
    nlohmann::ordered_json cfg;
    cfg["n_r"] = config.num_rollouts;
    cfg["l"] = config.length;
    cfg["n_t"] = config.num_train;
    cfg["p_r"] = config.random_percent;
    cfg["mode"] = to_string(config.mode);
    cfg["seed"] = config.seed;
    if (config.completion_density)
        cfg["completion_density"] = *config.completion_density;
    else
        cfg["completion_density"] = nullptr;
    doc["config"] = move(cfg);
    // 0 = train, 1 = validation, per record in file order.
    nlohmann::ordered_json split = nlohmann::ordered_json::array();
    nlohmann::ordered_json provenance = nlohmann::ordered_json::array();
    for (const LabeledRecord &r : dataset.records) {
        split.push_back(r.validation ? 1 : 0);
        if (r.provenance.is_random())
            provenance.push_back(nullptr);
        else
            provenance.push_back({r.provenance.rollout, r.provenance.index});
    }
    doc["split"] = move(split);
    doc["provenance"] = move(provenance);
    return doc.dump() + "\n";
}
}
