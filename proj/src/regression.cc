#include "rsl/regression.h"

#include "json.hpp"

#include <algorithm>

using namespace std;

namespace rsl {
string to_string(SelectionMode mode) {
    return mode == SelectionMode::Novelty ? "novelty" : "random";
}

SelectionMode parse_selection_mode(const string &text) {
    if (text == "novelty" || text == "n-rsl")
        return SelectionMode::Novelty;
    if (text == "random" || text == "rsl")
        return SelectionMode::Random;
    throw invalid_argument("unknown selection mode '" + text + "'");
}

AtomSet e_del(const GroundAction &a, const MutexTable &mutexes) {
    AtomSet result(mutexes.num_atoms());
    a.pre.for_each([&](AtomId p) {result |= mutexes.row(p);});
    result.subtract(a.add);
    return result;
}

RegressionContext::RegressionContext(const TaskBundle &bundle)
    : bundle_(bundle) {
    const GroundTask &task = bundle.task;
    extended_deletes.reserve(task.num_actions());
    achievers.assign(task.num_atoms(), AtomSet(task.num_actions()));
    for (ActionId id = 0; id < task.num_actions(); ++id) {
        const GroundAction &a = task.action(id);
        extended_deletes.push_back(rsl::e_del(a, bundle.mutexes));
        a.add.for_each([&](AtomId p) {achievers[p].set(id);});
    }
}

vector<ActionId> RegressionContext::valid_actions(const PreImage &x,
                                                  RegressionCounters *counters) const {
    const GroundTask &task = bundle_.task;
    AtomSet candidates(task.num_actions());
    x.assigned.for_each([&](AtomId p) {candidates |= achievers[p];});
    if (counters)
        counters->candidates_examined += candidates.count();

    vector<ActionId> result;
    candidates.for_each([&](ActionId id) {
        const GroundAction &a = task.action(id);
        if (!bundle_.reachable.contains(id) ||
            x.assigned.intersects(extended_deletes[id]) ||
            x.assigned.intersects(a.del))
            return;
        if (bundle_.mutexes.has_violation(regress(x, a).assigned))
            return;
        result.push_back(id);
    });
    return result;
}

vector<ActionId> valid_regression_actions(const PreImage &x, const TaskBundle &bundle) {
    return RegressionContext(bundle).valid_actions(x);
}

size_t novelty_mu_plus(const GroundAction &a, const AtomSet &traj_union) {
    return a.pre.count_difference(traj_union);
}

ActionId select_action(const GroundTask &task, const AtomSet &traj_union,
                       span<const ActionId> candidates, SelectionMode mode, Rng &rng) {
    if (candidates.empty())
        throw EmptyCandidates();
    if (mode == SelectionMode::Random)
        return candidates[rng.uniform_index(candidates.size())];

    vector<ActionId> best;
    size_t best_value = 0;
    for (ActionId id : candidates) {
        size_t value = novelty_mu_plus(task.action(id), traj_union);
        if (best.empty() || value > best_value) {
            best.assign(1, id);
            best_value = value;
        } else if (value == best_value) {
            best.push_back(id);
        }
    }
    return best[rng.uniform_index(best.size())];
}

Rollout rollout(const RegressionContext &context, int length, SelectionMode mode, Rng &rng,
                RegressionCounters *counters) {
    if (length < 1)
        throw invalid_argument("rollout length must be at least 1");
    const GroundTask &task = context.task();
    Rollout result;
    result.preimages.push_back(PreImage{task.goal()});
    AtomSet traj_union = task.goal();
    for (int step = 0; step < length; ++step) {
        const PreImage &x = result.preimages.back();
        vector<ActionId> candidates = context.valid_actions(x, counters);
        if (candidates.empty()) {
            result.terminated_early = true;
            break;
        }
        ActionId chosen = select_action(task, traj_union, candidates, mode, rng);
        PreImage next = regress(x, task.action(chosen));
        traj_union |= next.assigned;
        result.actions.push_back(chosen);
        result.preimages.push_back(move(next));
        if (counters)
            ++counters->steps;
    }
    return result;
}

RegressionSet run_regressions(const RegressionContext &context, int num_rollouts, int length,
                              SelectionMode mode, uint64_t seed, RegressionCounters *counters) {
    if (num_rollouts < 1)
        throw invalid_argument("number of rollouts must be at least 1");
    RegressionSet set;
    set.num_rollouts = num_rollouts;
    set.length = length;
    set.mode = mode;
    for (int j = 0; j < num_rollouts; ++j) {
        Rng rng(derive_seed(seed, "rollout", static_cast<uint64_t>(j)));
        set.rollouts.push_back(rollout(context, length, mode, rng, counters));
    }
    return set;
}

string rollouts_to_json(const RegressionSet &set) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const Rollout &r : set.rollouts) {
        nlohmann::ordered_json entry;
        nlohmann::ordered_json preimages = nlohmann::ordered_json::array();
        for (const PreImage &x : r.preimages)
            preimages.push_back(x.assigned.ids());
        entry["preimages"] = move(preimages);
        entry["actions"] = r.actions;
        entry["terminated_early"] = r.terminated_early;
        doc.push_back(move(entry));
    }
    return doc.dump() + "\n";
}
}
