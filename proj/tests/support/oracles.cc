#include "oracles.h"

#include "rsl/pddl.h"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>

using namespace std;

namespace rsl::testing {
filesystem::path fixture_path(const string &name) {
    return filesystem::path(RSL_FIXTURE_DIR) / name;
}

TaskBundle load_fixture(const string &name) {
    if (name == "chain")
        return load_ground_task(fixture_path("chain.json"));
    string domain;
    if (name.rfind("blocksworld", 0) == 0)
        domain = "blocksworld-domain.pddl";
    else if (name.rfind("gripper", 0) == 0)
        domain = "gripper-domain.pddl";
    else
        throw invalid_argument("unknown fixture " + name);
    pddl::LiftedTask lifted = pddl::parse_pddl(read_file(fixture_path(domain)),
                                               read_file(fixture_path(name + ".pddl")));
    return analyze_task(pddl::ground(lifted));
}

IdSet to_ids(const AtomSet &s) {
    vector<AtomId> ids = s.ids();
    return IdSet(ids.begin(), ids.end());
}

namespace {
bool disjoint(const IdSet &a, const IdSet &b) {
    for (AtomId p : a)
        if (b.count(p))
            return false;
    return true;
}
}

vector<ActionId> naive_valid_actions(const PreImage &x, const TaskBundle &bundle) {
    const GroundTask &task = bundle.task;
    IdSet xs = to_ids(x.assigned);
    vector<ActionId> result;
    for (ActionId id = 0; id < task.num_actions(); ++id) {
        const GroundAction &a = task.action(id);
        IdSet pre = to_ids(a.pre), add = to_ids(a.add), del = to_ids(a.del);
        if (!bundle.reachable.contains(id))
            continue;
        IdSet edel;
        for (AtomId q = 0; q < task.num_atoms(); ++q) {
            if (add.count(q))
                continue;
            for (AtomId p : pre)
                if (bundle.mutexes.is_mutex(p, q))
                    edel.insert(q);
        }
        if (!disjoint(xs, edel))
            continue;
        if (!disjoint(xs, del))
            continue;
        if (disjoint(xs, add))
            continue;
        IdSet next;
        for (AtomId p : xs)
            if (!add.count(p))
                next.insert(p);
        next.insert(pre.begin(), pre.end());
        bool clean = true;
        for (AtomId p : next)
            for (AtomId q : next)
                if (p < q && bundle.mutexes.is_mutex(p, q))
                    clean = false;
        if (clean)
            result.push_back(id);
    }
    return result;
}

vector<State> enumerate_states(const GroundTask &task, const State &start, size_t cap) {
    set<vector<AtomId>> seen{start.atoms.ids()};
    vector<State> states{start};
    for (size_t head = 0; head < states.size(); ++head) {
        State s = states[head];
        for (const GroundAction &a : task.actions()) {
            if (!a.pre.is_subset_of(s.atoms))
                continue;
            IdSet next = to_ids(s.atoms);
            for (AtomId p : a.del.ids())
                next.erase(p);
            for (AtomId p : a.add.ids())
                next.insert(p);
            vector<AtomId> key(next.begin(), next.end());
            if (seen.insert(key).second) {
                states.push_back(task.make_state(key));
                if (states.size() > cap)
                    throw runtime_error("state space too large for the oracle");
            }
        }
    }
    return states;
}

vector<ActionId> brute_relaxed_reachable(const GroundTask &task) {
    IdSet known = to_ids(task.init());
    set<ActionId> reached;
    bool changed = true;
    while (changed) {
        changed = false;
        for (ActionId id = 0; id < task.num_actions(); ++id) {
            if (reached.count(id))
                continue;
            IdSet pre = to_ids(task.action(id).pre);
            if (!includes(known.begin(), known.end(), pre.begin(), pre.end()))
                continue;
            reached.insert(id);
            for (AtomId p : task.action(id).add.ids())
                known.insert(p);
            changed = true;
        }
    }
    return {reached.begin(), reached.end()};
}

TaskBundle random_task(Rng &rng, size_t num_atoms, size_t num_actions) {
    vector<string> names;
    for (size_t i = 0; i < num_atoms; ++i)
        names.push_back("p" + std::to_string(i));
    auto subset = [&](double density) {
        vector<AtomId> ids;
        for (AtomId p = 0; p < num_atoms; ++p)
            if (rng.bernoulli(density))
                ids.push_back(p);
        return ids;
    };
    vector<RawAction> actions;
    for (size_t i = 0; i < num_actions; ++i) {
        RawAction a{"a" + std::to_string(i), subset(0.25), subset(0.2), subset(0.25)};
        if (a.add.empty())
            a.add.push_back(static_cast<AtomId>(rng.uniform_index(num_atoms)));
        actions.push_back(move(a));
    }
    vector<AtomId> init = subset(0.4);
    vector<AtomId> goal = subset(0.3);
    if (goal.empty())
        goal.push_back(static_cast<AtomId>(rng.uniform_index(num_atoms)));
    return analyze_task(GroundTask::build(names, actions, init, goal));
}

double naive_h_add(const State &s, const GroundTask &task, const ReachableActions &reachable) {
    const double inf = numeric_limits<double>::infinity();
    vector<double> cost(task.num_atoms(), inf);
    for (AtomId p : s.atoms.ids())
        cost[p] = 0.0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (ActionId id = 0; id < task.num_actions(); ++id) {
            if (!reachable.contains(id))
                continue;
            double c = 1.0;
            for (AtomId p : task.action(id).pre.ids())
                c += cost[p];
            for (AtomId q : task.action(id).add.ids())
                if (c < cost[q]) {
                    cost[q] = c;
                    changed = true;
                }
        }
    }
    double total = 0.0;
    for (AtomId g : task.goal().ids())
        total += cost[g];
    return total;
}

namespace {
vector<double> dense(const nn::DenseLayer &layer, const vector<double> &in, bool relu) {
    vector<double> out(static_cast<size_t>(layer.weights.rows()));
    for (size_t r = 0; r < out.size(); ++r) {
        double sum = layer.biases(static_cast<long>(r));
        for (size_t c = 0; c < in.size(); ++c)
            sum += layer.weights(static_cast<long>(r), static_cast<long>(c)) * in[c];
        out[r] = relu && sum < 0.0 ? 0.0 : sum;
    }
    return out;
}
}

double straight_line_forward(const nn::HeuristicModel &model, const AtomSet &input) {
    vector<double> x(input.width(), 0.0);
    for (AtomId p : input.ids())
        x[p] = 1.0;
    vector<double> h1 = dense(model.layers[0], x, true);
    vector<double> h2 = dense(model.layers[1], h1, true);
    vector<double> r1 = dense(model.layers[2], h2, true);
    vector<double> r2 = dense(model.layers[3], r1, true);
    for (size_t i = 0; i < r2.size(); ++i)
        r2[i] += h2[i];
    return dense(model.layers[4], r2, false)[0];
}

int naive_label(const State &s, const RegressionSet &regressions) {
    int best = regressions.length + 1;
    for (const Rollout &r : regressions.rollouts)
        for (size_t i = 0; i < r.preimages.size(); ++i) {
            IdSet x = to_ids(r.preimages[i].assigned);
            IdSet ss = to_ids(s.atoms);
            if (includes(ss.begin(), ss.end(), x.begin(), x.end()))
                best = min(best, static_cast<int>(i));
        }
    return best;
}

int replay_to_goal(const GroundTask &task, const Rollout &rollout, size_t index, State s) {
    for (size_t step = 0; step <= index; ++step) {
        if (is_goal(s, task))
            return static_cast<int>(step);
        if (step == index)
            break;
        const GroundAction &a = task.action(rollout.actions[index - 1 - step]);
        if (!a.pre.is_subset_of(s.atoms))
            return -1;
        s = apply_action(s, a);
    }
    return -1;
}
}
