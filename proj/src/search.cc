#include "rsl/search.h"

#include <chrono>
#include <deque>
#include <queue>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

using namespace std;

namespace rsl {
void SearchBudget::validate() const {
    if (!max_expansions && !time_limit_sec && !max_records)
        throw invalid_argument("search budget needs at least one finite limit");
}

string to_string(SearchStatus status) {
    switch (status) {
    case SearchStatus::Solved:
        return "solved";
    case SearchStatus::Exhausted:
        return "exhausted";
    case SearchStatus::BudgetExceeded:
        return "budget-exceeded";
    }
    return "unknown";
}

namespace {
struct SearchNode {
    State state;
    int parent;
    ActionId action;
};

vector<ActionId> extract_plan(const vector<SearchNode> &nodes, int id) {
    vector<ActionId> plan;
    while (nodes[id].parent >= 0) {
        plan.push_back(nodes[id].action);
        id = nodes[id].parent;
    }
    return {plan.rbegin(), plan.rend()};
}
}

SearchResult gbfs(const GroundTask &task, const State &start, const HeuristicFn &heuristic,
                  const SearchBudget &budget) {
    budget.validate();
    if (start.atoms.width() != task.num_atoms())
        throw invalid_argument("start state width does not match the task");
    using Clock = chrono::steady_clock;
    const auto started = Clock::now();
    SearchResult result;
    auto finish = [&](SearchStatus status) {
        result.status = status;
        result.elapsed_sec = chrono::duration<double>(Clock::now() - started).count();
        return result;
    };

    if (is_goal(start, task)) {
        result.plan = vector<ActionId>{};
        return finish(SearchStatus::Solved);
    }

    vector<SearchNode> nodes;
    unordered_set<AtomSet, AtomSetHash> seen;
    // (h, insertion sequence, node id); the sequence breaks ties FIFO.
    using Entry = tuple<double, uint64_t, int>;
    priority_queue<Entry, vector<Entry>, greater<>> open;
    uint64_t sequence = 0;

    double h0 = heuristic(start);
    ++result.evaluations;
    nodes.push_back({start, -1, 0});
    seen.insert(start.atoms);
    if (h0 == infinite_cost)
        return finish(SearchStatus::Exhausted);
    open.emplace(h0, sequence++, 0);

    while (!open.empty()) {
        if (budget.max_expansions && result.expansions >= *budget.max_expansions)
            return finish(SearchStatus::BudgetExceeded);
        if (budget.time_limit_sec &&
            chrono::duration<double>(Clock::now() - started).count() >= *budget.time_limit_sec)
            return finish(SearchStatus::BudgetExceeded);
        if (budget.max_records && nodes.size() >= *budget.max_records)
            return finish(SearchStatus::BudgetExceeded);

        int id = get<2>(open.top());
        open.pop();
        ++result.expansions;
        const State current = nodes[id].state;
        for (ActionId a : applicable_actions(current, task)) {
            State succ = apply_action(current, task.action(a));
            if (!seen.insert(succ.atoms).second)
                continue;
            int succ_id = static_cast<int>(nodes.size());
            nodes.push_back({succ, id, a});
            if (is_goal(succ, task)) {
                result.plan = extract_plan(nodes, succ_id);
                if (!validate_plan(task, start, *result.plan))
                    throw logic_error("search produced an invalid plan");
                return finish(SearchStatus::Solved);
            }
            double h = heuristic(succ);
            ++result.evaluations;
            if (h == infinite_cost)
                continue;
            open.emplace(h, sequence++, succ_id);
        }
    }
    return finish(SearchStatus::Exhausted);
}

double goal_count_h(const State &s, const GroundTask &task) {
    return static_cast<double>(task.goal().count_difference(s.atoms));
}

AdditiveHeuristic::AdditiveHeuristic(const GroundTask &task, const ReachableActions *reachable)
    : task(task), consumers(task.num_atoms()) {
    for (ActionId id = 0; id < task.num_actions(); ++id) {
        if (reachable && !reachable->contains(id))
            continue;
        const GroundAction &a = task.action(id);
        size_t index = actions.size();
        actions.push_back(id);
        preconditions.push_back(a.pre.ids());
        effects.push_back(a.add.ids());
        for (AtomId p : preconditions.back())
            consumers[p].push_back(static_cast<ActionId>(index));
    }
}

double AdditiveHeuristic::operator()(const State &s) const {
    const size_t n = task.num_atoms();
    vector<double> cost(n, infinite_cost);
    vector<size_t> unsatisfied(actions.size());
    using Entry = pair<double, AtomId>;
    priority_queue<Entry, vector<Entry>, greater<>> queue;

    auto fire = [&](size_t index) {
        double c = 1.0;
        for (AtomId p : preconditions[index])
            c += cost[p];
        for (AtomId q : effects[index]) {
            if (c < cost[q]) {
                cost[q] = c;
                queue.emplace(c, q);
            }
        }
    };

    s.atoms.for_each([&](AtomId p) {
        cost[p] = 0.0;
        queue.emplace(0.0, p);
    });
    for (size_t i = 0; i < actions.size(); ++i) {
        unsatisfied[i] = preconditions[i].size();
        if (unsatisfied[i] == 0)
            fire(i);
    }
    vector<bool> done(n, false);
    while (!queue.empty()) {
        auto [c, p] = queue.top();
        queue.pop();
        if (done[p] || c > cost[p])
            continue;
        done[p] = true;
        for (ActionId index : consumers[p])
            if (--unsatisfied[index] == 0)
                fire(index);
    }

    double total = 0.0;
    bool dead_end = false;
    task.goal().for_each([&](AtomId g) {
        if (cost[g] == infinite_cost)
            dead_end = true;
        else
            total += cost[g];
    });
    return dead_end ? infinite_cost : total;
}

double h_add(const State &s, const GroundTask &task, const ReachableActions &reachable) {
    return AdditiveHeuristic(task, &reachable)(s);
}

optional<int> exact_distance(const GroundTask &task, const State &s, size_t state_cap) {
    if (is_goal(s, task))
        return 0;
    unordered_map<AtomSet, int, AtomSetHash> distance;
    deque<AtomSet> frontier;
    distance.emplace(s.atoms, 0);
    frontier.push_back(s.atoms);
    while (!frontier.empty()) {
        State current{frontier.front()};
        frontier.pop_front();
        int d = distance.at(current.atoms);
        for (ActionId a : applicable_actions(current, task)) {
            State succ = apply_action(current, task.action(a));
            if (distance.count(succ.atoms))
                continue;
            if (is_goal(succ, task))
                return d + 1;
            if (distance.size() >= state_cap)
                throw StateSpaceCapExceeded("forward state space exceeds " +
                                            std::to_string(state_cap) + " states");
            distance.emplace(succ.atoms, d + 1);
            frontier.push_back(move(succ.atoms));
        }
    }
    return nullopt;
}

vector<RandomWalk> random_walks(const GroundTask &task, size_t count, int steps, Rng &rng) {
    if (steps < 0)
        throw invalid_argument("random walk length must be non-negative");
    vector<RandomWalk> walks;
    walks.reserve(count);
    for (size_t k = 0; k < count; ++k) {
        RandomWalk walk{{}, task.initial_state()};
        for (int step = 0; step < steps; ++step) {
            vector<ActionId> applicable = applicable_actions(walk.end, task);
            if (applicable.empty())
                break;
            ActionId a = applicable[rng.uniform_index(applicable.size())];
            walk.end = apply_action(walk.end, task.action(a));
            walk.actions.push_back(a);
        }
        walks.push_back(move(walk));
    }
    return walks;
}

vector<State> random_walk_states(const GroundTask &task, size_t count, int steps, Rng &rng) {
    vector<State> states;
    for (RandomWalk &walk : random_walks(task, count, steps, rng))
        states.push_back(move(walk.end));
    return states;
}

bool validate_plan(const GroundTask &task, const State &start, span<const ActionId> plan) {
    State s = start;
    for (ActionId a : plan) {
        if (a >= task.num_actions() || !task.action(a).pre.is_subset_of(s.atoms))
            return false;
        s = apply_action(s, task.action(a));
    }
    return is_goal(s, task);
}

double coverage(span<const SearchResult> results) {
    if (results.empty())
        throw invalid_argument("coverage of an empty result list");
    size_t solved = 0;
    for (const SearchResult &r : results)
        solved += r.solved();
    return 100.0 * static_cast<double>(solved) / static_cast<double>(results.size());
}
}
