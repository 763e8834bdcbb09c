#ifndef RSL_SEARCH_H
#define RSL_SEARCH_H

#include "analysis.h"
#include "rng.h"
#include "strips.h"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsl {
// Heuristic callback; +infinity marks a recognized dead end.
using HeuristicFn = std::function<double(const State &)>;

constexpr double infinite_cost = std::numeric_limits<double>::infinity();

struct SearchBudget {
    std::optional<std::uint64_t> max_expansions;
    std::optional<double> time_limit_sec;
    std::optional<std::size_t> max_records;

    // Throws std::invalid_argument unless at least one limit is set.
    void validate() const;
};

enum class SearchStatus {Solved, Exhausted, BudgetExceeded};
std::string to_string(SearchStatus status);

struct SearchResult {
    SearchStatus status = SearchStatus::Exhausted;
    std::optional<std::vector<ActionId>> plan;
    std::uint64_t expansions = 0;
    std::uint64_t evaluations = 0;
    double elapsed_sec = 0.0;

    bool solved() const {return status == SearchStatus::Solved;}
    std::size_t plan_length() const {return plan ? plan->size() : 0;}
};

/*
  Greedy best-first search ordered by h alone. States are deduplicated on
  generation, successors are goal-tested when generated, and ties on h go to
  the earlier generated node. A successor with infinite h is pruned.
*/
SearchResult gbfs(const GroundTask &task, const State &start, const HeuristicFn &heuristic,
                  const SearchBudget &budget);

// |G \ s|
double goal_count_h(const State &s, const GroundTask &task);

/*
  Additive delete-relaxation heuristic: an atom in s costs 0, otherwise the
  cheapest achiever's 1 + sum of precondition costs; h is the sum over goal
  atoms, +infinity if one is unreachable.
*/
class AdditiveHeuristic {
    const GroundTask &task;
    std::vector<ActionId> actions;
    std::vector<std::vector<AtomId>> preconditions;
    std::vector<std::vector<AtomId>> effects;
    std::vector<std::vector<ActionId>> consumers;   // atom -> actions requiring it

public:
    // With `reachable`, only those actions are considered.
    explicit AdditiveHeuristic(const GroundTask &task,
                               const ReachableActions *reachable = nullptr);
    double operator()(const State &s) const;
};

double h_add(const State &s, const GroundTask &task, const ReachableActions &reachable);

class StateSpaceCapExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr std::size_t default_state_space_cap = 1000000;

// Shortest plan length from s (breadth-first over progression), nullopt if
// no goal state is reachable.
std::optional<int> exact_distance(const GroundTask &task, const State &s,
                                  std::size_t state_cap = default_state_space_cap);

struct RandomWalk {
    std::vector<ActionId> actions;
    State end;
};

// Each walk starts at I and picks uniformly among applicable actions; a dead
// end keeps the walk in place for the remaining steps.
std::vector<RandomWalk> random_walks(const GroundTask &task, std::size_t count, int steps,
                                     Rng &rng);
std::vector<State> random_walk_states(const GroundTask &task, std::size_t count, int steps,
                                      Rng &rng);

bool validate_plan(const GroundTask &task, const State &start, std::span<const ActionId> plan);

// 100 * solved / total; throws std::invalid_argument on an empty list.
double coverage(std::span<const SearchResult> results);
}

#endif
