#ifndef RSL_REGRESSION_H
#define RSL_REGRESSION_H

#include "analysis.h"
#include "rng.h"
#include "strips.h"
#include "task_io.h"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsl {
enum class SelectionMode {Random, Novelty};

std::string to_string(SelectionMode mode);
// Accepts "random"/"rsl" and "novelty"/"n-rsl".
SelectionMode parse_selection_mode(const std::string &text);

struct Rollout {
    std::vector<PreImage> preimages;   // x_0 = G, x_1, ..., x_k
    std::vector<ActionId> actions;     // actions[i] regresses x_i into x_{i+1}
    bool terminated_early = false;

    friend bool operator==(const Rollout &, const Rollout &) = default;
};

struct RegressionSet {
    std::vector<Rollout> rollouts;
    int num_rollouts = 0;
    int length = 0;
    SelectionMode mode = SelectionMode::Novelty;
};

// Work counters checked against the O(N_r * L * |O|) lookahead bound.
struct RegressionCounters {
    std::uint64_t candidates_examined = 0;
    std::uint64_t steps = 0;
};

// {q ∈ F \ Add(a) | ∃p ∈ Pre(a): mutex(p, q)}
AtomSet e_del(const GroundAction &a, const MutexTable &mutexes);

/*
  Precomputed per-task data for regression: e-Del sets and an achiever index
  (atom -> actions adding it). Holds a reference to the bundle, which must
  outlive it.
*/
class RegressionContext {
    const TaskBundle &bundle_;
    std::vector<AtomSet> extended_deletes;
    std::vector<AtomSet> achievers;   // per atom, bitset over action ids

public:
    explicit RegressionContext(const TaskBundle &bundle);

    const TaskBundle &bundle() const {return bundle_;}
    const GroundTask &task() const {return bundle_.task;}
    const AtomSet &e_del(ActionId id) const {return extended_deletes[id];}

    /*
      Actions valid for pre-imaging x, ascending by id: reachable in the
      delete relaxation, x ∩ e-Del(a) = ∅, x ∩ Del(a) = ∅, x ∩ Add(a) ≠ ∅,
      and regress(x, a) contains no mutex pair.
    */
    std::vector<ActionId> valid_actions(const PreImage &x,
                                        RegressionCounters *counters = nullptr) const;
};

// Convenience wrapper that builds a temporary context.
std::vector<ActionId> valid_regression_actions(const PreImage &x, const TaskBundle &bundle);

// |Pre(a) \ traj_union|
std::size_t novelty_mu_plus(const GroundAction &a, const AtomSet &traj_union);

class EmptyCandidates : public std::invalid_argument {
public:
    EmptyCandidates() : std::invalid_argument("no candidate actions to select from") {}
};

// Novelty: uniform among the candidates maximizing mu+. Random: uniform.
ActionId select_action(const GroundTask &task, const AtomSet &traj_union,
                       std::span<const ActionId> candidates, SelectionMode mode, Rng &rng);

// One rollout of at most `length` regression steps from the goal. A
// pre-image without valid actions ends the rollout early.
Rollout rollout(const RegressionContext &context, int length, SelectionMode mode, Rng &rng,
                RegressionCounters *counters = nullptr);

// Rollout j draws from Rng(derive_seed(seed, "rollout", j)).
RegressionSet run_regressions(const RegressionContext &context, int num_rollouts, int length,
                              SelectionMode mode, std::uint64_t seed,
                              RegressionCounters *counters = nullptr);

// [{"preimages": [[ids], ...], "actions": [ids], "terminated_early": bool}, ...]
std::string rollouts_to_json(const RegressionSet &set);
}

#endif
