#ifndef RSL_STRIPS_H
#define RSL_STRIPS_H

#include "atom_set.h"

#include <stdexcept>
#include <string>
#include <vector>

namespace rsl {
class TaskError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionViolated : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GroundAction {
    std::string name;
    AtomSet pre;
    AtomSet add;
    AtomSet del;

    friend bool operator==(const GroundAction &, const GroundAction &) = default;
};

// A complete truth assignment: atoms not in the set are false.
struct State {
    AtomSet atoms;

    friend bool operator==(const State &, const State &) = default;
};

// A partial truth assignment reached by regression: atoms not in the set
// are undefined. Denotes {s | assigned ⊆ s}.
struct PreImage {
    AtomSet assigned;

    friend bool operator==(const PreImage &, const PreImage &) = default;
};

// Action description with plain id lists, as produced by a grounder or a
// task file before validation.
struct RawAction {
    std::string name;
    std::vector<AtomId> pre;
    std::vector<AtomId> add;
    std::vector<AtomId> del;
};

/*
  Grounded STRIPS task <F, O, I, G> with unit action costs.

  Built only through GroundTask::build, which validates atom ids, rejects an
  empty goal, drops actions without add effects and removes Add ∩ Del from
  delete lists.
*/
class GroundTask {
    std::vector<std::string> atom_names;
    std::vector<GroundAction> action_list;
    AtomSet init_atoms;
    AtomSet goal_atoms;

    GroundTask() = default;

public:
    struct BuildReport {
        std::vector<std::string> dropped_actions;
        std::size_t normalized_deletes = 0;
    };

    static GroundTask build(std::vector<std::string> atoms,
                            const std::vector<RawAction> &actions,
                            const std::vector<AtomId> &init,
                            const std::vector<AtomId> &goal,
                            BuildReport *report = nullptr);

    std::size_t num_atoms() const {return atom_names.size();}
    std::size_t num_actions() const {return action_list.size();}
    const std::vector<std::string> &atoms() const {return atom_names;}
    const std::string &atom_name(AtomId id) const {return atom_names[id];}
    const std::vector<GroundAction> &actions() const {return action_list;}
    const GroundAction &action(ActionId id) const {return action_list[id];}
    const AtomSet &init() const {return init_atoms;}
    const AtomSet &goal() const {return goal_atoms;}

    State initial_state() const {return State{init_atoms};}
    State make_state(const std::vector<AtomId> &ids) const;
    PreImage make_preimage(const std::vector<AtomId> &ids) const;

    // Returns -1 if no atom/action carries that name.
    long find_atom(const std::string &name) const;
    long find_action(const std::string &name) const;

    friend bool operator==(const GroundTask &, const GroundTask &) = default;
};

// (s \ Del(a)) ∪ Add(a); throws PreconditionViolated if Pre(a) ⊄ s.
State apply_action(const State &s, const GroundAction &a);

// Ids of all actions with Pre(a) ⊆ s, in declaration order.
std::vector<ActionId> applicable_actions(const State &s, const GroundTask &task);

bool is_goal(const State &s, const GroundTask &task);

// (x \ Add(a)) ∪ Pre(a). Relevance and consistency are the caller's concern.
PreImage regress(const PreImage &x, const GroundAction &a);
}

#endif
