#ifndef RSL_ANALYSIS_H
#define RSL_ANALYSIS_H

#include "strips.h"

#include <utility>
#include <vector>

namespace rsl {
// Bitset over action ids: actions whose preconditions are reachable in the
// delete relaxation from the initial state.
struct ReachableActions {
    AtomSet actions;

    bool contains(ActionId id) const {return actions.test(id);}
    std::size_t count() const {return actions.count();}

    friend bool operator==(const ReachableActions &, const ReachableActions &) = default;
};

/*
  Symmetric, irreflexive relation over atoms, stored as one bitvector row per
  atom. mutex(p, q) means no state reachable from I contains both atoms.
*/
class MutexTable {
    std::vector<AtomSet> rows_;

public:
    MutexTable() = default;
    explicit MutexTable(std::size_t num_atoms)
        : rows_(num_atoms, AtomSet(num_atoms)) {
    }

    std::size_t num_atoms() const {return rows_.size();}
    bool is_mutex(AtomId p, AtomId q) const {return rows_[p].test(q);}
    const AtomSet &row(AtomId p) const {return rows_[p];}

    // Marks both (p, q) and (q, p). Ignores p == q.
    void add(AtomId p, AtomId q);

    // True if some pair of atoms in s is mutex.
    bool has_violation(const AtomSet &s) const;

    // Each pair once, smaller id first, ascending.
    std::vector<std::pair<AtomId, AtomId>> pairs() const;
    std::size_t num_pairs() const;

    friend bool operator==(const MutexTable &, const MutexTable &) = default;
};

// Least fixpoint of delete-relaxed applicability starting from I.
ReachableActions compute_reachable_actions(const GroundTask &task);

/*
  Sound pairwise mutexes from h^2 reachability. A pair {p, q} is reachable
  if it holds in I, or some action whose preconditions are pairwise
  reachable adds both, or adds p while q persists (q not added or deleted,
  and q pairwise reachable with every precondition). Every pair that never
  becomes reachable is mutex; atoms that are unreachable on their own are
  mutex with every other atom.
*/
MutexTable compute_mutexes(const GroundTask &task, const ReachableActions &reachable);
}

#endif
