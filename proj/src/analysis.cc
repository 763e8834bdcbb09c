#include "rsl/analysis.h"

using namespace std;

namespace rsl {
void MutexTable::add(AtomId p, AtomId q) {
    if (p == q)
        return;
    rows_[p].set(q);
    rows_[q].set(p);
}

bool MutexTable::has_violation(const AtomSet &s) const {
    bool violated = false;
    s.for_each([&](AtomId p) {
        if (!violated && rows_[p].intersects(s))
            violated = true;
    });
    return violated;
}

vector<pair<AtomId, AtomId>> MutexTable::pairs() const {
    vector<pair<AtomId, AtomId>> result;
    for (AtomId p = 0; p < rows_.size(); ++p)
        rows_[p].for_each([&](AtomId q) {
            if (p < q)
                result.emplace_back(p, q);
        });
    return result;
}

size_t MutexTable::num_pairs() const {
    size_t n = 0;
    for (const AtomSet &row : rows_)
        n += row.count();
    return n / 2;
}

ReachableActions compute_reachable_actions(const GroundTask &task) {
    ReachableActions result{AtomSet(task.num_actions())};
    AtomSet atoms = task.init();
    bool changed = true;
    while (changed) {
        changed = false;
        for (ActionId id = 0; id < task.num_actions(); ++id) {
            if (result.contains(id))
                continue;
            const GroundAction &a = task.action(id);
            if (a.pre.is_subset_of(atoms)) {
                result.actions.set(id);
                atoms |= a.add;
                changed = true;
            }
        }
    }
    return result;
}

MutexTable compute_mutexes(const GroundTask &task, const ReachableActions &reachable) {
    const size_t n = task.num_atoms();
    // reach[p] holds every q such that {p, q} is reachable; reach[p][p] means
    // p itself is reachable.
    vector<AtomSet> reach(n, AtomSet(n));
    task.init().for_each([&](AtomId p) {reach[p] = task.init();});

    bool changed = true;
    while (changed) {
        changed = false;
        for (ActionId id = 0; id < task.num_actions(); ++id) {
            if (!reachable.contains(id))
                continue;
            const GroundAction &a = task.action(id);

            AtomSet persisting(n);
            bool applicable = true;
            if (a.pre.none()) {
                for (AtomId q = 0; q < n; ++q)
                    if (reach[q].test(q))
                        persisting.set(q);
            } else {
                persisting.fill();
                a.pre.for_each([&](AtomId p) {
                    if (applicable && !a.pre.is_subset_of(reach[p]))
                        applicable = false;
                    persisting &= reach[p];
                });
            }
            if (!applicable)
                continue;
            persisting.subtract(a.add);
            persisting.subtract(a.del);

            a.add.for_each([&](AtomId p) {
                AtomSet before = reach[p];
                reach[p] |= a.add;
                reach[p] |= persisting;
                if (!(reach[p] == before))
                    changed = true;
            });
            persisting.for_each([&](AtomId q) {
                AtomSet before = reach[q];
                reach[q] |= a.add;
                if (!(reach[q] == before))
                    changed = true;
            });
        }
    }

    MutexTable table(n);
    for (AtomId p = 0; p < n; ++p)
        for (AtomId q = p + 1; q < n; ++q)
            if (!reach[p].test(q))
                table.add(p, q);
    return table;
}
}
