#include "rsl/strips.h"

#include <spdlog/spdlog.h>

#include <string>

using namespace std;

namespace rsl {
static AtomSet to_atom_set(const vector<AtomId> &ids, size_t num_atoms,
                           const string &where) {
    AtomSet result(num_atoms);
    for (AtomId id : ids) {
        if (id >= num_atoms)
            throw TaskError("atom id " + to_string(id) + " out of range in " + where);
        result.set(id);
    }
    return result;
}

GroundTask GroundTask::build(vector<string> atoms,
                             const vector<RawAction> &actions,
                             const vector<AtomId> &init,
                             const vector<AtomId> &goal,
                             BuildReport *report) {
    GroundTask task;
    size_t n = atoms.size();
    task.atom_names = move(atoms);
    task.init_atoms = to_atom_set(init, n, "init");
    task.goal_atoms = to_atom_set(goal, n, "goal");
    if (task.goal_atoms.none())
        throw TaskError("goal is empty");

    BuildReport local_report;
    for (const RawAction &raw : actions) {
        GroundAction action{raw.name,
                            to_atom_set(raw.pre, n, "pre of " + raw.name),
                            to_atom_set(raw.add, n, "add of " + raw.name),
                            to_atom_set(raw.del, n, "del of " + raw.name)};
        if (action.add.none()) {
            spdlog::warn("dropping action {} with empty add list", raw.name);
            local_report.dropped_actions.push_back(raw.name);
            continue;
        }
        if (action.del.intersects(action.add)) {
            action.del.subtract(action.add);
            ++local_report.normalized_deletes;
        }
        task.action_list.push_back(move(action));
    }
    if (report)
        *report = move(local_report);
    return task;
}

State GroundTask::make_state(const vector<AtomId> &ids) const {
    return State{to_atom_set(ids, num_atoms(), "state")};
}

PreImage GroundTask::make_preimage(const vector<AtomId> &ids) const {
    return PreImage{to_atom_set(ids, num_atoms(), "pre-image")};
}

long GroundTask::find_atom(const string &name) const {
    for (size_t i = 0; i < atom_names.size(); ++i)
        if (atom_names[i] == name)
            return static_cast<long>(i);
    return -1;
}

long GroundTask::find_action(const string &name) const {
    for (size_t i = 0; i < action_list.size(); ++i)
        if (action_list[i].name == name)
            return static_cast<long>(i);
    return -1;
}

State apply_action(const State &s, const GroundAction &a) {
    if (!a.pre.is_subset_of(s.atoms))
        throw PreconditionViolated("action " + a.name + " is not applicable");
    State result = s;
    result.atoms.subtract(a.del);
    result.atoms |= a.add;
    return result;
}

vector<ActionId> applicable_actions(const State &s, const GroundTask &task) {
    vector<ActionId> result;
    const auto &actions = task.actions();
    for (size_t i = 0; i < actions.size(); ++i)
        if (actions[i].pre.is_subset_of(s.atoms))
            result.push_back(static_cast<ActionId>(i));
    return result;
}

bool is_goal(const State &s, const GroundTask &task) {
    return task.goal().is_subset_of(s.atoms);
}

PreImage regress(const PreImage &x, const GroundAction &a) {
    PreImage result = x;
    result.assigned.subtract(a.add);
    result.assigned |= a.pre;
    return result;
}
}
