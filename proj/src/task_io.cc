#include "rsl/task_io.h"

#include "json.hpp"

#include <fstream>
#include <sstream>

using namespace std;
using json = nlohmann::ordered_json;

namespace rsl {
TaskBundle analyze_task(GroundTask task) {
    ReachableActions reachable = compute_reachable_actions(task);
    MutexTable mutexes = compute_mutexes(task, reachable);
    return TaskBundle{move(task), move(mutexes), move(reachable)};
}

string serialize_ground_task(const TaskBundle &bundle) {
    const GroundTask &task = bundle.task;
    json doc;
    doc["format_version"] = task_format_version;
    doc["atoms"] = task.atoms();
    json actions = json::array();
    for (const GroundAction &a : task.actions()) {
        json entry;
        entry["name"] = a.name;
        entry["pre"] = a.pre.ids();
        entry["add"] = a.add.ids();
        entry["del"] = a.del.ids();
        actions.push_back(move(entry));
    }
    doc["actions"] = move(actions);
    doc["init"] = task.init().ids();
    doc["goal"] = task.goal().ids();
    json mutexes = json::array();
    for (auto [p, q] : bundle.mutexes.pairs())
        mutexes.push_back({p, q});
    doc["mutexes"] = move(mutexes);
    doc["reachable_actions"] = bundle.reachable.actions.ids();
    return doc.dump() + "\n";
}

namespace {
[[noreturn]] void format_error(const string &msg) {
    throw TaskFileError(TaskFileError::Kind::Format, msg);
}

[[noreturn]] void integrity_error(const string &msg) {
    throw TaskFileError(TaskFileError::Kind::Integrity, msg);
}

vector<AtomId> read_ids(const json &node, const char *what, size_t bound) {
    if (!node.is_array())
        format_error(string(what) + " must be an array");
    vector<AtomId> ids;
    for (const json &v : node) {
        if (!v.is_number_integer() || v.get<long long>() < 0)
            format_error(string(what) + " must contain non-negative integers");
        long long id = v.get<long long>();
        if (static_cast<unsigned long long>(id) >= bound)
            integrity_error(string("dangling id ") + to_string(id) + " in " + what);
        ids.push_back(static_cast<AtomId>(id));
    }
    return ids;
}

const json &field(const json &doc, const char *key) {
    auto it = doc.find(key);
    if (it == doc.end())
        format_error(string("missing key '") + key + "'");
    return *it;
}
}

TaskBundle deserialize_ground_task(const string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        format_error(string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        format_error("task file must be a JSON object");
    const json &version = field(doc, "format_version");
    if (!version.is_number_integer() || version.get<int>() != task_format_version)
        throw TaskFileError(TaskFileError::Kind::Version,
                            "unsupported task format_version " + version.dump());

    const json &atoms_node = field(doc, "atoms");
    if (!atoms_node.is_array())
        format_error("atoms must be an array");
    vector<string> atoms;
    for (const json &a : atoms_node) {
        if (!a.is_string())
            format_error("atom names must be strings");
        atoms.push_back(a.get<string>());
    }
    size_t num_atoms = atoms.size();

    const json &actions_node = field(doc, "actions");
    if (!actions_node.is_array())
        format_error("actions must be an array");
    vector<RawAction> raw_actions;
    for (const json &a : actions_node) {
        if (!a.is_object() || !field(a, "name").is_string())
            format_error("each action needs a string name");
        raw_actions.push_back(RawAction{a["name"].get<string>(),
                                        read_ids(field(a, "pre"), "pre", num_atoms),
                                        read_ids(field(a, "add"), "add", num_atoms),
                                        read_ids(field(a, "del"), "del", num_atoms)});
    }
    vector<AtomId> init = read_ids(field(doc, "init"), "init", num_atoms);
    vector<AtomId> goal = read_ids(field(doc, "goal"), "goal", num_atoms);

    const json &mutex_node = field(doc, "mutexes");
    if (!mutex_node.is_array())
        format_error("mutexes must be an array");
    vector<pair<AtomId, AtomId>> mutex_pairs;
    for (const json &pair_node : mutex_node) {
        vector<AtomId> ids = read_ids(pair_node, "mutexes", num_atoms);
        if (ids.size() != 2 || ids[0] == ids[1])
            integrity_error("mutex entries must be pairs of distinct atoms");
        mutex_pairs.emplace_back(ids[0], ids[1]);
    }
    vector<AtomId> reachable_ids =
        read_ids(field(doc, "reachable_actions"), "reachable_actions", raw_actions.size());

    // Actions dropped during build (empty add lists) shift later ids.
    vector<long> remap(raw_actions.size(), -1);
    long next = 0;
    for (size_t i = 0; i < raw_actions.size(); ++i)
        if (!raw_actions[i].add.empty())
            remap[i] = next++;

    GroundTask task = [&] {
        try {
            return GroundTask::build(move(atoms), raw_actions, init, goal);
        } catch (const TaskError &e) {
            integrity_error(e.what());
        }
    }();

    MutexTable mutexes(task.num_atoms());
    for (auto [p, q] : mutex_pairs)
        mutexes.add(p, q);
    ReachableActions reachable{AtomSet(task.num_actions())};
    for (AtomId id : reachable_ids)
        if (remap[id] >= 0)
            reachable.actions.set(static_cast<ActionId>(remap[id]));
    return TaskBundle{move(task), move(mutexes), move(reachable)};
}

string read_file(const filesystem::path &path) {
    ifstream in(path, ios::binary);
    if (!in)
        throw TaskFileError(TaskFileError::Kind::Io, "cannot read " + path.string());
    ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const filesystem::path &path, const string &contents) {
    ofstream out(path, ios::binary | ios::trunc);
    if (!out)
        throw TaskFileError(TaskFileError::Kind::Io, "cannot write " + path.string());
    out << contents;
    if (!out)
        throw TaskFileError(TaskFileError::Kind::Io, "failed writing " + path.string());
}

void save_ground_task(const TaskBundle &bundle, const filesystem::path &path) {
    write_file(path, serialize_ground_task(bundle));
}

TaskBundle load_ground_task(const filesystem::path &path) {
    return deserialize_ground_task(read_file(path));
}
}
