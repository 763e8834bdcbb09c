#ifndef RSL_TASK_IO_H
#define RSL_TASK_IO_H

#include "analysis.h"
#include "strips.h"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace rsl {
class TaskFileError : public std::runtime_error {
public:
    enum class Kind {Io, Format, Version, Integrity};

private:
    Kind error_kind;

public:
    TaskFileError(Kind kind, const std::string &message)
        : runtime_error(message), error_kind(kind) {
    }
    Kind kind() const {return error_kind;}
};

// A grounded task together with its static analyses.
struct TaskBundle {
    GroundTask task;
    MutexTable mutexes;
    ReachableActions reachable;

    friend bool operator==(const TaskBundle &, const TaskBundle &) = default;
};

TaskBundle analyze_task(GroundTask task);

constexpr int task_format_version = 1;

/*
  Grounded task interchange format (UTF-8 JSON, keys in this order):

    {"format_version": 1, "atoms": [...], "actions": [{"name", "pre", "add",
     "del"}], "init": [...], "goal": [...], "mutexes": [[p, q], ...],
     "reachable_actions": [...]}

  Id arrays are ascending; mutex pairs appear once with the smaller id first.
*/
std::string serialize_ground_task(const TaskBundle &bundle);
TaskBundle deserialize_ground_task(const std::string &text);

void save_ground_task(const TaskBundle &bundle, const std::filesystem::path &path);
TaskBundle load_ground_task(const std::filesystem::path &path);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &contents);
}

#endif
