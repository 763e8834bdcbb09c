#ifndef RSL_PDDL_H
#define RSL_PDDL_H

#include "strips.h"

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsl::pddl {
class PddlError : public std::runtime_error {
public:
    enum class Kind {Syntax, UnsupportedRequirement, Unsupported, UndeclaredSymbol, Semantic};

private:
    Kind error_kind;
    int error_line;
    int error_column;

public:
    PddlError(Kind kind, const std::string &message, int line = 0, int column = 0);

    Kind kind() const {return error_kind;}
    int line() const {return error_line;}
    int column() const {return error_column;}
};

class GroundingSizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TypedName {
    std::string name;
    std::string type;
};

struct Predicate {
    std::string name;
    std::vector<std::string> parameter_types;
};

// Positive literal; terms are either "?var" parameters or object names.
struct Literal {
    std::string predicate;
    std::vector<std::string> terms;
};

struct ActionSchema {
    std::string name;
    std::vector<TypedName> parameters;
    std::vector<Literal> pre;
    std::vector<Literal> add;
    std::vector<Literal> del;
};

struct LiftedTask {
    std::string domain_name;
    std::string problem_name;
    // type -> parent; "object" is the implicit root and has no entry.
    std::map<std::string, std::string> type_parent;
    std::vector<Predicate> predicates;
    std::vector<ActionSchema> schemas;
    // Domain constants followed by problem objects, in declaration order.
    std::vector<TypedName> objects;
    std::vector<Literal> init;
    std::vector<Literal> goal;
};

/*
  Parse the :strips/:typing subset of PDDL. Symbols are case-insensitive and
  normalized to lower case; ';' starts a comment. Negative literals in
  preconditions or goals, quantifiers, conditional effects and any other
  requirement are rejected with a positioned PddlError.
*/
LiftedTask parse_pddl(const std::string &domain_text, const std::string &problem_text);

struct GroundingOptions {
    std::size_t max_atoms = 200000;
    std::size_t max_actions = 200000;
};

/*
  Naive typed enumeration of every schema instantiation. Predicates that no
  schema adds or deletes are static: they are evaluated against the initial
  state during enumeration and never become atoms. Atom ids follow first
  appearance (schema order; pre, add, del within an action), then the initial
  state, then the goal.
*/
GroundTask ground(const LiftedTask &lifted, const GroundingOptions &options = {},
                  GroundTask::BuildReport *report = nullptr);
}

#endif
