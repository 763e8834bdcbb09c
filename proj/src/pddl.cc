#include "rsl/pddl.h"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

using namespace std;

namespace rsl::pddl {
PddlError::PddlError(Kind kind, const string &message, int line, int column)
    : runtime_error(line > 0 ? to_string(line) + ":" + to_string(column) + ": " + message
                             : message),
      error_kind(kind), error_line(line), error_column(column) {
}

namespace {
struct SExpr {
    bool is_list = false;
    string symbol;
    vector<SExpr> items;
    int line = 0;
    int column = 0;

    bool is_symbol(const string &s) const {return !is_list && symbol == s;}
};

[[noreturn]] void fail(PddlError::Kind kind, const string &msg, const SExpr &at) {
    throw PddlError(kind, msg, at.line, at.column);
}

[[noreturn]] void syntax_error(const string &msg, const SExpr &at) {
    fail(PddlError::Kind::Syntax, msg, at);
}

class Reader {
    const string &text;
    size_t pos = 0;
    int line = 1;
    int column = 1;

    void advance() {
        if (text[pos] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
        ++pos;
    }

    void skip_blanks() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == ';') {
                while (pos < text.size() && text[pos] != '\n')
                    advance();
            } else if (isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    SExpr read() {
        skip_blanks();
        if (pos >= text.size())
            throw PddlError(PddlError::Kind::Syntax, "unexpected end of input", line, column);
        SExpr node;
        node.line = line;
        node.column = column;
        char c = text[pos];
        if (c == '(') {
            node.is_list = true;
            advance();
            while (true) {
                skip_blanks();
                if (pos >= text.size())
                    throw PddlError(PddlError::Kind::Syntax,
                                    "unbalanced '(' opened here", node.line, node.column);
                if (text[pos] == ')') {
                    advance();
                    break;
                }
                node.items.push_back(read());
            }
        } else if (c == ')') {
            throw PddlError(PddlError::Kind::Syntax, "unexpected ')'", line, column);
        } else {
            while (pos < text.size()) {
                char d = text[pos];
                if (isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';')
                    break;
                node.symbol.push_back(static_cast<char>(tolower(static_cast<unsigned char>(d))));
                advance();
            }
        }
        return node;
    }

public:
    explicit Reader(const string &text) : text(text) {}

    SExpr read_document() {
        SExpr root = read();
        skip_blanks();
        if (pos < text.size())
            throw PddlError(PddlError::Kind::Syntax, "trailing content after definition",
                            line, column);
        return root;
    }
};

const SExpr &expect_list(const SExpr &e, const string &what) {
    if (!e.is_list)
        syntax_error("expected " + what, e);
    return e;
}

const string &expect_symbol(const SExpr &e, const string &what) {
    if (e.is_list || e.symbol.empty())
        syntax_error("expected " + what, e);
    return e.symbol;
}

// "a b - t c" -> [(a,t), (b,t), (c,object)]
vector<TypedName> parse_typed_list(const vector<SExpr> &items, size_t begin) {
    vector<TypedName> result;
    size_t pending = 0;
    for (size_t i = begin; i < items.size(); ++i) {
        const SExpr &item = items[i];
        if (item.is_list)
            fail(PddlError::Kind::Unsupported, "either-types are not supported", item);
        if (item.symbol == "-") {
            if (i + 1 >= items.size())
                syntax_error("missing type after '-'", item);
            const SExpr &type = items[i + 1];
            if (type.is_list)
                fail(PddlError::Kind::Unsupported, "either-types are not supported", type);
            if (pending == 0)
                syntax_error("type without names", item);
            for (size_t k = result.size() - pending; k < result.size(); ++k)
                result[k].type = type.symbol;
            pending = 0;
            ++i;
        } else {
            result.push_back({item.symbol, "object"});
            ++pending;
        }
    }
    return result;
}

struct SymbolTable {
    unordered_map<string, size_t> predicate_arity;
    unordered_set<string> types{"object"};
    unordered_set<string> objects;
};

Literal parse_atom(const SExpr &e, const SymbolTable &symbols,
                   const unordered_set<string> *parameters) {
    expect_list(e, "atom");
    if (e.items.empty())
        syntax_error("empty atom", e);
    const string &pred = expect_symbol(e.items[0], "predicate name");
    if (pred == "=")
        fail(PddlError::Kind::UnsupportedRequirement, "equality requires :equality", e);
    auto it = symbols.predicate_arity.find(pred);
    if (it == symbols.predicate_arity.end())
        fail(PddlError::Kind::UndeclaredSymbol, "undeclared predicate '" + pred + "'", e.items[0]);
    Literal literal{pred, {}};
    for (size_t i = 1; i < e.items.size(); ++i) {
        const string &term = expect_symbol(e.items[i], "term");
        if (term[0] == '?') {
            if (!parameters || !parameters->count(term))
                fail(PddlError::Kind::UndeclaredSymbol, "undeclared parameter '" + term + "'",
                     e.items[i]);
        } else if (!symbols.objects.count(term)) {
            fail(PddlError::Kind::UndeclaredSymbol, "undeclared object '" + term + "'", e.items[i]);
        }
        literal.terms.push_back(term);
    }
    if (literal.terms.size() != it->second)
        fail(PddlError::Kind::Semantic, "predicate '" + pred + "' expects " +
             to_string(it->second) + " arguments", e);
    return literal;
}

bool is_keyword(const SExpr &e, const string &kw) {
    return e.is_list && !e.items.empty() && e.items[0].is_symbol(kw);
}

// Conjunction of positive atoms; "()" is the empty conjunction.
void parse_condition(const SExpr &e, const SymbolTable &symbols,
                     const unordered_set<string> *parameters, vector<Literal> &out) {
    expect_list(e, "condition");
    if (e.items.empty())
        return;
    const SExpr &head = e.items[0];
    if (head.is_symbol("and")) {
        for (size_t i = 1; i < e.items.size(); ++i)
            parse_condition(e.items[i], symbols, parameters, out);
    } else if (head.is_symbol("not")) {
        fail(PddlError::Kind::Unsupported, "negative conditions are not supported", e);
    } else if (head.is_symbol("or") || head.is_symbol("imply") || head.is_symbol("exists") ||
               head.is_symbol("forall") || head.is_symbol("when")) {
        fail(PddlError::Kind::Unsupported, "'" + head.symbol + "' is not supported", e);
    } else {
        out.push_back(parse_atom(e, symbols, parameters));
    }
}

void parse_effect(const SExpr &e, const SymbolTable &symbols,
                  const unordered_set<string> &parameters, ActionSchema &schema) {
    expect_list(e, "effect");
    if (e.items.empty())
        return;
    const SExpr &head = e.items[0];
    if (head.is_symbol("and")) {
        for (size_t i = 1; i < e.items.size(); ++i)
            parse_effect(e.items[i], symbols, parameters, schema);
    } else if (head.is_symbol("not")) {
        if (e.items.size() != 2)
            syntax_error("'not' takes one atom", e);
        schema.del.push_back(parse_atom(e.items[1], symbols, &parameters));
    } else if (head.is_symbol("forall") || head.is_symbol("when") || head.is_symbol("increase") ||
               head.is_symbol("decrease") || head.is_symbol("assign")) {
        fail(PddlError::Kind::Unsupported, "'" + head.symbol + "' effects are not supported", e);
    } else {
        schema.add.push_back(parse_atom(e, symbols, &parameters));
    }
}

void check_requirements(const SExpr &section) {
    for (size_t i = 1; i < section.items.size(); ++i) {
        const string &req = expect_symbol(section.items[i], "requirement");
        if (req != ":strips" && req != ":typing")
            fail(PddlError::Kind::UnsupportedRequirement,
                 "unsupported requirement '" + req + "'", section.items[i]);
    }
}

void declare_type(const TypedName &t, SymbolTable &symbols, LiftedTask &task,
                  const SExpr &at) {
    if (t.name == "object")
        return;
    if (task.type_parent.count(t.name))
        fail(PddlError::Kind::Semantic, "type '" + t.name + "' declared twice", at);
    task.type_parent[t.name] = t.type;
    symbols.types.insert(t.name);
    symbols.types.insert(t.type);
}

void check_type(const string &type, const SymbolTable &symbols, const SExpr &at) {
    if (!symbols.types.count(type))
        fail(PddlError::Kind::UndeclaredSymbol, "undeclared type '" + type + "'", at);
}

void add_objects(const SExpr &section, SymbolTable &symbols, LiftedTask &task) {
    for (const TypedName &obj : parse_typed_list(section.items, 1)) {
        check_type(obj.type, symbols, section);
        if (symbols.objects.insert(obj.name).second)
            task.objects.push_back(obj);
    }
}

void parse_action(const SExpr &e, const SymbolTable &symbols, LiftedTask &task) {
    if (e.items.size() < 2)
        syntax_error("action without name", e);
    ActionSchema schema;
    schema.name = expect_symbol(e.items[1], "action name");
    unordered_set<string> parameters;
    for (size_t i = 2; i < e.items.size(); ++i) {
        const SExpr &key = e.items[i];
        if (key.is_list || i + 1 >= e.items.size())
            syntax_error("expected ':keyword value' in action " + schema.name, key);
        const SExpr &value = e.items[++i];
        if (key.symbol == ":parameters") {
            expect_list(value, "parameter list");
            schema.parameters = parse_typed_list(value.items, 0);
            for (const TypedName &p : schema.parameters) {
                if (p.name.empty() || p.name[0] != '?')
                    syntax_error("parameter names must start with '?'", value);
                check_type(p.type, symbols, value);
                parameters.insert(p.name);
            }
        } else if (key.symbol == ":precondition") {
            parse_condition(value, symbols, &parameters, schema.pre);
        } else if (key.symbol == ":effect") {
            parse_effect(value, symbols, parameters, schema);
        } else {
            fail(PddlError::Kind::Unsupported, "unsupported action field '" + key.symbol + "'", key);
        }
    }
    task.schemas.push_back(move(schema));
}

void parse_domain(const SExpr &root, SymbolTable &symbols, LiftedTask &task) {
    expect_list(root, "(define ...)");
    if (root.items.size() < 2 || !root.items[0].is_symbol("define") ||
        !is_keyword(root.items[1], "domain") || root.items[1].items.size() != 2)
        syntax_error("expected (define (domain <name>) ...)", root);
    task.domain_name = expect_symbol(root.items[1].items[1], "domain name");

    for (size_t i = 2; i < root.items.size(); ++i) {
        const SExpr &section = expect_list(root.items[i], "domain section");
        if (section.items.empty())
            syntax_error("empty section", section);
        const string &kw = expect_symbol(section.items[0], "section keyword");
        if (kw == ":requirements") {
            check_requirements(section);
        } else if (kw == ":types") {
            for (const TypedName &t : parse_typed_list(section.items, 1))
                declare_type(t, symbols, task, section);
        } else if (kw == ":constants") {
            add_objects(section, symbols, task);
        } else if (kw == ":predicates") {
            for (size_t k = 1; k < section.items.size(); ++k) {
                const SExpr &decl = expect_list(section.items[k], "predicate declaration");
                if (decl.items.empty())
                    syntax_error("empty predicate declaration", decl);
                Predicate pred{expect_symbol(decl.items[0], "predicate name"), {}};
                for (const TypedName &p : parse_typed_list(decl.items, 1)) {
                    check_type(p.type, symbols, decl);
                    pred.parameter_types.push_back(p.type);
                }
                if (symbols.predicate_arity.count(pred.name))
                    fail(PddlError::Kind::Semantic, "predicate '" + pred.name + "' declared twice",
                         decl);
                symbols.predicate_arity[pred.name] = pred.parameter_types.size();
                task.predicates.push_back(move(pred));
            }
        } else if (kw == ":action") {
            parse_action(section, symbols, task);
        } else {
            fail(PddlError::Kind::Unsupported, "unsupported domain section '" + kw + "'", section);
        }
    }
    // Types named only as a parent must exist as well.
    for (const auto &[type, parent] : task.type_parent) {
        if (parent != "object" && !task.type_parent.count(parent))
            task.type_parent[parent] = "object";
    }
}

void parse_problem(const SExpr &root, SymbolTable &symbols, LiftedTask &task) {
    expect_list(root, "(define ...)");
    if (root.items.size() < 2 || !root.items[0].is_symbol("define") ||
        !is_keyword(root.items[1], "problem") || root.items[1].items.size() != 2)
        syntax_error("expected (define (problem <name>) ...)", root);
    task.problem_name = expect_symbol(root.items[1].items[1], "problem name");

    bool has_goal = false;
    const SExpr *goal_section = nullptr;
    for (size_t i = 2; i < root.items.size(); ++i) {
        const SExpr &section = expect_list(root.items[i], "problem section");
        if (section.items.empty())
            syntax_error("empty section", section);
        const string &kw = expect_symbol(section.items[0], "section keyword");
        if (kw == ":domain") {
            if (section.items.size() != 2)
                syntax_error("expected (:domain <name>)", section);
            const string &name = expect_symbol(section.items[1], "domain name");
            if (name != task.domain_name)
                fail(PddlError::Kind::Semantic, "problem refers to domain '" + name +
                     "' but domain is '" + task.domain_name + "'", section.items[1]);
        } else if (kw == ":requirements") {
            check_requirements(section);
        } else if (kw == ":objects") {
            add_objects(section, symbols, task);
        } else if (kw == ":init") {
            for (size_t k = 1; k < section.items.size(); ++k) {
                const SExpr &atom = section.items[k];
                if (is_keyword(atom, "not"))
                    fail(PddlError::Kind::Unsupported, "negative initial facts are not supported",
                         atom);
                if (is_keyword(atom, "="))
                    fail(PddlError::Kind::Unsupported, "numeric initial facts are not supported",
                         atom);
                task.init.push_back(parse_atom(atom, symbols, nullptr));
            }
        } else if (kw == ":goal") {
            if (section.items.size() != 2)
                syntax_error("expected (:goal <condition>)", section);
            has_goal = true;
            goal_section = &section;
            parse_condition(section.items[1], symbols, nullptr, task.goal);
        } else {
            fail(PddlError::Kind::Unsupported, "unsupported problem section '" + kw + "'", section);
        }
    }
    if (!has_goal)
        fail(PddlError::Kind::Semantic, "problem has no goal", root);
    if (task.goal.empty())
        fail(PddlError::Kind::Semantic, "goal empty", *goal_section);
}

string atom_string(const string &pred, const vector<string> &args) {
    string s = pred + "(";
    for (size_t i = 0; i < args.size(); ++i) {
        if (i)
            s += ",";
        s += args[i];
    }
    return s + ")";
}
}

LiftedTask parse_pddl(const string &domain_text, const string &problem_text) {
    LiftedTask task;
    SymbolTable symbols;
    parse_domain(Reader(domain_text).read_document(), symbols, task);
    parse_problem(Reader(problem_text).read_document(), symbols, task);
    return task;
}

namespace {
class Grounder {
    const LiftedTask &lifted;
    const GroundingOptions &options;
    unordered_set<string> fluent_predicates;
    set<string> static_facts;
    unordered_map<string, AtomId> atom_ids;
    vector<string> atom_names;
    vector<RawAction> actions;

    bool is_subtype(const string &type, const string &ancestor) const {
        string t = type;
        while (true) {
            if (t == ancestor)
                return true;
            auto it = lifted.type_parent.find(t);
            if (it == lifted.type_parent.end())
                return false;
            t = it->second;
        }
    }

    AtomId atom_id(const string &name) {
        auto [it, inserted] = atom_ids.emplace(name, static_cast<AtomId>(atom_names.size()));
        if (inserted) {
            atom_names.push_back(name);
            if (atom_names.size() > options.max_atoms)
                throw GroundingSizeError("grounding exceeds " + to_string(options.max_atoms) +
                                         " atoms");
        }
        return it->second;
    }

    static string instantiate(const Literal &lit, const unordered_map<string, string> &binding) {
        vector<string> args;
        for (const string &term : lit.terms)
            args.push_back(term[0] == '?' ? binding.at(term) : term);
        return atom_string(lit.predicate, args);
    }

    void ground_schema(const ActionSchema &schema) {
        size_t n = schema.parameters.size();
        vector<vector<string>> domains(n);
        for (size_t i = 0; i < n; ++i)
            for (const TypedName &obj : lifted.objects)
                if (is_subtype(obj.type, schema.parameters[i].type))
                    domains[i].push_back(obj.name);

        // Static preconditions are checked as soon as their last parameter is bound.
        vector<vector<const Literal *>> static_checks(n + 1);
        vector<const Literal *> fluent_pre;
        unordered_map<string, size_t> param_index;
        for (size_t i = 0; i < n; ++i)
            param_index[schema.parameters[i].name] = i;
        for (const Literal &lit : schema.pre) {
            if (fluent_predicates.count(lit.predicate)) {
                fluent_pre.push_back(&lit);
                continue;
            }
            size_t last = 0;
            for (const string &term : lit.terms)
                if (term[0] == '?')
                    last = max(last, param_index.at(term) + 1);
            static_checks[last].push_back(&lit);
        }

        unordered_map<string, string> binding;
        auto statics_hold = [&](size_t level) {
            for (const Literal *lit : static_checks[level])
                if (!static_facts.count(instantiate(*lit, binding)))
                    return false;
            return true;
        };
        if (!statics_hold(0))
            return;

        vector<string> args(n);
        function<void(size_t)> extend = [&](size_t i) {
            if (i == n) {
                RawAction action;
                action.name = atom_string(schema.name, args);
                for (const Literal *lit : fluent_pre)
                    action.pre.push_back(atom_id(instantiate(*lit, binding)));
                for (const Literal &lit : schema.add)
                    action.add.push_back(atom_id(instantiate(lit, binding)));
                for (const Literal &lit : schema.del)
                    action.del.push_back(atom_id(instantiate(lit, binding)));
                actions.push_back(move(action));
                if (actions.size() > options.max_actions)
                    throw GroundingSizeError("grounding exceeds " +
                                             to_string(options.max_actions) + " actions");
                return;
            }
            for (const string &obj : domains[i]) {
                binding[schema.parameters[i].name] = obj;
                args[i] = obj;
                if (statics_hold(i + 1))
                    extend(i + 1);
            }
            binding.erase(schema.parameters[i].name);
        };
        extend(0);
    }

public:
    Grounder(const LiftedTask &lifted, const GroundingOptions &options)
        : lifted(lifted), options(options) {
        for (const ActionSchema &schema : lifted.schemas) {
            for (const Literal &lit : schema.add)
                fluent_predicates.insert(lit.predicate);
            for (const Literal &lit : schema.del)
                fluent_predicates.insert(lit.predicate);
        }
        for (const Literal &lit : lifted.init)
            if (!fluent_predicates.count(lit.predicate))
                static_facts.insert(atom_string(lit.predicate, lit.terms));
    }

    GroundTask run(GroundTask::BuildReport *report) {
        for (const ActionSchema &schema : lifted.schemas)
            ground_schema(schema);

        vector<AtomId> init;
        for (const Literal &lit : lifted.init)
            if (fluent_predicates.count(lit.predicate))
                init.push_back(atom_id(atom_string(lit.predicate, lit.terms)));
        vector<AtomId> goal;
        for (const Literal &lit : lifted.goal) {
            string name = atom_string(lit.predicate, lit.terms);
            // A static goal that holds initially is always satisfied.
            if (!fluent_predicates.count(lit.predicate) && static_facts.count(name))
                continue;
            goal.push_back(atom_id(name));
        }
        sort(init.begin(), init.end());
        init.erase(unique(init.begin(), init.end()), init.end());
        sort(goal.begin(), goal.end());
        goal.erase(unique(goal.begin(), goal.end()), goal.end());
        return GroundTask::build(move(atom_names), actions, init, goal, report);
    }
};
}

GroundTask ground(const LiftedTask &lifted, const GroundingOptions &options,
                  GroundTask::BuildReport *report) {
    return Grounder(lifted, options).run(report);
}
}
