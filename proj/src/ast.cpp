#include "heurasp/ast.hpp"

#include <sstream>

namespace heurasp::ast {

const SignSet SignSet::T{1u};
const SignSet SignSet::M{2u};
const SignSet SignSet::F{4u};
const SignSet SignSet::MT{3u};
const SignSet SignSet::FM{6u};
const SignSet SignSet::FT{5u};
const SignSet SignSet::FMT{7u};

Term Term::variable(std::string name) {
    Term t;
    t.kind = TermKind::Variable;
    t.text = std::move(name);
    return t;
}

Term Term::constant(std::string symbol) {
    Term t;
    t.kind = TermKind::Constant;
    t.text = std::move(symbol);
    return t;
}

Term Term::integer(std::int64_t v) {
    Term t;
    t.kind = TermKind::Integer;
    t.value = v;
    return t;
}

Term Term::function(std::string symbol, std::vector<Term> args) {
    Term t;
    t.kind = TermKind::Function;
    t.text = std::move(symbol);
    t.args = std::move(args);
    return t;
}

Term Term::arithmetic(ArithOp op, std::vector<Term> operands) {
    Term t;
    t.kind = TermKind::Arithmetic;
    t.op = op;
    t.args = std::move(operands);
    return t;
}

Term Term::interval(Term lo, Term hi) {
    Term t;
    t.kind = TermKind::Interval;
    t.args.push_back(std::move(lo));
    t.args.push_back(std::move(hi));
    return t;
}

bool Term::operator==(const Term& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
    case TermKind::Variable:
    case TermKind::Constant: return text == o.text;
    case TermKind::Integer: return value == o.value;
    case TermKind::Function: return text == o.text && args == o.args;
    case TermKind::Arithmetic: return op == o.op && args == o.args;
    case TermKind::Interval: return args == o.args;
    }
    return false;
}

bool Term::operator<(const Term& o) const {
    if (kind != o.kind) return kind < o.kind;
    switch (kind) {
    case TermKind::Variable:
    case TermKind::Constant: return text < o.text;
    case TermKind::Integer: return value < o.value;
    case TermKind::Function:
        if (text != o.text) return text < o.text;
        return args < o.args;
    case TermKind::Arithmetic:
        if (op != o.op) return op < o.op;
        return args < o.args;
    case TermKind::Interval: return args < o.args;
    }
    return false;
}

bool Term::is_ground() const {
    if (kind == TermKind::Variable) return false;
    for (const auto& a : args)
        if (!a.is_ground()) return false;
    return true;
}

bool Term::contains_interval() const {
    if (kind == TermKind::Interval) return true;
    for (const auto& a : args)
        if (a.contains_interval()) return true;
    return false;
}

namespace {

const char* arith_symbol(ArithOp op) {
    switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
    case ArithOp::Mod: return "\\";
    case ArithOp::Abs: return "|";
    case ArithOp::Neg: return "-";
    }
    return "?";
}

void print_term(std::ostream& os, const Term& t) {
    switch (t.kind) {
    case TermKind::Variable:
    case TermKind::Constant: os << t.text; return;
    case TermKind::Integer: os << t.value; return;
    case TermKind::Function:
        os << t.text << '(';
        for (std::size_t i = 0; i < t.args.size(); ++i) {
            if (i) os << ',';
            print_term(os, t.args[i]);
        }
        os << ')';
        return;
    case TermKind::Arithmetic:
        if (t.op == ArithOp::Abs) {
            os << '|';
            print_term(os, t.args[0]);
            os << '|';
        } else if (t.op == ArithOp::Neg) {
            os << '-';
            os << '(';
            print_term(os, t.args[0]);
            os << ')';
        } else {
            os << '(';
            print_term(os, t.args[0]);
            os << arith_symbol(t.op);
            print_term(os, t.args[1]);
            os << ')';
        }
        return;
    case TermKind::Interval:
        print_term(os, t.args[0]);
        os << "..";
        print_term(os, t.args[1]);
        return;
    }
}

const char* builtin_symbol(Builtin b) {
    switch (b) {
    case Builtin::Eq: return "=";
    case Builtin::Neq: return "!=";
    case Builtin::Lt: return "<";
    case Builtin::Le: return "<=";
    case Builtin::Gt: return ">";
    case Builtin::Ge: return ">=";
    case Builtin::None: break;
    }
    return "?";
}

} // namespace

std::string to_string(const Term& t) {
    std::ostringstream os;
    print_term(os, t);
    return os.str();
}

Atom make_atom(std::string predicate, std::vector<Term> args) {
    Atom a;
    a.predicate = std::move(predicate);
    a.args = std::move(args);
    return a;
}

Atom make_comparison(Builtin op, Term lhs, Term rhs) {
    Atom a;
    a.builtin = op;
    a.args.push_back(std::move(lhs));
    a.args.push_back(std::move(rhs));
    return a;
}

bool Atom::is_ground() const {
    for (const auto& t : args)
        if (!t.is_ground()) return false;
    return true;
}

bool Atom::operator==(const Atom& o) const {
    return builtin == o.builtin && predicate == o.predicate && args == o.args;
}

bool Atom::operator<(const Atom& o) const {
    if (builtin != o.builtin) return builtin < o.builtin;
    if (predicate != o.predicate) return predicate < o.predicate;
    return args < o.args;
}

std::string to_string(const Atom& a) {
    std::ostringstream os;
    if (a.is_builtin()) {
        print_term(os, a.args[0]);
        os << ' ' << builtin_symbol(a.builtin) << ' ';
        print_term(os, a.args[1]);
        return os.str();
    }
    os << a.predicate;
    if (!a.args.empty()) {
        os << '(';
        for (std::size_t i = 0; i < a.args.size(); ++i) {
            if (i) os << ',';
            print_term(os, a.args[i]);
        }
        os << ')';
    }
    return os.str();
}

std::string to_string(const Rule& r) {
    std::ostringstream os;
    if (r.is_choice) {
        os << "{ " << to_string(*r.head);
        for (std::size_t i = 0; i < r.choice_condition.size(); ++i)
            os << (i == 0 ? " : " : ", ") << to_string(r.choice_condition[i]);
        os << " }";
    } else if (r.head) {
        os << to_string(*r.head);
    }
    bool have_body = !r.positive_body.empty() || !r.negative_body.empty();
    if (have_body || r.is_constraint()) {
        os << (r.head || r.is_choice ? " :- " : ":- ");
        bool first = true;
        for (const auto& a : r.positive_body) {
            if (!first) os << ", ";
            os << to_string(a);
            first = false;
        }
        for (const auto& a : r.negative_body) {
            if (!first) os << ", ";
            os << "not " << to_string(a);
            first = false;
        }
    }
    os << '.';
    return os.str();
}

std::string to_string(const SignSet& s) {
    std::string out;
    if (s.has_t()) out += 'T';
    if (s.has_m()) out += 'M';
    if (s.has_f()) out += 'F';
    return out;
}

std::string to_string(const HeuristicDirective& d) {
    std::ostringstream os;
    os << "#heuristic " << to_string(d.head.signs) << ' ' << to_string(d.head.atom);
    bool first = true;
    for (const auto& ha : d.positive_condition) {
        os << (first ? " : " : ", ");
        os << to_string(ha.signs) << ' ' << to_string(ha.atom);
        first = false;
    }
    for (const auto& g : d.guards) {
        os << (first ? " : " : ", ");
        os << to_string(g);
        first = false;
    }
    for (const auto& ha : d.negative_condition) {
        os << (first ? " : " : ", ");
        os << "not " << to_string(ha.signs) << ' ' << to_string(ha.atom);
        first = false;
    }
    os << ". [" << to_string(d.weight) << '@' << to_string(d.level) << ']';
    return os.str();
}

void collect_vars(const Term& t, std::set<std::string>& out) {
    if (t.kind == TermKind::Variable) {
        out.insert(t.text);
        return;
    }
    for (const auto& a : t.args) collect_vars(a, out);
}

std::set<std::string> vars(const Term& t) {
    std::set<std::string> out;
    collect_vars(t, out);
    return out;
}

std::set<std::string> vars(const Atom& a) {
    std::set<std::string> out;
    for (const auto& t : a.args) collect_vars(t, out);
    return out;
}

std::set<std::string> vars(const Rule& r) {
    std::set<std::string> out;
    if (r.head)
        for (const auto& t : r.head->args) collect_vars(t, out);
    for (const auto& a : r.positive_body)
        for (const auto& t : a.args) collect_vars(t, out);
    for (const auto& a : r.negative_body)
        for (const auto& t : a.args) collect_vars(t, out);
    for (const auto& a : r.choice_condition)
        for (const auto& t : a.args) collect_vars(t, out);
    return out;
}

std::set<std::string> vars(const HeuristicDirective& d) {
    std::set<std::string> out;
    for (const auto& t : d.head.atom.args) collect_vars(t, out);
    for (const auto& ha : d.positive_condition)
        for (const auto& t : ha.atom.args) collect_vars(t, out);
    for (const auto& ha : d.negative_condition)
        for (const auto& t : ha.atom.args) collect_vars(t, out);
    for (const auto& g : d.guards)
        for (const auto& t : g.args) collect_vars(t, out);
    collect_vars(d.weight, out);
    collect_vars(d.level, out);
    return out;
}

std::int64_t eval_int(const Term& t) {
    switch (t.kind) {
    case TermKind::Integer: return t.value;
    case TermKind::Variable: throw EvalError("unbound variable " + t.text + " in arithmetic term");
    case TermKind::Constant: throw EvalError("non-integer operand " + t.text + " in arithmetic term");
    case TermKind::Function: throw EvalError("non-integer operand " + to_string(t) + " in arithmetic term");
    case TermKind::Interval: throw EvalError("interval term " + to_string(t) + " in arithmetic context");
    case TermKind::Arithmetic: break;
    }
    if (t.op == ArithOp::Abs) {
        std::int64_t v = eval_int(t.args[0]);
        return v < 0 ? -v : v;
    }
    if (t.op == ArithOp::Neg) return -eval_int(t.args[0]);
    std::int64_t l = eval_int(t.args[0]);
    std::int64_t r = eval_int(t.args[1]);
    switch (t.op) {
    case ArithOp::Add: return l + r;
    case ArithOp::Sub: return l - r;
    case ArithOp::Mul: return l * r;
    case ArithOp::Div:
        if (r == 0) throw EvalError("division by zero");
        return l / r;
    case ArithOp::Mod:
        if (r == 0) throw EvalError("modulo by zero");
        return l % r;
    default: break;
    }
    throw EvalError("malformed arithmetic term");
}

Term apply(const Term& t, const Substitution& sigma) {
    switch (t.kind) {
    case TermKind::Variable: {
        auto it = sigma.find(t.text);
        return it == sigma.end() ? t : it->second;
    }
    case TermKind::Constant:
    case TermKind::Integer: return t;
    case TermKind::Function: {
        Term out = t;
        for (auto& a : out.args) a = apply(a, sigma);
        return out;
    }
    case TermKind::Arithmetic: {
        Term out = t;
        for (auto& a : out.args) a = apply(a, sigma);
        if (out.is_ground()) return Term::integer(eval_int(out));
        return out;
    }
    case TermKind::Interval: {
        Term out = t;
        for (auto& a : out.args) a = apply(a, sigma);
        return out;
    }
    }
    return t;
}

Atom apply(const Atom& a, const Substitution& sigma) {
    Atom out = a;
    for (auto& t : out.args) t = apply(t, sigma);
    return out;
}

Rule apply(const Rule& r, const Substitution& sigma) {
    Rule out = r;
    if (out.head) *out.head = apply(*out.head, sigma);
    for (auto& a : out.positive_body) a = apply(a, sigma);
    for (auto& a : out.negative_body) a = apply(a, sigma);
    for (auto& a : out.choice_condition) a = apply(a, sigma);
    return out;
}

HeuristicAtom apply(const HeuristicAtom& ha, const Substitution& sigma) {
    return HeuristicAtom{ha.signs, apply(ha.atom, sigma)};
}

HeuristicDirective apply(const HeuristicDirective& d, const Substitution& sigma) {
    HeuristicDirective out = d;
    out.head = apply(out.head, sigma);
    for (auto& ha : out.positive_condition) ha = apply(ha, sigma);
    for (auto& ha : out.negative_condition) ha = apply(ha, sigma);
    for (auto& g : out.guards) g = apply(g, sigma);
    out.weight = apply(out.weight, sigma);
    out.level = apply(out.level, sigma);
    return out;
}

Atom apply_ground(const Atom& a, const Substitution& sigma) {
    Atom out = apply(a, sigma);
    if (!out.is_ground()) {
        auto vs = vars(out);
        throw EvalError("unbound variable " + (vs.empty() ? std::string("?") : *vs.begin()) +
                        " in atom " + to_string(out));
    }
    return out;
}

namespace {

bool occurs(const std::string& var, const Term& t) {
    if (t.kind == TermKind::Variable) return t.text == var;
    for (const auto& a : t.args)
        if (occurs(var, a)) return true;
    return false;
}

bool unify_terms(Term a, Term b, Substitution& sigma) {
    a = apply(a, sigma);
    b = apply(b, sigma);
    if (a.kind == TermKind::Variable) {
        if (b.kind == TermKind::Variable && b.text == a.text) return true;
        if (occurs(a.text, b)) return false;
        sigma[a.text] = b;
        // Normalize existing bindings against the new one.
        for (auto& [k, v] : sigma) v = apply(v, sigma);
        return true;
    }
    if (b.kind == TermKind::Variable) return unify_terms(b, a, sigma);
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case TermKind::Constant: return a.text == b.text;
    case TermKind::Integer: return a.value == b.value;
    case TermKind::Function:
        if (a.text != b.text || a.args.size() != b.args.size()) return false;
        break;
    case TermKind::Arithmetic:
        if (a.op != b.op || a.args.size() != b.args.size()) return false;
        break;
    case TermKind::Interval: break;
    default: return false;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!unify_terms(a.args[i], b.args[i], sigma)) return false;
    return true;
}

} // namespace

std::optional<Substitution> unify(const Atom& a, const Atom& b) {
    if (a.builtin != b.builtin || a.predicate != b.predicate || a.args.size() != b.args.size())
        return std::nullopt;
    Substitution sigma;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!unify_terms(a.args[i], b.args[i], sigma)) return std::nullopt;
    return sigma;
}

} // namespace heurasp::ast
