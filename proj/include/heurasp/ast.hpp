#ifndef HEURASP_AST_HPP
#define HEURASP_AST_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace heurasp::ast {

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

enum class TermKind { Variable, Constant, Integer, Function, Arithmetic, Interval };

enum class ArithOp { Add, Sub, Mul, Div, Mod, Abs, Neg };

struct Term {
    TermKind kind = TermKind::Constant;
    std::string text;          // variable name, constant symbol, or function symbol
    std::int64_t value = 0;    // integer payload
    ArithOp op = ArithOp::Add; // arithmetic payload
    std::vector<Term> args;    // function args, arithmetic operands, interval bounds

    static Term variable(std::string name);
    static Term constant(std::string symbol);
    static Term integer(std::int64_t v);
    static Term function(std::string symbol, std::vector<Term> args);
    static Term arithmetic(ArithOp op, std::vector<Term> operands);
    static Term interval(Term lo, Term hi);

    bool operator==(const Term& other) const;
    bool operator!=(const Term& other) const { return !(*this == other); }
    bool operator<(const Term& other) const;

    bool is_ground() const;
    bool contains_interval() const;
};

std::string to_string(const Term& t);

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

// Comparison built-ins are reserved predicates evaluated at grounding time.
enum class Builtin { None, Eq, Neq, Lt, Le, Gt, Ge };

struct Atom {
    std::string predicate;
    std::vector<Term> args;
    Builtin builtin = Builtin::None;

    std::size_t arity() const { return args.size(); }
    bool is_builtin() const { return builtin != Builtin::None; }
    bool is_ground() const;

    bool operator==(const Atom& other) const;
    bool operator!=(const Atom& other) const { return !(*this == other); }
    bool operator<(const Atom& other) const;
};

Atom make_atom(std::string predicate, std::vector<Term> args = {});
Atom make_comparison(Builtin op, Term lhs, Term rhs);

std::string to_string(const Atom& a);

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

struct Rule {
    std::optional<Atom> head;        // absent <=> integrity constraint
    std::vector<Atom> positive_body; // includes comparison built-ins
    std::vector<Atom> negative_body;
    bool is_choice = false;          // pre-rewrite only: { head } :- body.
    std::vector<Atom> choice_condition; // conditional literals of the choice element
    int line = 0;

    bool is_fact() const {
        return head.has_value() && positive_body.empty() && negative_body.empty() && !is_choice;
    }
    bool is_constraint() const { return !head.has_value(); }
};

std::string to_string(const Rule& r);

// ---------------------------------------------------------------------------
// Heuristic directives
// ---------------------------------------------------------------------------

// A sign set is a nonempty subset of {F, M, T}, packed into three bits.
struct SignSet {
    unsigned bits = 0; // bit 0 = T, bit 1 = M, bit 2 = F

    static const SignSet T;
    static const SignSet M;
    static const SignSet F;
    static const SignSet MT;
    static const SignSet FM;
    static const SignSet FT;
    static const SignSet FMT;

    bool has_t() const { return bits & 1u; }
    bool has_m() const { return bits & 2u; }
    bool has_f() const { return bits & 4u; }
    bool empty() const { return bits == 0; }

    SignSet with_t() const { return SignSet{bits | 1u}; }
    SignSet with_m() const { return SignSet{bits | 2u}; }
    SignSet with_f() const { return SignSet{bits | 4u}; }
    SignSet without_f() const { return SignSet{bits & ~4u}; }

    bool operator==(const SignSet& o) const { return bits == o.bits; }
    bool operator!=(const SignSet& o) const { return bits != o.bits; }
    bool operator<(const SignSet& o) const { return bits < o.bits; }

    // Canonical (post-transform) sign sets are {F}, {T} and {M,T}.
    bool is_canonical() const { return *this == T || *this == F || *this == MT; }
};

std::string to_string(const SignSet& s); // prints in the grammar's T,M,F order

struct HeuristicAtom {
    SignSet signs;
    Atom atom;

    bool operator==(const HeuristicAtom& o) const { return signs == o.signs && atom == o.atom; }
    bool operator<(const HeuristicAtom& o) const {
        if (signs != o.signs) return signs < o.signs;
        return atom < o.atom;
    }
};

struct HeuristicDirective {
    HeuristicAtom head;                       // head sign is {T} or {F}
    std::vector<HeuristicAtom> positive_condition;
    std::vector<HeuristicAtom> negative_condition;
    std::vector<Atom> guards;                 // builtin atoms gained by enhancement
    Term weight = Term::integer(0);
    Term level = Term::integer(0);
    int line = 0;
    int origin = -1; // index of the user-written directive this one descends from

    bool operator==(const HeuristicDirective& o) const {
        return head == o.head && positive_condition == o.positive_condition &&
               negative_condition == o.negative_condition && guards == o.guards &&
               weight == o.weight && level == o.level;
    }
};

std::string to_string(const HeuristicDirective& d);

// ---------------------------------------------------------------------------
// Substitutions
// ---------------------------------------------------------------------------

using Substitution = std::map<std::string, Term>;

class EvalError : public std::runtime_error {
public:
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

// Variable collection. Exact set of variable names occurring anywhere in the object.
void collect_vars(const Term& t, std::set<std::string>& out);
std::set<std::string> vars(const Term& t);
std::set<std::string> vars(const Atom& a);
std::set<std::string> vars(const Rule& r);
std::set<std::string> vars(const HeuristicDirective& d);

// Integer evaluation of a ground term. Throws EvalError on non-integer
// operands, division by zero, or remaining variables.
std::int64_t eval_int(const Term& t);

// Substitution application. Unbound variables are left in place; arithmetic
// subterms are evaluated to integers once fully ground. Intervals are not
// evaluated here (they are expanded by the parser).
Term apply(const Term& t, const Substitution& sigma);
Atom apply(const Atom& a, const Substitution& sigma);
Rule apply(const Rule& r, const Substitution& sigma);
HeuristicAtom apply(const HeuristicAtom& ha, const Substitution& sigma);
HeuristicDirective apply(const HeuristicDirective& d, const Substitution& sigma);

// Like apply, but demands a variable-free result. Throws EvalError when some
// variable is unbound.
Atom apply_ground(const Atom& a, const Substitution& sigma);

// Most general unifier of two atoms (treating all variables as open).
// Returns nullopt when the atoms do not unify. Arithmetic terms unify
// syntactically only.
std::optional<Substitution> unify(const Atom& a, const Atom& b);

} // namespace heurasp::ast

#endif
