#include "heurasp/parser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace heurasp::parser {

using namespace heurasp::ast;

namespace {

enum class Tok {
    End, LowerId, UpperId, Int, Not, HashHeuristic,
    Dot, DotDot, Comma, Colon, ColonDash, LParen, RParen, LBrace, RBrace,
    LBracket, RBracket, At, Pipe,
    Plus, Minus, Star, Slash, Backslash,
    Eq, Neq, Lt, Le, Gt, Ge,
};

struct Token {
    Tok kind;
    std::string text;
    std::int64_t value = 0;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : src_(text) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= src_.size()) {
            t.kind = Tok::End;
            return t;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
            t.kind = Tok::Int;
            t.text = src_.substr(start, pos_ - start);
            t.value = std::stoll(t.text);
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                advance();
            t.text = src_.substr(start, pos_ - start);
            if (t.text == "not") {
                t.kind = Tok::Not;
            } else if (std::isupper(static_cast<unsigned char>(t.text[0]))) {
                t.kind = Tok::UpperId;
            } else if (t.text[0] == '_') {
                throw ParseError("identifiers may not start with '_' (reserved)", t.line, t.column);
            } else {
                t.kind = Tok::LowerId;
            }
            return t;
        }
        switch (c) {
        case '#': {
            advance();
            std::size_t start = pos_;
            while (pos_ < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_]))) advance();
            std::string word = src_.substr(start, pos_ - start);
            if (word != "heuristic")
                throw ParseError("unknown directive #" + word, t.line, t.column);
            t.kind = Tok::HashHeuristic;
            return t;
        }
        case '.':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '.') {
                advance();
                t.kind = Tok::DotDot;
            } else {
                t.kind = Tok::Dot;
            }
            return t;
        case ',': advance(); t.kind = Tok::Comma; return t;
        case ':':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '-') {
                advance();
                t.kind = Tok::ColonDash;
            } else {
                t.kind = Tok::Colon;
            }
            return t;
        case '(': advance(); t.kind = Tok::LParen; return t;
        case ')': advance(); t.kind = Tok::RParen; return t;
        case '{': advance(); t.kind = Tok::LBrace; return t;
        case '}': advance(); t.kind = Tok::RBrace; return t;
        case '[': advance(); t.kind = Tok::LBracket; return t;
        case ']': advance(); t.kind = Tok::RBracket; return t;
        case '@': advance(); t.kind = Tok::At; return t;
        case '|': advance(); t.kind = Tok::Pipe; return t;
        case '+': advance(); t.kind = Tok::Plus; return t;
        case '-': advance(); t.kind = Tok::Minus; return t;
        case '*': advance(); t.kind = Tok::Star; return t;
        case '/': advance(); t.kind = Tok::Slash; return t;
        case '\\': advance(); t.kind = Tok::Backslash; return t;
        case '=': advance(); t.kind = Tok::Eq; return t;
        case '!':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '=') {
                advance();
                t.kind = Tok::Neq;
                return t;
            }
            throw ParseError("unexpected '!'", t.line, t.column);
        case '<':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '=') {
                advance();
                t.kind = Tok::Le;
            } else if (pos_ < src_.size() && src_[pos_] == '>') {
                advance();
                t.kind = Tok::Neq;
            } else {
                t.kind = Tok::Lt;
            }
            return t;
        case '>':
            advance();
            if (pos_ < src_.size() && src_[pos_] == '=') {
                advance();
                t.kind = Tok::Ge;
            } else {
                t.kind = Tok::Gt;
            }
            return t;
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { bump(); }

    SourceProgram parse() {
        SourceProgram out;
        while (cur_.kind != Tok::End) {
            if (cur_.kind == Tok::HashHeuristic) {
                out.directives.push_back(parse_directive());
            } else {
                parse_rule(out);
            }
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, cur_.line, cur_.column); }

    void bump() { cur_ = lexer_.next(); }

    bool accept(Tok k) {
        if (cur_.kind == k) {
            bump();
            return true;
        }
        return false;
    }

    void expect(Tok k, const char* what) {
        if (!accept(k)) fail(std::string("expected ") + what);
    }

    // term := addterm; addterm := multerm (('+'|'-') multerm)*;
    // multerm := primary (('*'|'/'|'\') primary)*
    // primary := int | var | const | func | '(' term ')' | '|' term '|' | '-' primary
    Term parse_term() { return parse_add(); }

    Term parse_add() {
        Term lhs = parse_mul();
        for (;;) {
            if (accept(Tok::Plus)) {
                lhs = Term::arithmetic(ArithOp::Add, {std::move(lhs), parse_mul()});
            } else if (accept(Tok::Minus)) {
                lhs = Term::arithmetic(ArithOp::Sub, {std::move(lhs), parse_mul()});
            } else {
                return lhs;
            }
        }
    }

    Term parse_mul() {
        Term lhs = parse_primary();
        for (;;) {
            if (accept(Tok::Star)) {
                lhs = Term::arithmetic(ArithOp::Mul, {std::move(lhs), parse_primary()});
            } else if (accept(Tok::Slash)) {
                lhs = Term::arithmetic(ArithOp::Div, {std::move(lhs), parse_primary()});
            } else if (accept(Tok::Backslash)) {
                lhs = Term::arithmetic(ArithOp::Mod, {std::move(lhs), parse_primary()});
            } else {
                return lhs;
            }
        }
    }

    Term parse_primary() {
        if (cur_.kind == Tok::Int) {
            std::int64_t v = cur_.value;
            bump();
            if (accept(Tok::DotDot)) return Term::interval(Term::integer(v), parse_primary());
            return Term::integer(v);
        }
        if (cur_.kind == Tok::Minus) {
            bump();
            Term inner = parse_primary();
            if (inner.kind == TermKind::Integer) return Term::integer(-inner.value);
            return Term::arithmetic(ArithOp::Neg, {std::move(inner)});
        }
        if (cur_.kind == Tok::Pipe) {
            bump();
            Term inner = parse_term();
            expect(Tok::Pipe, "'|'");
            return Term::arithmetic(ArithOp::Abs, {std::move(inner)});
        }
        if (cur_.kind == Tok::LParen) {
            bump();
            Term inner = parse_term();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (cur_.kind == Tok::UpperId) {
            Term t = Term::variable(cur_.text);
            bump();
            return t;
        }
        if (cur_.kind == Tok::LowerId) {
            std::string name = cur_.text;
            bump();
            if (cur_.kind == Tok::LParen) {
                bump();
                std::vector<Term> args;
                args.push_back(parse_term());
                while (accept(Tok::Comma)) args.push_back(parse_term());
                expect(Tok::RParen, "')'");
                return Term::function(name, std::move(args));
            }
            return Term::constant(name);
        }
        fail("expected term");
    }

    static bool is_cmp(Tok k) {
        return k == Tok::Eq || k == Tok::Neq || k == Tok::Lt || k == Tok::Le || k == Tok::Gt ||
               k == Tok::Ge;
    }

    Builtin cmp_builtin(Tok k) {
        switch (k) {
        case Tok::Eq: return Builtin::Eq;
        case Tok::Neq: return Builtin::Neq;
        case Tok::Lt: return Builtin::Lt;
        case Tok::Le: return Builtin::Le;
        case Tok::Gt: return Builtin::Gt;
        case Tok::Ge: return Builtin::Ge;
        default: fail("expected comparison operator");
        }
    }

    void check_predicate(const std::string& name, int line, int column) {
        if (name.size() > 5 && name.substr(name.size() - 5) == "__off")
            throw ParseError("predicate '" + name + "' uses the reserved '__off' suffix", line,
                             column);
    }

    Atom parse_classical_atom() {
        if (cur_.kind != Tok::LowerId) fail("expected predicate name");
        int line = cur_.line, column = cur_.column;
        std::string name = cur_.text;
        check_predicate(name, line, column);
        bump();
        std::vector<Term> args;
        if (accept(Tok::LParen)) {
            args.push_back(parse_term());
            while (accept(Tok::Comma)) args.push_back(parse_term());
            expect(Tok::RParen, "')'");
        }
        return make_atom(std::move(name), std::move(args));
    }

    // A body literal is 'not' atom, an atom, or a comparison between terms.
    // Returns (atom, negated).
    std::pair<Atom, bool> parse_body_literal() {
        bool negated = accept(Tok::Not);
        // Could be a comparison whose left side is an arbitrary term.
        if (cur_.kind == Tok::LowerId) {
            Atom a = parse_classical_atom();
            if (is_cmp(cur_.kind)) {
                // constant/function term compared: rebuild as term comparison
                Builtin op = cmp_builtin(cur_.kind);
                bump();
                Term lhs = a.args.empty() ? Term::constant(a.predicate)
                                          : Term::function(a.predicate, a.args);
                return {make_comparison(op, std::move(lhs), parse_term()), negated};
            }
            return {std::move(a), negated};
        }
        Term lhs = parse_term();
        if (!is_cmp(cur_.kind)) fail("expected comparison operator");
        Builtin op = cmp_builtin(cur_.kind);
        bump();
        return {make_comparison(op, std::move(lhs), parse_term()), negated};
    }

    void parse_body_into(Rule& r) {
        for (;;) {
            auto [atom, negated] = parse_body_literal();
            if (negated) {
                if (atom.is_builtin()) fail("negated comparison literals are not supported");
                r.negative_body.push_back(std::move(atom));
            } else {
                r.positive_body.push_back(std::move(atom));
            }
            if (!accept(Tok::Comma)) break;
        }
    }

    void expand_interval_fact(const Rule& fact, SourceProgram& out) {
        // Find the first interval arg and expand; recurse for cross products.
        const Atom& head = *fact.head;
        for (std::size_t i = 0; i < head.args.size(); ++i) {
            if (head.args[i].kind != TermKind::Interval) continue;
            std::int64_t lo, hi;
            try {
                lo = eval_int(head.args[i].args[0]);
                hi = eval_int(head.args[i].args[1]);
            } catch (const EvalError& e) {
                throw ParseError(std::string("interval bound: ") + e.what(), fact.line, 1);
            }
            for (std::int64_t v = lo; v <= hi; ++v) {
                Rule inst = fact;
                inst.head->args[i] = Term::integer(v);
                expand_interval_fact(inst, out);
            }
            return;
        }
        out.rules.push_back(fact);
    }

    void parse_rule(SourceProgram& out) {
        Rule r;
        r.line = cur_.line;
        if (cur_.kind == Tok::LBrace) {
            bump();
            r.is_choice = true;
            r.head = parse_classical_atom();
            if (accept(Tok::Colon)) {
                for (;;) {
                    auto [atom, negated] = parse_body_literal();
                    if (negated) fail("negated conditions in choice elements are not supported");
                    r.choice_condition.push_back(std::move(atom));
                    if (!accept(Tok::Comma)) break;
                }
            }
            expect(Tok::RBrace, "'}'");
            if (cur_.kind == Tok::Int || cur_.kind == Tok::LowerId)
                fail("cardinality bounds on choice rules are not supported");
        } else if (cur_.kind != Tok::ColonDash) {
            r.head = parse_classical_atom();
        }
        if (accept(Tok::ColonDash)) {
            if (cur_.kind != Tok::Dot) parse_body_into(r);
        }
        expect(Tok::Dot, "'.'");

        bool head_has_interval =
            r.head.has_value() &&
            std::any_of(r.head->args.begin(), r.head->args.end(),
                        [](const Term& t) { return t.contains_interval(); });
        if (head_has_interval) {
            if (!r.is_fact())
                throw ParseError("interval terms are only permitted in facts", r.line, 1);
            expand_interval_fact(r, out);
            return;
        }
        for (const auto& a : r.positive_body)
            for (const auto& t : a.args)
                if (t.contains_interval())
                    throw ParseError("interval terms are only permitted in facts", r.line, 1);
        for (const auto& a : r.negative_body)
            for (const auto& t : a.args)
                if (t.contains_interval())
                    throw ParseError("interval terms are only permitted in facts", r.line, 1);
        out.rules.push_back(std::move(r));
    }

    // Sign sets are spelled as a run of T/M/F letters directly before an atom,
    // e.g. "TM b" or "not TMF e". Lexed as an upper identifier; accepted in any
    // order.
    static bool is_sign_word(const std::string& s) {
        if (s.empty()) return false;
        for (char c : s)
            if (c != 'T' && c != 'M' && c != 'F') return false;
        return true;
    }

    static SignSet sign_word_to_set(const std::string& s, int line, int column) {
        SignSet set;
        for (char c : s) {
            SignSet before = set;
            if (c == 'T') set = set.with_t();
            if (c == 'M') set = set.with_m();
            if (c == 'F') set = set.with_f();
            if (set == before)
                throw ParseError(std::string("duplicate sign symbol '") + c + "'", line, column);
        }
        return set;
    }

    HeuristicAtom parse_heuristic_atom(SignSet fallback) {
        SignSet signs = fallback;
        if (cur_.kind == Tok::UpperId && is_sign_word(cur_.text)) {
            signs = sign_word_to_set(cur_.text, cur_.line, cur_.column);
            bump();
        }
        return HeuristicAtom{signs, parse_classical_atom()};
    }

    HeuristicDirective parse_directive() {
        HeuristicDirective d;
        d.line = cur_.line;
        expect(Tok::HashHeuristic, "#heuristic");
        d.head = parse_heuristic_atom(SignSet::T);
        if (d.head.signs != SignSet::T && d.head.signs != SignSet::F)
            throw ParseError("heuristic head sign must be T or F", d.line, 1);
        if (accept(Tok::Colon)) {
            for (;;) {
                bool negated = accept(Tok::Not);
                HeuristicAtom ha = parse_heuristic_atom(SignSet::MT);
                if (negated)
                    d.negative_condition.push_back(std::move(ha));
                else
                    d.positive_condition.push_back(std::move(ha));
                if (!accept(Tok::Comma)) break;
            }
        }
        expect(Tok::Dot, "'.'");
        if (accept(Tok::LBracket)) {
            d.weight = parse_term();
            if (accept(Tok::At)) d.level = parse_term();
            expect(Tok::RBracket, "']'");
        }
        return d;
    }

    Lexer lexer_;
    Token cur_;
};

} // namespace

SourceProgram parse_program(const std::string& text) { return Parser(text).parse(); }

std::string pretty_print(const SourceProgram& p) {
    std::ostringstream os;
    for (const auto& r : p.rules) os << heurasp::ast::to_string(r) << '\n';
    for (const auto& d : p.directives) os << heurasp::ast::to_string(d) << '\n';
    return os.str();
}

} // namespace heurasp::parser
