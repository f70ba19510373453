#ifndef HEURASP_NOGOOD_HPP
#define HEURASP_NOGOOD_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "heurasp/atom_store.hpp"

namespace heurasp::solve {

enum class Polarity : std::uint8_t { T, F };

struct Literal {
    Polarity pol;
    AtomId atom;

    bool operator==(const Literal& o) const { return pol == o.pol && atom == o.atom; }
    bool operator<(const Literal& o) const {
        if (atom != o.atom) return atom < o.atom;
        return pol < o.pol;
    }
};

inline Literal lit_t(AtomId a) { return Literal{Polarity::T, a}; }
inline Literal lit_f(AtomId a) { return Literal{Polarity::F, a}; }

// A nogood is a set of signed literals that must never all be satisfied.
// One literal of polarity F may be marked as the head; T-unit propagation on
// the head assigns true (justified) rather than must-be-true.
struct Nogood {
    std::vector<Literal> literals;
    int head = -1; // index into literals, or -1 when headless

    bool has_head() const { return head >= 0; }
    const Literal& head_literal() const { return literals[head]; }
};

// Builds a nogood with duplicate literals merged; keeps insertion order.
// Returns false (tautology) when both polarities of one atom occur.
inline bool build_nogood(std::vector<Literal> lits, int head_pos, Nogood& out) {
    out.literals.clear();
    out.head = -1;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        const Literal& l = lits[i];
        auto it = std::find_if(out.literals.begin(), out.literals.end(),
                               [&](const Literal& x) { return x.atom == l.atom; });
        if (it != out.literals.end()) {
            if (it->pol != l.pol) return false; // tautological
            if (static_cast<int>(i) == head_pos)
                out.head = static_cast<int>(it - out.literals.begin());
            continue;
        }
        if (static_cast<int>(i) == head_pos) out.head = static_cast<int>(out.literals.size());
        out.literals.push_back(l);
    }
    return true;
}

inline std::string to_string(const Nogood& ng, const AtomStore& store) {
    std::string out = "{ ";
    for (std::size_t i = 0; i < ng.literals.size(); ++i) {
        if (i) out += ", ";
        if (static_cast<int>(i) == ng.head) out += '*';
        out += ng.literals[i].pol == Polarity::T ? "T " : "F ";
        out += store.name(ng.literals[i].atom);
    }
    out += " }";
    return out;
}

} // namespace heurasp::solve

#endif
